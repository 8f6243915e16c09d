#include <doctest.h>

#include <random>

#include "vkrod/cell.hpp"

using namespace vkrod;

namespace {

MicrostructureSpec homogeneous(double lambda = 1.0, double mu = 1.0) {
    MicrostructureSpec spec;
    spec.kind = MicrostructureKind::Periodic;
    spec.phases = {isotropic_tensor(lambda, mu)};
    spec.layout = {{0, 1.0}};
    return spec;
}

MicrostructureSpec laminate() {
    MicrostructureSpec spec;
    spec.kind = MicrostructureKind::Periodic;
    spec.phases = {isotropic_tensor(1.0, 1.0), isotropic_tensor(2.0, 2.0)};
    spec.layout = {{0, 0.5}, {1, 0.5}};
    return spec;
}

// Minimum of the identical discrete functional by a dense KKT solve.
double dense_minimum(const CellProblem& cell, const MacroStrain& ms) {
    const int n = cell.dof_count();
    const auto& constraints = cell.projector().vectors();
    const int m = (int)constraints.size();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = Eigen::MatrixXd(cell.stiffness());
    for (int r = 0; r < m; ++r)
        for (size_t k = 0; k < constraints[r].first.size(); ++k) {
            kkt(n + r, constraints[r].first[k]) = constraints[r].second[k];
            kkt(constraints[r].first[k], n + r) = constraints[r].second[k];
        }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    rhs.head(n) = -cell.macro_rhs(ms);
    const Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(kkt).solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    return cell.macro_constant(ms) + cell.macro_rhs(ms).dot(x)
         + 0.5 * x.dot(cell.stiffness() * x);
}

} // namespace

TEST_CASE("homogeneous stretching recovers the Young modulus") {
    const MicrostructureRealization micro = realize(homogeneous(1.0, 1.0));
    RegimeSpec regime;
    regime.regime = Regime::Finite;
    regime.gamma = 1.0;
    regime.axial_nodes = 2;

    MacroStrain stretch;
    stretch.rho = 1.0;

    const double target = 0.5 * young_modulus(1.0, 1.0);
    CrossSection cs = normalize_section(build_disk_section(1.0, 0.35));
    double prev_gap = 1e9;
    for (int level = 0; level < 2; ++level) {
        CellProblem cell(regime, cs, micro);
        const CorrectorField corr = cell.solve_corrector(stretch);
        const double e = cell.cell_energy(corr, stretch);
        const double gap = std::abs(e - target) / target;
        CHECK(gap < prev_gap + 1e-12);
        prev_gap = gap;
        if (level == 1) CHECK(gap < 0.01);
        cs = refine_uniform(cs);
    }
}

TEST_CASE("zero macro strain gives a zero corrector") {
    const MicrostructureRealization micro = realize(homogeneous());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.4));
    for (Regime reg : {Regime::Finite, Regime::Zero, Regime::Infinite}) {
        RegimeSpec regime;
        regime.regime = reg;
        regime.axial_nodes = 4;
        CellProblem cell(regime, cs, micro);
        const CorrectorField corr = cell.solve_corrector(MacroStrain{});
        CHECK(corr.dofs.norm() == 0.0);
        CHECK(cell.cell_energy(corr, MacroStrain{}) == 0.0);
    }
}

TEST_CASE("iterative solve matches the dense minimization") {
    const MicrostructureRealization micro = realize(laminate());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.5));
    for (Regime reg : {Regime::Finite, Regime::Zero, Regime::Infinite}) {
        RegimeSpec regime;
        regime.regime = reg;
        regime.gamma = 1.0;
        regime.axial_nodes = 4;
        CellProblem cell(regime, cs, micro);
        for (int k = 0; k < 4; ++k) {
            MacroStrain ms;
            if (k == 0) ms.rho = 1.0; else ms.kappa(k - 1) = 1.0;
            const CorrectorField corr = cell.solve_corrector(ms);
            const double e_pcg = cell.cell_energy(corr, ms);
            const double e_dense = dense_minimum(cell, ms);
            CHECK(e_pcg == doctest::Approx(e_dense).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero corrector energy for a unit stretch") {
    // int Q(iota(e1)) over the unit-area section = mu |e1 x e1|^2 = 1
    const MicrostructureRealization micro = realize(homogeneous(0.0, 1.0));
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.3));
    RegimeSpec regime;
    regime.axial_nodes = 2;
    CellProblem cell(regime, cs, micro);
    CorrectorField zero;
    zero.regime = regime;
    zero.n_axial = regime.axial_nodes;
    zero.n_vertices = (int)cs.vertices.size();
    zero.dofs = Eigen::VectorXd::Zero(cell.dof_count());
    MacroStrain stretch;
    stretch.rho = 1.0;
    CHECK(cell.cell_energy(zero, stretch) == doctest::Approx(1.0).epsilon(1e-12));

    const CorrectorField opt = cell.solve_corrector(stretch);
    CHECK(cell.cell_energy(opt, stretch) <= cell.cell_energy(zero, stretch));
}

TEST_CASE("perturbing the minimizer raises the energy quadratically") {
    const MicrostructureRealization micro = realize(laminate());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.5));
    RegimeSpec regime;
    regime.axial_nodes = 4;
    CellProblem cell(regime, cs, micro);
    MacroStrain ms;
    ms.kappa(2) = 1.0;
    const CorrectorField opt = cell.solve_corrector(ms);
    const double e0 = cell.cell_energy(opt, ms);

    std::mt19937 rng(3);
    std::normal_distribution<double> dist;
    Eigen::VectorXd d(cell.dof_count());
    for (int i = 0; i < d.size(); ++i) d[i] = dist(rng);
    cell.projector().apply(d); // gauge-admissible direction

    double inc1 = 0.0, inc2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double delta = k == 0 ? 1e-3 : 2e-3;
        CorrectorField pert = opt;
        pert.dofs += delta * d;
        const double e = cell.cell_energy(pert, ms);
        CHECK(e >= e0 - 1e-14);
        (k == 0 ? inc1 : inc2) = e - e0;
    }
    CHECK(inc2 / inc1 == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("schur reduction") {
    SUBCASE("worked 4x4 example") {
        Eigen::Matrix4d a0;
        a0 << 2, 1, 0, 0,
              1, 3, 0, 0,
              0, 0, 4, 0,
              0, 0, 0, 5;
        auto [a01, rho0] = reduce_form(a0);
        Eigen::Matrix3d expect;
        expect << 2.5, 0, 0, 0, 4, 0, 0, 0, 5;
        CHECK((a01 - expect).norm() < 1e-14);
        CHECK((rho0 - Eigen::Vector3d(-0.5, 0, 0)).norm() < 1e-14);
    }
    SUBCASE("block diagonal") {
        Eigen::Matrix4d a0 = Eigen::Matrix4d::Zero();
        a0(0, 0) = 3;
        a0.block<3, 3>(1, 1) << 2, 1, 0, 1, 2, 0, 0, 0, 1;
        auto [a01, rho0] = reduce_form(a0);
        CHECK((a01 - a0.block<3, 3>(1, 1)).norm() == 0.0);
        CHECK(rho0.norm() == 0.0);
    }
    SUBCASE("grid search oracle on random SPD forms") {
        std::mt19937 rng(41);
        std::normal_distribution<double> dist;
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::Matrix4d R;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) R(r, c) = dist(rng);
            const Eigen::Matrix4d a0 = R * R.transpose() + 0.5 * Eigen::Matrix4d::Identity();
            const EffectiveForm eff = effective_form_from_a0(a0);
            Vector3 kappa(dist(rng), dist(rng), dist(rng));
            // bracket the quadratic minimum on a grid, then one exact
            // parabolic step through the best triple
            const double span = 4.0 * (std::abs(eff.rho0(kappa)) + 1.0);
            double best = 1e300, zbest = 0.0, dz = 2.0 * span / 10000;
            for (int i = 0; i <= 10000; ++i) {
                const double z = -span + i * dz;
                const double q = eff.q0(z, kappa);
                if (q < best) { best = q; zbest = z; }
            }
            const double qm = eff.q0(zbest - dz, kappa), qp = eff.q0(zbest + dz, kappa);
            const double zstar = zbest + 0.5 * dz * (qm - qp) / (qm - 2.0 * best + qp);
            const double qstar = eff.q0(zstar, kappa);
            CHECK(qstar == doctest::Approx(eff.q0_1(kappa)).epsilon(1e-8));
            CHECK(eff.q0(eff.rho0(kappa), kappa) == doctest::Approx(eff.q0_1(kappa)).epsilon(1e-12));
        }
    }
    SUBCASE("rejects a nonpositive stretch block") {
        Eigen::Matrix4d a0 = Eigen::Matrix4d::Identity();
        a0(0, 0) = -1.0;
        CHECK_THROWS_AS(reduce_form(a0), std::domain_error);
    }
}

TEST_CASE("regime independence for a homogeneous material") {
    const MicrostructureRealization micro = realize(homogeneous(1.0, 1.0));
    const CrossSection cs = normalize_section(build_disk_section(1.0, 0.3));
    std::array<Eigen::Matrix4d, 3> a0s;
    int idx = 0;
    for (Regime reg : {Regime::Zero, Regime::Finite, Regime::Infinite}) {
        RegimeSpec regime;
        regime.regime = reg;
        regime.gamma = 1.0;
        regime.axial_nodes = 4;
        a0s[idx++] = effective_form(regime, cs, micro).a0;
    }
    const double scale = a0s[1].norm();
    CHECK((a0s[0] - a0s[1]).norm() <= 1e-8 * scale);
    CHECK((a0s[2] - a0s[1]).norm() <= 1e-8 * scale);
}

TEST_CASE("effective form structure for a homogeneous disk") {
    const double lambda = 1.0, mu = 1.0;
    const MicrostructureRealization micro = realize(homogeneous(lambda, mu));
    const CrossSection cs = normalize_section(build_disk_section(1.0, 0.12));
    RegimeSpec regime;
    regime.axial_nodes = 2;
    CellProblem cell(regime, cs, micro);
    CellReport report;
    const EffectiveForm eff = cell.effective_form(&report);

    for (int k = 0; k < 4; ++k) CHECK(report.residuals[k] <= 1e-10);

    const double E = young_modulus(lambda, mu);
    CHECK(eff.a0(0, 0) == doctest::Approx(E).epsilon(0.02));
    CHECK(eff.a0(1, 1) == doctest::Approx(mu / (2.0 * M_PI)).epsilon(0.03));
    CHECK(eff.a0(2, 2) == doctest::Approx(E / (4.0 * M_PI)).epsilon(0.03));
    CHECK(eff.a0(3, 3) == doctest::Approx(E / (4.0 * M_PI)).epsilon(0.03));

    // frame consistency: no coupling on a symmetric section
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (r != c) CHECK(std::abs(eff.a0(r, c)) <= 1e-8 * eff.a0.norm());

    // Loewner order against the zero-corrector Gram matrix
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cell.macro_gram() - eff.a0);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * eff.a0.norm());
}

TEST_CASE("gauge invariance of the cell energy") {
    const MicrostructureRealization micro = realize(laminate());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.5));
    RegimeSpec regime;
    regime.axial_nodes = 4;
    CellProblem cell(regime, cs, micro);
    MacroStrain ms;
    ms.rho = 0.7;
    ms.kappa = Vector3(0.3, -0.2, 0.5);
    const CorrectorField opt = cell.solve_corrector(ms);
    const double e0 = cell.cell_energy(opt, ms);

    CorrectorField shifted = opt;
    const int V = (int)cs.vertices.size();
    for (int node = 0; node < regime.axial_nodes; ++node)
        for (int v = 0; v < V; ++v) {
            const double x2 = cs.vertices[v].x(), x3 = cs.vertices[v].y();
            const int base = 3 * (node * V + v);
            shifted.dofs[base + 0] += 0.37;            // constant shift
            shifted.dofs[base + 1] += -0.11 - 0.83 * x3; // constant + rotation
            shifted.dofs[base + 2] += 0.21 + 0.83 * x2;
        }
    CHECK(cell.cell_energy(shifted, ms) == doctest::Approx(e0).epsilon(1e-11));
}

TEST_CASE("explicit skew block does not lower the finite-regime minimum") {
    const MicrostructureRealization micro = realize(laminate());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.5));
    RegimeSpec plain;
    plain.axial_nodes = 8;
    RegimeSpec augmented = plain;
    augmented.augment_skew = true;
    CellProblem cell_plain(plain, cs, micro);
    CellProblem cell_aug(augmented, cs, micro);
    for (int k = 0; k < 4; ++k) {
        MacroStrain ms;
        if (k == 0) ms.rho = 1.0; else ms.kappa(k - 1) = 1.0;
        const double e_plain = cell_plain.cell_energy(cell_plain.solve_corrector(ms), ms);
        const double e_aug = cell_aug.cell_energy(cell_aug.solve_corrector(ms), ms);
        CHECK(e_aug <= e_plain + 1e-12 * std::abs(e_plain));
        CHECK(e_plain - e_aug <= 1e-9 * std::abs(e_plain));
    }
}

TEST_CASE("refinement monotonicity of the effective diagonal") {
    const MicrostructureRealization micro = realize(laminate());
    CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.7));
    RegimeSpec regime;
    regime.axial_nodes = 4;

    Eigen::Matrix4d prev = effective_form(regime, cs, micro).a0;

    // mesh refinement
    cs = refine_uniform(cs);
    Eigen::Matrix4d fine_mesh = effective_form(regime, cs, micro).a0;
    for (int k = 0; k < 4; ++k)
        CHECK(fine_mesh(k, k) <= prev(k, k) + 1e-10 * prev(k, k));

    // axial refinement
    regime.axial_nodes = 8;
    Eigen::Matrix4d fine_axial = effective_form(regime, cs, micro).a0;
    for (int k = 0; k < 4; ++k)
        CHECK(fine_axial(k, k) <= fine_mesh(k, k) + 1e-10 * fine_mesh(k, k));
}

TEST_CASE("corrector gauge constraints are satisfied") {
    const MicrostructureRealization micro = realize(laminate());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.5));
    MacroStrain ms;
    ms.rho = 1.0;
    ms.kappa(0) = 0.5;

    SUBCASE("finite regime: global mean and twist vanish") {
        RegimeSpec regime;
        regime.axial_nodes = 4;
        CellProblem cell(regime, cs, micro);
        CorrectorField corr = cell.solve_corrector(ms);
        Eigen::VectorXd x = corr.dofs;
        cell.projector().apply(x);
        CHECK((x - corr.dofs).norm() <= 1e-12 * std::max(1.0, corr.dofs.norm()));
    }
    SUBCASE("gamma->0: per-node section constraints on theta2") {
        RegimeSpec regime;
        regime.regime = Regime::Zero;
        regime.axial_nodes = 4;
        CellProblem cell(regime, cs, micro);
        CorrectorField corr = cell.solve_corrector(ms);
        const auto quadsum = [&](int node) {
            Vector3 mean = Vector3::Zero();
            double twist = 0.0;
            for (int tri = 0; tri < (int)cs.triangles.size(); ++tri) {
                const auto q = triangle_quadrature(cs, tri);
                const auto& t = cs.triangles[tri];
                for (int qpt = 0; qpt < 3; ++qpt) {
                    const double phi[3][3] = {{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
                    Vector3 val = Vector3::Zero();
                    for (int vl = 0; vl < 3; ++vl)
                        val += phi[qpt][vl] * corrector_theta2(corr, node, t[vl]);
                    mean += q.weight * val;
                    twist += q.weight * (q.points[qpt].x() * val(2) - q.points[qpt].y() * val(1));
                }
            }
            return std::make_pair(mean, twist);
        };
        for (int node = 0; node < regime.axial_nodes; ++node) {
            auto [mean, twist] = quadsum(node);
            CHECK(mean.norm() <= 1e-10);
            CHECK(std::abs(twist) <= 1e-10);
        }
    }
}
