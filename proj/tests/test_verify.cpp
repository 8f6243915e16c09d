#include <doctest.h>

#include <random>

#include "vkrod/verify.hpp"

using namespace vkrod;

namespace {

MicrostructureSpec homogeneous(double lambda = 0.0, double mu = 1.0) {
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

RegimeSpec finite_regime(int nodes = 4) {
    RegimeSpec r;
    r.regime = Regime::Finite;
    r.gamma = 1.0;
    r.axial_nodes = nodes;
    r.window = 1.0;
    return r;
}

CorrectorField zero_corrector(const RegimeSpec& regime, const CrossSection& cs) {
    CorrectorField c;
    c.regime = regime;
    c.n_axial = regime.axial_nodes;
    c.n_vertices = (int)cs.vertices.size();
    c.dofs = Eigen::VectorXd::Zero(3 * regime.axial_nodes * (int)cs.vertices.size());
    return c;
}

} // namespace

TEST_CASE("unfolded strain") {
    const MicrostructureRealization micro = realize(homogeneous());
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.3));
    const RegimeSpec regime = finite_regime();
    MacroStrain ms;
    ms.rho = 1.0;
    ms.kappa(2) = 0.4;

    SUBCASE("zero corrector reproduces the fixed part") {
        const CorrectorField zero = zero_corrector(regime, cs);
        const Vector3 x(0.37, 0.11, -0.21);
        const Matrix3 S = unfolded_strain(0.05, regime, zero, ms, x, cs, micro);
        const Matrix3 M = iota(macro_strain_field(ms, Vector2(x(1), x(2))));
        CHECK((S - 0.5 * (M + M.transpose())).norm() < 1e-14);
    }

    SUBCASE("homogeneous minimizer is constant along the axis") {
        CellProblem cell(regime, cs, micro);
        const CorrectorField corr = cell.solve_corrector(ms);
        const Vector3 base(0.0, 0.13, 0.07);
        const Matrix3 S0 = unfolded_strain(0.05, regime, corr, ms, base, cs, micro);
        for (double x1 : {0.11, 0.5, 0.77, 0.93}) {
            const Matrix3 S = unfolded_strain(0.05, regime, corr, ms,
                                              Vector3(x1, base(1), base(2)), cs, micro);
            CHECK((S - S0).norm() <= 1e-9 * std::max(1.0, S0.norm()));
        }
    }

    SUBCASE("laminate corrector strain is window periodic") {
        const MicrostructureRealization lam = realize(laminate());
        CellProblem cell(regime, cs, lam);
        const CorrectorField corr = cell.solve_corrector(ms);
        for (int tri : {0, 3, 7}) {
            const Matrix3 A = corrector_strain(corr, cs, tri, 1, 0.31);
            const Matrix3 B = corrector_strain(corr, cs, tri, 1, 1.31);
            CHECK((A - B).norm() <= 1e-12 * std::max(1.0, A.norm()));
        }
    }

    SUBCASE("regime mismatch is rejected") {
        RegimeSpec zero_regime = finite_regime();
        zero_regime.regime = Regime::Zero;
        const CorrectorField corr = zero_corrector(regime, cs);
        CHECK_THROWS_AS(unfolded_strain(0.1, zero_regime, corr, ms, Vector3(0, 0, 0), cs, micro),
                        std::invalid_argument);
    }
}

TEST_CASE("scaled quadratic energy") {
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.3));
    const RegimeSpec regime = finite_regime();

    SUBCASE("homogeneous zero-corrector stretch is h independent") {
        const MicrostructureRealization micro = realize(homogeneous(0.0, 1.0));
        MacroStrain ms;
        ms.rho = 1.0;
        const CorrectorField zero = zero_corrector(regime, cs);
        for (double h : {0.1, 0.025}) {
            const double e = scaled_quadratic_energy(h, regime, zero, ms, cs, micro, 1.0);
            CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("commensurate laminate window equals L times the cell value") {
        const MicrostructureRealization micro = realize(laminate());
        const RegimeSpec reg = finite_regime(4);
        CellProblem cell(reg, cs, micro);
        MacroStrain ms;
        ms.rho = 1.0;
        ms.kappa(1) = 0.3;
        const CorrectorField corr = cell.solve_corrector(ms);
        const double cell_value = cell.cell_energy(corr, ms);
        const double L = 1.0;
        for (double h : {0.1, 0.05, 0.025}) { // L/eps = 10, 20, 40 periods
            const double e = scaled_quadratic_energy(h, reg, corr, ms, cs, micro, L);
            CHECK(e == doctest::Approx(L * cell_value).epsilon(1e-10));
        }
    }

    SUBCASE("incommensurate windows leave an O(eps) boundary layer") {
        const MicrostructureRealization micro = realize(laminate());
        const RegimeSpec reg = finite_regime(4);
        CellProblem cell(reg, cs, micro);
        MacroStrain ms;
        ms.rho = 1.0;
        const CorrectorField corr = cell.solve_corrector(ms);
        const double cell_value = cell.cell_energy(corr, ms);
        std::vector<double> hs, errs;
        for (double h : {0.1, 0.05, 0.025, 0.0125}) {
            const double hi = h / std::sqrt(2.0); // irrational period count
            const double e = scaled_quadratic_energy(hi, reg, corr, ms, cs, micro, 1.0);
            hs.push_back(hi);
            errs.push_back(std::abs(e - cell_value));
            CHECK(std::abs(e - cell_value) <= 4.0 * hi * std::abs(cell_value));
        }
        CHECK(fit_loglog_rate(hs, errs) >= 0.8);
    }
}

TEST_CASE("convergence sweep") {
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.3));

    SUBCASE("homogeneous material hits the limit for every h") {
        const MicrostructureRealization micro = realize(homogeneous(1.0, 1.0));
        MacroStrain ms;
        ms.rho = 0.7;
        const SweepResult sweep = convergence_sweep({0.1, 0.05, 0.025}, finite_regime(2),
                                                    cs, micro, ms, 1.0);
        for (const auto& row : sweep.rows) {
            CHECK(row.epsilon == doctest::Approx(row.h));
            CHECK(row.abs_error <= 1e-10 * std::abs(sweep.limit_value));
        }
    }

    SUBCASE("laminate, commensurate list") {
        const MicrostructureRealization micro = realize(laminate());
        MacroStrain ms;
        ms.kappa(2) = 1.0;
        const SweepResult sweep = convergence_sweep({0.1, 0.05, 0.025, 0.0125}, finite_regime(4),
                                                    cs, micro, ms, 1.0);
        for (const auto& row : sweep.rows)
            CHECK(row.abs_error <= 1e-10 * std::abs(sweep.limit_value));
    }

    SUBCASE("input validation") {
        const MicrostructureRealization micro = realize(homogeneous());
        MacroStrain ms;
        CHECK_THROWS_AS(convergence_sweep({}, finite_regime(), cs, micro, ms, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(convergence_sweep({0.1, 0.2}, finite_regime(), cs, micro, ms, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("minimality transfers to the unfolded energy") {
    const CrossSection cs = normalize_section(build_rectangle_section(1, 1, 0.4));
    const MicrostructureRealization micro = realize(laminate());
    const RegimeSpec regime = finite_regime(4);
    CellProblem cell(regime, cs, micro);
    MacroStrain ms;
    ms.rho = 1.0;
    const CorrectorField opt = cell.solve_corrector(ms);
    const double h = 0.05;
    const double e_opt = scaled_quadratic_energy(h, regime, opt, ms, cs, micro, 1.0);

    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd d(cell.dof_count());
        for (int i = 0; i < d.size(); ++i) d[i] = 0.05 * dist(rng);
        cell.projector().apply(d);
        CorrectorField pert = opt;
        pert.dofs += d;
        const double e = scaled_quadratic_energy(h, regime, pert, ms, cs, micro, 1.0);
        CHECK(e >= e_opt - 1e-12 * std::abs(e_opt));
    }
}

TEST_CASE("nonlinear ansatz energy") {
    const double lambda = 1.0, mu = 1.0;
    const CrossSection cs = normalize_section(build_disk_section(1.0, 0.3));
    const MicrostructureRealization micro = realize(homogeneous(lambda, mu));
    const RegimeSpec regime = finite_regime(2);
    CellProblem cell(regime, cs, micro);
    std::array<CorrectorField, 4> unit;
    const EffectiveForm eff = cell.effective_form(nullptr, &unit);
    const std::vector<NonlinearLaw> laws{make_svk_law(lambda, mu)};

    SUBCASE("zero solution gives zero energy") {
        RodSolution zero;
        const int n = 51;
        zero.grid.resize(n);
        for (int i = 0; i < n; ++i) zero.grid[i] = i / (n - 1.0);
        zero.u.assign(n, 0.0); zero.up.assign(n, 0.0);
        zero.v2.assign(n, 0.0); zero.v3.assign(n, 0.0); zero.w.assign(n, 0.0);
        zero.v2p.assign(n, 0.0); zero.v3p.assign(n, 0.0); zero.wp.assign(n, 0.0);
        zero.v2pp.assign(n, 0.0); zero.v3pp.assign(n, 0.0);
        std::array<CorrectorField, 4> zeros = unit;
        for (auto& z : zeros) z.dofs.setZero();
        const AnsatzEnergy e = ansatz_energy_nonlinear(0.05, zero, zeros, laws, cs, micro, regime);
        CHECK(std::abs(e.nonlinear) < 1e-20);
        CHECK(std::abs(e.quadratic) < 1e-20);
    }

    SUBCASE("pure stretch approaches the relaxed stretching energy") {
        RodSolution stretch;
        const int n = 101;
        const double rho = 0.5;
        stretch.grid.resize(n);
        for (int i = 0; i < n; ++i) stretch.grid[i] = i / (n - 1.0);
        stretch.u.resize(n);
        for (int i = 0; i < n; ++i) stretch.u[i] = rho * stretch.grid[i];
        stretch.up.assign(n, rho);
        stretch.v2.assign(n, 0.0); stretch.v3.assign(n, 0.0); stretch.w.assign(n, 0.0);
        stretch.v2p.assign(n, 0.0); stretch.v3p.assign(n, 0.0); stretch.wp.assign(n, 0.0);
        stretch.v2pp.assign(n, 0.0); stretch.v3pp.assign(n, 0.0);
        const double target = 0.5 * young_modulus(lambda, mu) * rho * rho;
        double prev_gap = 1e300;
        for (double h : {0.1, 0.05, 0.025, 0.0125}) {
            const AnsatzEnergy e = ansatz_energy_nonlinear(h, stretch, unit, laws, cs, micro, regime);
            const double gap = std::abs(e.nonlinear - target) / target;
            if (h == 0.0125) CHECK(gap < 0.05);
            CHECK(gap <= prev_gap * 1.2 + 1e-12);
            prev_gap = gap;
        }
    }

    SUBCASE("cantilever ansatz approaches the elastic energy, cubic defect") {
        const EffectiveTable table(eff);
        LoadSpec load;
        load.L = 1.0;
        load.f2.poly = {0.5};
        const RodSolution sol = solve_rod(table, load, BcVariant::ClampedLeft, 501);
        const double hstep = sol.grid[1] - sol.grid[0];
        std::vector<double> work(sol.grid.size());
        for (size_t i = 0; i < sol.grid.size(); ++i)
            work[i] = load.f2.eval(sol.grid[i], load.L) * sol.v2[i];
        const double elastic = sol.energy + integrate_simpson(work, hstep);

        std::vector<double> hs, defects;
        double prev_gap = 1e300;
        for (double h : {0.1, 0.05, 0.025, 0.0125}) {
            const AnsatzEnergy e = ansatz_energy_nonlinear(h, sol, unit, laws, cs, micro, regime);
            const double gap = std::abs(e.nonlinear - elastic);
            CHECK(gap <= prev_gap + 1e-12);
            prev_gap = gap;
            if (h == 0.0125) CHECK(gap / elastic < 0.05);
            hs.push_back(h);
            defects.push_back(std::abs(e.nonlinear - e.quadratic));
        }
        CHECK(fit_loglog_rate(hs, defects) >= 0.9);
    }
}
