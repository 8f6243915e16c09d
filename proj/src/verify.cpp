#include "vkrod/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vkrod {

namespace {

Matrix3 cross_matrix(const Vector3& v) {
    Matrix3 M;
    M <<     0, -v(2),  v(1),
          v(2),     0, -v(0),
         -v(1),  v(0),     0;
    return M;
}

Matrix3 rodrigues(const Vector3& w) {
    const double th = w.norm();
    const Matrix3 W = cross_matrix(w);
    if (th < 1e-8)
        return Matrix3::Identity() + W + 0.5 * W * W;
    return Matrix3::Identity() + std::sin(th) / th * W
         + (1.0 - std::cos(th)) / (th * th) * W * W;
}

// d/dt exp([w(t)]x) given w and w' (Gallego-Yezzi closed form).
Matrix3 rodrigues_derivative(const Vector3& w, const Vector3& wp) {
    const double n2 = w.squaredNorm();
    if (n2 < 1e-12) {
        const Matrix3 W = cross_matrix(w);
        const Matrix3 Wp = cross_matrix(wp);
        return Wp + 0.5 * (W * Wp + Wp * W);
    }
    const Matrix3 R = rodrigues(w);
    Matrix3 dR = Matrix3::Zero();
    for (int i = 0; i < 3; ++i) {
        const Vector3 ei = Vector3::Unit(i);
        const Matrix3 Mi = (w(i) * cross_matrix(w)
                          + cross_matrix(w.cross((Matrix3::Identity() - R) * ei))) / n2;
        dR += wp(i) * Mi * R;
    }
    return dR;
}

// Merged x1 breakpoints of the unfolded coefficient field over [0, L]:
// microstructure segment boundaries and corrector grid nodes, both at scale eps.
std::vector<double> unfolded_breakpoints(double eps, double L, int axial_nodes, double window,
                                         const MicrostructureRealization& micro) {
    std::vector<double> pts;
    pts.push_back(0.0);
    const double s_max = L / eps;
    for (const auto& seg : micro.segments_in(0.0, s_max))
        pts.push_back(seg.end * eps);
    const double delta = window / axial_nodes;
    for (double s = delta; s < s_max; s += delta)
        pts.push_back(s * eps);
    pts.push_back(L);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts) {
        p = std::clamp(p, 0.0, L);
        if (out.empty() || p - out.back() > 1e-14 * std::max(1.0, L))
            out.push_back(p);
    }
    if (out.back() < L) out.push_back(L);
    return out;
}

constexpr double kGauss[2] = {-0.5773502691896257, 0.5773502691896257};

} // namespace

double fit_loglog_rate(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = (int)x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(std::max(x[i], 1e-300));
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

Matrix3 unfolded_strain(double h, const RegimeSpec& regime, const CorrectorField& corrector,
                        const MacroStrain& ms, const Vector3& x,
                        const CrossSection& cs, const MicrostructureRealization& micro) {
    (void)micro;
    if (regime.regime != Regime::Finite)
        throw std::invalid_argument("unfolded_strain: finite-gamma regime only");
    if (corrector.regime.regime != Regime::Finite)
        throw std::invalid_argument("unfolded_strain: corrector regime mismatch");
    const double eps = h / regime.gamma;
    Vector3 bary;
    const int tri = locate_triangle(cs, Vector2(x(1), x(2)), &bary);
    if (tri < 0)
        throw std::invalid_argument("unfolded_strain: point outside the cross-section");
    const Matrix3 corr = corrector_strain_at(corrector, cs, tri, bary, x(0) / eps);
    const Matrix3 total = iota(macro_strain_field(ms, Vector2(x(1), x(2)))) + corr;
    return 0.5 * (total + total.transpose());
}

double scaled_quadratic_energy(double h, const RegimeSpec& regime,
                               const CorrectorField& corrector, const MacroStrain& ms,
                               const CrossSection& cs, const MicrostructureRealization& micro,
                               double L) {
    if (regime.regime != Regime::Finite)
        throw std::invalid_argument("scaled_quadratic_energy: finite-gamma regime only");
    const double eps = h / regime.gamma;
    const auto pts = unfolded_breakpoints(eps, L, regime.axial_nodes, regime.window, micro);

    double acc = 0.0;
    const int n_tri = (int)cs.triangles.size();
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double half = 0.5 * (pts[k + 1] - pts[k]);
        const double mid = 0.5 * (pts[k + 1] + pts[k]);
        if (!(half > 0.0)) continue;
        const int phase = micro.phase_at(mid / eps);
        const ElasticityTensor& tensor = micro.phase_tensor(phase);
        for (int gs = 0; gs < 2; ++gs) {
            const double x1 = mid + half * kGauss[gs];
            const double s = x1 / eps;
            for (int tri = 0; tri < n_tri; ++tri) {
                const auto quad = triangle_quadrature(cs, tri);
                for (int qpt = 0; qpt < 3; ++qpt) {
                    const Matrix3 corr = corrector_strain(corrector, cs, tri, qpt, s);
                    const Matrix3 total = iota(macro_strain_field(ms, quad.points[qpt])) + corr;
                    acc += half * quad.weight * tensor.energy(total);
                }
            }
        }
    }
    return acc;
}

SweepResult convergence_sweep(const std::vector<double>& h_list, const RegimeSpec& regime,
                              const CrossSection& cs, const MicrostructureRealization& micro,
                              const MacroStrain& ms, double L, int threads) {
    if (h_list.empty())
        throw std::invalid_argument("convergence_sweep: empty h list");
    for (size_t i = 0; i + 1 < h_list.size(); ++i)
        if (!(h_list[i + 1] < h_list[i]))
            throw std::invalid_argument("convergence_sweep: h list must be strictly decreasing");

    CellProblem cell(regime, cs, micro);
    std::array<CorrectorField, 4> unit;
    const EffectiveForm eff = cell.effective_form(nullptr, &unit, threads);

    // The corrector is linear in the macro strain.
    CorrectorField corr = unit[0];
    corr.dofs = ms.rho * unit[0].dofs + ms.kappa(0) * unit[1].dofs
              + ms.kappa(1) * unit[2].dofs + ms.kappa(2) * unit[3].dofs;

    SweepResult out;
    out.limit_value = L * eff.q0(ms.rho, ms.kappa);
    std::vector<double> hs, errs;
    for (double h : h_list) {
        SweepRow row;
        row.h = h;
        row.epsilon = h / regime.gamma;
        row.scaled_energy = scaled_quadratic_energy(h, regime, corr, ms, cs, micro, L);
        row.abs_error = std::abs(row.scaled_energy - out.limit_value);
        out.rows.push_back(row);
        hs.push_back(h);
        errs.push_back(row.abs_error);
    }
    out.fitted_rate = fit_loglog_rate(hs, errs);
    return out;
}

AnsatzEnergy ansatz_energy_nonlinear(double h, const RodSolution& sol,
                                     const std::array<CorrectorField, 4>& unit_correctors,
                                     const std::vector<NonlinearLaw>& laws,
                                     const CrossSection& cs,
                                     const MicrostructureRealization& micro,
                                     const RegimeSpec& regime) {
    if (regime.regime != Regime::Finite)
        throw std::invalid_argument("ansatz_energy_nonlinear: finite-gamma regime only");
    if ((int)laws.size() != micro.phase_count())
        throw std::invalid_argument("ansatz_energy_nonlinear: need one nonlinear law per phase");
    const int n = (int)sol.grid.size();
    if (n < 3 || sol.up.empty())
        throw std::invalid_argument("ansatz_energy_nonlinear: incomplete rod solution");
    const double L = sol.grid.back();
    const double eps = h / regime.gamma;
    const double hg = sol.grid[1] - sol.grid[0];

    // Macro strain coefficients c = (a, kappa) and the in-plane compensation
    // rows q2, q3 on the rod grid, plus centered numeric x1-derivatives.
    std::vector<Eigen::Vector4d> c(n);
    std::vector<Vector3> q2(n), q3(n);
    for (int i = 0; i < n; ++i) {
        const double v2p = sol.v2p[i], v3p = sol.v3p[i], w = sol.w[i];
        const double a = sol.up[i] + 0.5 * (v2p * v2p + v3p * v3p);
        c[i] << a, sol.wp[i], -sol.v3pp[i], sol.v2pp[i];
        q2[i] = Vector3(v3p * w, 0.5 * (w * w + v2p * v2p), 0.5 * v2p * v3p);
        q3[i] = Vector3(-v2p * w, 0.5 * v2p * v3p, 0.5 * (w * w + v3p * v3p));
    }
    auto ddx = [&](const auto& f, int i) {
        if (i == 0) return (f[1] - f[0]) / hg;
        if (i == n - 1) return (f[n - 1] - f[n - 2]) / hg;
        return (f[i + 1] - f[i - 1]) / (2.0 * hg);
    };
    std::vector<Eigen::Vector4d> cp(n);
    std::vector<Vector3> q2p(n), q3p(n);
    for (int i = 0; i < n; ++i) {
        cp[i] = ddx(c, i);
        q2p[i] = ddx(q2, i);
        q3p[i] = ddx(q3, i);
    }

    auto interp = [&](const auto& f, double x) {
        double t = std::clamp(x / L, 0.0, 1.0) * (n - 1);
        const int i = std::min((int)t, n - 2);
        const double fr = t - i;
        return ((1.0 - fr) * f[i] + fr * f[i + 1]).eval();
    };
    auto interp_s = [&](const std::vector<double>& f, double x) {
        double t = std::clamp(x / L, 0.0, 1.0) * (n - 1);
        const int i = std::min((int)t, n - 2);
        const double fr = t - i;
        return (1.0 - fr) * f[i] + fr * f[i + 1];
    };

    auto pts = unfolded_breakpoints(eps, L, regime.axial_nodes, regime.window, micro);
    // The rod fields vary on the macro scale; align to their grid as well.
    for (int i = 1; i + 1 < n; ++i) pts.push_back(sol.grid[i]);
    std::sort(pts.begin(), pts.end());

    AnsatzEnergy out;
    const int n_tri = (int)cs.triangles.size();
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double half = 0.5 * (pts[k + 1] - pts[k]);
        if (!(half > 1e-15 * L)) continue;
        const double mid = 0.5 * (pts[k + 1] + pts[k]);
        const int phase = micro.phase_at(mid / eps);
        const NonlinearLaw& law = laws[phase];
        const ElasticityTensor& tensor = micro.phase_tensor(phase);
        for (int gs = 0; gs < 2; ++gs) {
            const double x1 = mid + half * kGauss[gs];
            const double s = x1 / eps;

            const double v2p = interp_s(sol.v2p, x1), v3p = interp_s(sol.v3p, x1);
            const double w = interp_s(sol.w, x1), wp = interp_s(sol.wp, x1);
            const double up = interp_s(sol.up, x1);
            const double v2pp = interp_s(sol.v2pp, x1), v3pp = interp_s(sol.v3pp, x1);
            const Eigen::Vector4d cc = interp(c, x1);
            const Eigen::Vector4d ccp = interp(cp, x1);
            const Vector3 qq2 = interp(q2, x1), qq3 = interp(q3, x1);
            const Vector3 qq2p = interp(q2p, x1), qq3p = interp(q3p, x1);

            // R = exp(h A), axl(A) = (w, -v3', v2'), axl(A') = kappa.
            const Vector3 omega = h * Vector3(w, -v3p, v2p);
            const Vector3 omega_p = h * Vector3(wp, -v3pp, v2pp);
            const Matrix3 R = rodrigues(omega);
            const Matrix3 Rp = rodrigues_derivative(omega, omega_p);

            for (int tri = 0; tri < n_tri; ++tri) {
                const auto quad = triangle_quadrature(cs, tri);
                for (int qpt = 0; qpt < 3; ++qpt) {
                    const Vector2 xp = quad.points[qpt];
                    const double x2 = xp.x(), x3 = xp.y();

                    // Corrector displacement theta = (h/gamma) sum_k c_k theta_k
                    // and its unfolded derivatives.
                    Vector3 theta = Vector3::Zero();       // (gamma/h) * value
                    Vector3 d1_theta = Vector3::Zero();    // exact axial derivative of h^2 scaling
                    Matrix3 grad_theta = Matrix3::Zero();  // columns 2,3: in-plane gradients
                    for (int kk = 0; kk < 4; ++kk) {
                        if (cc(kk) == 0.0 && ccp(kk) == 0.0) continue;
                        const Matrix3 S = corrector_strain(unit_correctors[kk], cs, tri, qpt, s);
                        // S = (D1 theta_k | gamma^{-1} grad' theta_k)
                        d1_theta += cc(kk) * S.col(0);
                        grad_theta.col(1) += cc(kk) * S.col(1);
                        grad_theta.col(2) += cc(kk) * S.col(2);
                        // nodal value of theta_k for the slow-modulation term
                        const auto& t = cs.triangles[tri];
                        Vector3 val = Vector3::Zero();
                        const double phi[3][3] = {{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
                        // interpolate theta_k at (s, xp): axial P1 between nodes
                        {
                            const double T = regime.window;
                            const double delta = T / regime.axial_nodes;
                            double srel = s - T * std::floor(s / T);
                            int elem = std::min((int)(srel / delta), regime.axial_nodes - 1);
                            const double tau = srel / delta - elem;
                            const int n0 = elem, n1 = (elem + 1) % regime.axial_nodes;
                            for (int vl = 0; vl < 3; ++vl) {
                                const Vector3 th0 = corrector_theta1(unit_correctors[kk], n0, t[vl]);
                                const Vector3 th1 = corrector_theta1(unit_correctors[kk], n1, t[vl]);
                                val += phi[qpt][vl] * ((1.0 - tau) * th0 + tau * th1);
                            }
                        }
                        theta += ccp(kk) * val; // slow modulation enters via c'
                    }

                    // beta = (h/gamma) sum c_k theta_k - h (x2 q2 + x3 q3)
                    const double hg_fac = h / regime.gamma;
                    const Vector3 d1_beta = d1_theta + hg_fac * theta
                                          - h * (x2 * qq2p + x3 * qq3p);
                    const Vector3 d2_beta = hg_fac * (regime.gamma * grad_theta.col(1)) - h * qq2;
                    const Vector3 d3_beta = hg_fac * (regime.gamma * grad_theta.col(2)) - h * qq3;

                    Matrix3 F;
                    F(0, 0) = 1.0 + h * h * up - h * x2 * Rp(1, 0) - h * x3 * Rp(2, 0)
                            + h * h * d1_beta(0);
                    F(1, 0) = h * v2p - h * h * wp * x3 + h * h * d1_beta(1);
                    F(2, 0) = h * v3p + h * h * wp * x2 + h * h * d1_beta(2);
                    F(0, 1) = -R(1, 0) + h * d2_beta(0);
                    F(1, 1) = 1.0 + h * d2_beta(1);
                    F(2, 1) = h * (w + d2_beta(2));
                    F(0, 2) = -R(2, 0) + h * d3_beta(0);
                    F(1, 2) = h * (-w + d3_beta(1));
                    F(2, 2) = 1.0 + h * d3_beta(2);

                    const double wq = half * quad.weight;
                    out.nonlinear += wq * svk_energy(law, F) / (h * h * h * h);
                    const Matrix3 G = (R.transpose() * F - Matrix3::Identity()) / (h * h);
                    out.quadratic += wq * tensor.energy(G);
                }
            }
        }
    }
    return out;
}

} // namespace vkrod
