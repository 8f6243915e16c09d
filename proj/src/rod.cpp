#include "vkrod/rod.hpp"

#include <cmath>
#include <stdexcept>

namespace vkrod {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

std::vector<double> poly_antiderivative(const std::vector<double>& c) {
    std::vector<double> out(c.size() + 1, 0.0);
    for (size_t k = 0; k < c.size(); ++k) out[k + 1] = c[k] / (double)(k + 1);
    return out;
}

} // namespace

bool LoadFunction::is_zero() const {
    for (double c : poly) if (c != 0.0) return false;
    for (double c : table) if (c != 0.0) return false;
    return true;
}

double LoadFunction::eval(double x, double L) const {
    if (is_poly()) return poly_eval(poly, x);
    if (table.size() == 1) return table[0];
    const int n = (int)table.size();
    double t = std::clamp(x / L, 0.0, 1.0) * (n - 1);
    const int i = std::min((int)t, n - 2);
    const double frac = t - i;
    return (1.0 - frac) * table[i] + frac * table[i + 1];
}

const EffectiveForm& EffectiveTable::at_node(int i, int n_nodes) const {
    if (forms.empty())
        throw std::invalid_argument("effective table is empty");
    if (forms.size() == 1) return forms[0];
    if ((int)forms.size() != n_nodes)
        throw std::invalid_argument("effective table size does not match the rod grid");
    return forms[i];
}

EffectiveForm EffectiveTable::interpolate(double x, double L) const {
    if (forms.empty())
        throw std::invalid_argument("effective table is empty");
    if (forms.size() == 1) return forms[0];
    const int n = (int)forms.size();
    double t = std::clamp(x / L, 0.0, 1.0) * (n - 1);
    const int i = std::min((int)t, n - 2);
    const double frac = t - i;
    EffectiveForm out;
    out.a0 = (1.0 - frac) * forms[i].a0 + frac * forms[i + 1].a0;
    out.a0_1 = (1.0 - frac) * forms[i].a0_1 + frac * forms[i + 1].a0_1;
    out.rho0_coeffs = (1.0 - frac) * forms[i].rho0_coeffs + frac * forms[i + 1].rho0_coeffs;
    return out;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double step) {
    const int n = (int)f.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    if (n == 2) {
        out[1] = 0.5 * step * (f[0] + f[1]);
        return out;
    }
    for (int i = 0; i + 2 < n; i += 2) {
        out[i + 1] = out[i] + step / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        out[i + 2] = out[i] + step / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    if (n % 2 == 0) // trailing interval, 3-point rule mirrored
        out[n - 1] = out[n - 2] + step / 12.0 * (-f[n - 3] + 8.0 * f[n - 2] + 5.0 * f[n - 1]);
    return out;
}

std::vector<double> cumulative_integral_from_right(const std::vector<double>& f, double step) {
    std::vector<double> rev(f.rbegin(), f.rend());
    std::vector<double> c = cumulative_integral(rev, step);
    std::vector<double> out(c.rbegin(), c.rend());
    return out;
}

double integrate_simpson(const std::vector<double>& f, double step) {
    return cumulative_integral(f, step).back();
}

MomentFields compute_moments(const LoadSpec& load, int n_nodes) {
    if (n_nodes < 3)
        throw std::invalid_argument("compute_moments: need at least 3 nodes");
    if (!(load.L > 0.0))
        throw std::invalid_argument("compute_moments: rod length must be positive");
    MomentFields m;
    m.grid.resize(n_nodes);
    const double h = load.L / (n_nodes - 1);
    for (int i = 0; i < n_nodes; ++i) m.grid[i] = i * h;

    auto solve_one = [&](const LoadFunction& f) {
        std::vector<double> E(n_nodes, 0.0);
        if (f.is_poly()) {
            // E(x) = -int_x^L int_s^L f(t) dt ds, expanded symbolically:
            // with P = antider(f), P2 = antider(P):
            // E(x) = P(L)(x - L) + P2(L) - P2(x); both end conditions vanish
            // identically, with exact cancellation at x = L.
            const auto P = poly_antiderivative(f.poly);
            const auto P2 = poly_antiderivative(P);
            const double PL = poly_eval(P, load.L);
            const double P2L = poly_eval(P2, load.L);
            for (int i = 0; i < n_nodes; ++i)
                E[i] = PL * (m.grid[i] - load.L) + P2L - poly_eval(P2, m.grid[i]);
        } else {
            std::vector<double> fv(n_nodes);
            for (int i = 0; i < n_nodes; ++i) fv[i] = f.eval(m.grid[i], load.L);
            // E'(x) = int_x^L f, then E(x) = -int_x^L E'.
            const auto Ep = cumulative_integral_from_right(fv, h);
            const auto Ei = cumulative_integral_from_right(Ep, h);
            for (int i = 0; i < n_nodes; ++i) E[i] = -Ei[i];
        }
        return E;
    };

    m.e11_tilde = solve_one(load.f2);
    m.e11_hat = solve_one(load.f3);
    m.m_torsion.assign(n_nodes, 0.0);
    return m;
}

RodSolution solve_kinematics(const EffectiveTable& eff, const MomentFields& moments,
                             BcVariant bc) {
    const int n = (int)moments.grid.size();
    if (n < 3)
        throw std::invalid_argument("solve_kinematics: need at least 3 nodes");
    const double h = moments.grid[1] - moments.grid[0];

    RodSolution sol;
    sol.grid = moments.grid;
    sol.e11_tilde = moments.e11_tilde;
    sol.e11_hat = moments.e11_hat;
    sol.m_torsion = moments.m_torsion;
    sol.wp.resize(n);
    sol.v2pp.resize(n);
    sol.v3pp.resize(n);

    for (int i = 0; i < n; ++i) {
        const EffectiveForm& ef = eff.at_node(i, n);
        Eigen::LDLT<Eigen::Matrix3d> ldlt(ef.a0_1);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw std::domain_error("solve_kinematics: a0_1 is singular at a node");
        const Vector3 rhs(-moments.m_torsion[i], moments.e11_hat[i], -moments.e11_tilde[i]);
        const Vector3 kappa = ldlt.solve(rhs);
        sol.wp[i] = kappa(0);
        sol.v3pp[i] = -kappa(1);
        sol.v2pp[i] = kappa(2);
    }

    sol.w = cumulative_integral(sol.wp, h);
    if (bc == BcVariant::ClampedLeft) {
        sol.v2p = cumulative_integral(sol.v2pp, h);
        sol.v3p = cumulative_integral(sol.v3pp, h);
    } else {
        // v_i'(L) = 0: v_i'(x) = -int_x^L v_i''.
        auto from_right2 = cumulative_integral_from_right(sol.v2pp, h);
        auto from_right3 = cumulative_integral_from_right(sol.v3pp, h);
        sol.v2p.resize(n);
        sol.v3p.resize(n);
        for (int i = 0; i < n; ++i) {
            sol.v2p[i] = -from_right2[i];
            sol.v3p[i] = -from_right3[i];
        }
    }
    sol.v2 = cumulative_integral(sol.v2p, h);
    sol.v3 = cumulative_integral(sol.v3p, h);
    return sol;
}

void recover_axial(const EffectiveTable& eff, RodSolution& sol) {
    const int n = (int)sol.grid.size();
    const double h = sol.grid[1] - sol.grid[0];
    sol.up.resize(n);
    for (int i = 0; i < n; ++i) {
        const EffectiveForm& ef = eff.at_node(i, n);
        const Vector3 kappa(sol.wp[i], -sol.v3pp[i], sol.v2pp[i]);
        sol.up[i] = ef.rho0(kappa)
                  - 0.5 * (sol.v2p[i] * sol.v2p[i] + sol.v3p[i] * sol.v3p[i]);
    }
    sol.u = cumulative_integral(sol.up, h);
}

double total_energy(const EffectiveTable& eff, const RodSolution& sol, const LoadSpec& load) {
    const int n = (int)sol.grid.size();
    const double h = sol.grid[1] - sol.grid[0];
    std::vector<double> elastic(n), work(n);
    if (sol.up.size() != sol.grid.size())
        throw std::invalid_argument("total_energy: solution is missing the axial derivative field");
    for (int i = 0; i < n; ++i) {
        const EffectiveForm& ef = eff.at_node(i, n);
        const Vector3 kappa(sol.wp[i], -sol.v3pp[i], sol.v2pp[i]);
        const double a = sol.up[i]
                       + 0.5 * (sol.v2p[i] * sol.v2p[i] + sol.v3p[i] * sol.v3p[i]);
        elastic[i] = ef.q0(a, kappa);
        work[i] = load.f2.eval(sol.grid[i], load.L) * sol.v2[i]
                + load.f3.eval(sol.grid[i], load.L) * sol.v3[i];
    }
    return integrate_simpson(elastic, h) - integrate_simpson(work, h);
}

RodSolution solve_rod(const EffectiveTable& eff, const LoadSpec& load, BcVariant bc,
                      int n_nodes) {
    MomentFields m = compute_moments(load, n_nodes);
    RodSolution sol = solve_kinematics(eff, m, bc);
    recover_axial(eff, sol);
    sol.energy = total_energy(eff, sol, load);
    return sol;
}

namespace {

// Legendre polynomials and their primitives on [-1, 1].
void legendre_values(int degree, double t, std::vector<double>& p) {
    p.resize(degree + 2);
    p[0] = 1.0;
    if (degree + 1 >= 1) p[1] = t;
    for (int k = 1; k <= degree; ++k)
        p[k + 1] = ((2.0 * k + 1.0) * t * p[k] - k * p[k - 1]) / (k + 1.0);
}

// int_{-1}^t P_k = (P_{k+1} - P_{k-1}) / (2k+1) for k >= 1; (t+1) for k = 0.
double legendre_primitive(int k, double t, const std::vector<double>& p) {
    if (k == 0) return t + 1.0;
    return (p[k + 1] - p[k - 1]) / (2.0 * k + 1.0);
}

struct GaussRule {
    std::vector<double> x; // on [0, L]
    std::vector<double> w;
};

GaussRule gauss_legendre(int q, double L) {
    GaussRule rule;
    rule.x.resize(q);
    rule.w.resize(q);
    std::vector<double> p;
    for (int i = 0; i < q; ++i) {
        // Newton iteration from the Chebyshev-like initial guess.
        double t = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        for (int it = 0; it < 100; ++it) {
            legendre_values(q, t, p);
            const double f = p[q];
            const double fp = q * (t * p[q] - p[q - 1]) / (t * t - 1.0);
            const double dt = f / fp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        legendre_values(q, t, p);
        const double fp = q * (t * p[q] - p[q - 1]) / (t * t - 1.0);
        rule.x[i] = 0.5 * L * (1.0 + t);
        rule.w[i] = L / ((1.0 - t * t) * fp * fp);
    }
    return rule;
}

// Basis for one deflection field: value, first and second derivative at x.
// Second derivatives are shifted Legendre polynomials, so the curvature Gram
// matrix is well conditioned at any mode count.
struct DeflectionBasis {
    int modes;
    double L;
    BcVariant bc;

    // row: [value, d/dx, d2/dx2] of mode k at x. The curvature of mode k is
    // the shifted Legendre polynomial P_k(2x/L - 1); value and slope are its
    // exact primitives with the variant's essential conditions built in.
    void eval(int k, double x, double* out) const {
        const double t = 2.0 * x / L - 1.0;
        std::vector<double> p;
        legendre_values(k + 2, t, p);
        const double prim = legendre_primitive(k, t, p); // int_{-1}^t P_k
        double prim2;                                    // int_{-1}^t int_{-1}^s P_k
        if (k == 0) {
            prim2 = 0.5 * (t + 1.0) * (t + 1.0);
        } else {
            prim2 = (legendre_primitive(k + 1, t, p) - legendre_primitive(k - 1, t, p))
                  / (2.0 * k + 1.0);
        }
        const double half = 0.5 * L;
        out[2] = p[k];
        if (bc == BcVariant::ClampedLeft) {
            // v(0) = v'(0) = 0
            out[1] = half * prim;
            out[0] = half * half * prim2;
        } else {
            // v(0) = 0, v'(L) = 0
            std::vector<double> p1;
            legendre_values(k + 2, 1.0, p1);
            const double prim_at_L = legendre_primitive(k, 1.0, p1);
            out[1] = half * (prim - prim_at_L);
            out[0] = half * half * prim2 - half * prim_at_L * x;
        }
    }
};

// w basis: w(0) = 0, w' = P_k(t).
void twist_basis_eval(int k, double x, double L, double* out) {
    const double t = 2.0 * x / L - 1.0;
    std::vector<double> p;
    legendre_values(k + 1, t, p);
    out[1] = p[k];
    out[0] = 0.5 * L * legendre_primitive(k, t, p);
}

} // namespace

RodSolution galerkin_solve(const EffectiveTable& eff, const LoadSpec& load, BcVariant bc,
                           int n_modes, int n_nodes) {
    if (n_modes < 4)
        throw std::invalid_argument("galerkin_solve: need at least 4 modes");
    const int m = n_modes;
    const int total = 3 * m; // v2, v3, w coefficient blocks
    const double L = load.L;

    DeflectionBasis vb{m, L, bc};
    GaussRule rule = gauss_legendre(2 * m + 8, L);

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(total, total);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);

    std::vector<double> bval(3 * m), bder(3 * m), bder2(3 * m); // per-mode rows
    for (size_t qi = 0; qi < rule.x.size(); ++qi) {
        const double x = rule.x[qi];
        const double wq = rule.w[qi];
        const EffectiveForm ef = eff.interpolate(x, L);

        // kappa rows of each basis function: kappa = (w', -v3'', v2'')
        // laid out as [v2 block | v3 block | w block].
        Eigen::MatrixXd kap = Eigen::MatrixXd::Zero(3, total);
        Eigen::VectorXd val2 = Eigen::VectorXd::Zero(total);
        Eigen::VectorXd val3 = Eigen::VectorXd::Zero(total);
        double out[3];
        for (int k = 0; k < m; ++k) {
            vb.eval(k, x, out);
            kap(2, k) = out[2];
            val2(k) = out[0];
            kap(1, m + k) = -out[2];
            val3(m + k) = out[0];
            double tw[2];
            twist_basis_eval(k, x, L, tw);
            kap(0, 2 * m + k) = tw[1];
        }
        G.noalias() += wq * kap.transpose() * ef.a0_1 * kap;
        const double f2 = load.f2.eval(x, L);
        const double f3 = load.f3.eval(x, L);
        rhs.noalias() += wq * (f2 * val2 + f3 * val3);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("galerkin_solve: ill-conditioned Gram matrix");
    Eigen::VectorXd coeff = ldlt.solve(rhs);
    const double resid = (G * coeff - rhs).norm();
    if (!(resid <= 1e-8 * std::max(1.0, rhs.norm())))
        throw std::runtime_error("galerkin_solve: ill-conditioned Gram matrix");

    RodSolution sol;
    sol.grid.resize(n_nodes);
    const double h = L / (n_nodes - 1);
    for (int i = 0; i < n_nodes; ++i) sol.grid[i] = i * h;
    sol.u.assign(n_nodes, 0.0);
    sol.v2.assign(n_nodes, 0.0);
    sol.v3.assign(n_nodes, 0.0);
    sol.w.assign(n_nodes, 0.0);
    sol.v2p.assign(n_nodes, 0.0);
    sol.v3p.assign(n_nodes, 0.0);
    sol.wp.assign(n_nodes, 0.0);
    sol.v2pp.assign(n_nodes, 0.0);
    sol.v3pp.assign(n_nodes, 0.0);

    double out[3];
    for (int i = 0; i < n_nodes; ++i) {
        const double x = sol.grid[i];
        for (int k = 0; k < m; ++k) {
            vb.eval(k, x, out);
            sol.v2[i] += coeff(k) * out[0];
            sol.v2p[i] += coeff(k) * out[1];
            sol.v2pp[i] += coeff(k) * out[2];
            sol.v3[i] += coeff(m + k) * out[0];
            sol.v3p[i] += coeff(m + k) * out[1];
            sol.v3pp[i] += coeff(m + k) * out[2];
            double tw[2];
            twist_basis_eval(k, x, L, tw);
            sol.w[i] += coeff(2 * m + k) * tw[0];
            sol.wp[i] += coeff(2 * m + k) * tw[1];
        }
    }
    // Induced moments for the CSV contract.
    sol.e11_tilde.resize(n_nodes);
    sol.e11_hat.resize(n_nodes);
    sol.m_torsion.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        const EffectiveForm& ef = eff.at_node(i, n_nodes);
        const Vector3 kappa(sol.wp[i], -sol.v3pp[i], sol.v2pp[i]);
        const Vector3 mom = ef.a0_1 * kappa;
        sol.e11_tilde[i] = -mom(2);
        sol.e11_hat[i] = mom(1);
        sol.m_torsion[i] = -mom(0);
    }
    recover_axial(eff, sol);
    sol.energy = total_energy(eff, sol, load);
    return sol;
}

} // namespace vkrod
