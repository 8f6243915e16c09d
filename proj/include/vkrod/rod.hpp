#ifndef VKROD_ROD_HH
#define VKROD_ROD_HH

#include <vector>

#include "vkrod/cell.hpp"

namespace vkrod {

// Normal load to the mid-fiber: either polynomial coefficients (c0 + c1 x + ...)
// or values tabulated on a uniform grid over [0, L] (linear interpolation).
struct LoadFunction {
    std::vector<double> poly;
    std::vector<double> table;

    bool is_poly() const { return table.empty(); }
    bool is_zero() const;
    double eval(double x, double L) const;
};

struct LoadSpec {
    LoadFunction f2;
    LoadFunction f3;
    double L = 1.0;
};

// First-order moments of the limit stress on a uniform axial grid.
//   e11_tilde'' + f2 = 0,  e11_tilde(L) = e11_tilde'(L) = 0
//   e11_hat''   + f3 = 0,  same end conditions
//   m_torsion = (hat E12 - tilde E13), identically zero for this load class.
struct MomentFields {
    std::vector<double> grid;
    std::vector<double> e11_tilde;
    std::vector<double> e11_hat;
    std::vector<double> m_torsion;
};

enum class BcVariant { ClampedLeft, PaperLiteral };

// Constant effective form or a per-node table on the rod grid.
struct EffectiveTable {
    std::vector<EffectiveForm> forms;

    EffectiveTable() = default;
    explicit EffectiveTable(EffectiveForm constant) : forms{std::move(constant)} {}
    bool constant() const { return forms.size() == 1; }
    const EffectiveForm& at_node(int i, int n_nodes) const;
    EffectiveForm interpolate(double x, double L) const;
};

struct RodSolution {
    std::vector<double> grid;
    std::vector<double> u, v2, v3, w;
    std::vector<double> up, v2p, v3p, wp;
    std::vector<double> v2pp, v3pp;
    std::vector<double> e11_tilde, e11_hat, m_torsion;
    double energy = 0.0;
};

// Exact for polynomial loads (symbolic double integration); tabulated loads
// use cumulative composite Simpson.
MomentFields compute_moments(const LoadSpec& load, int n_nodes);

// Pointwise constitutive inversion a0_1 kappa = (-Mt, e11_hat, -e11_tilde)
// with kappa = (w', -v3'', v2''), then kinematic integration with
// w(0) = v_i(0) = 0 and the variant derivative condition
// (ClampedLeft: v_i'(0) = 0, PaperLiteral: v_i'(L) = 0).
RodSolution solve_kinematics(const EffectiveTable& eff, const MomentFields& moments,
                             BcVariant bc);

// u(x) = int_0^x [rho0(kappa) - 1/2 ((v2')^2 + (v3')^2)]; fills sol.u.
void recover_axial(const EffectiveTable& eff, RodSolution& sol);

double total_energy(const EffectiveTable& eff, const RodSolution& sol, const LoadSpec& load);

RodSolution solve_rod(const EffectiveTable& eff, const LoadSpec& load, BcVariant bc,
                      int n_nodes = 1001);

// Energy-minimization path over integrated-Legendre bases for (v2, v3, w)
// satisfying the essential conditions of the variant; the stretch variable is
// eliminated through rho0 so the reduced problem is a quadratic solve. u is
// recovered afterwards exactly as in solve_rod.
RodSolution galerkin_solve(const EffectiveTable& eff, const LoadSpec& load, BcVariant bc,
                           int n_modes, int n_nodes = 1001);

// Cumulative integrals on a uniform grid (composite Simpson with 3-point
// rules on the odd subintervals; exact for quadratics).
std::vector<double> cumulative_integral(const std::vector<double>& f, double step);
std::vector<double> cumulative_integral_from_right(const std::vector<double>& f, double step);
double integrate_simpson(const std::vector<double>& f, double step);

} // namespace vkrod

#endif
