#ifndef VKROD_VERIFY_HH
#define VKROD_VERIFY_HH

#include "vkrod/cell.hpp"
#include "vkrod/rod.hpp"

namespace vkrod {

struct SweepRow {
    double h;
    double epsilon;
    double scaled_energy;
    double abs_error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double limit_value = 0.0;
    double fitted_rate = 0.0;
};

// Finite-regime recovery field: the corrector scaled by h/gamma and evaluated
// at the unfolded coordinate s = x1/eps cancels every h-dependence in the
// strain, sym iota(m(x')) + sym(D1 theta | gamma^{-1} grad' theta).
Matrix3 unfolded_strain(double h, const RegimeSpec& regime, const CorrectorField& corrector,
                        const MacroStrain& ms, const Vector3& x,
                        const CrossSection& cs, const MicrostructureRealization& micro);

// int_{(0,L) x omega} Q(phase(x1/eps), unfolded strain); the x1 quadrature is
// split at microstructure segment boundaries and corrector grid nodes, so
// piecewise-constant coefficients are integrated exactly.
double scaled_quadratic_energy(double h, const RegimeSpec& regime,
                               const CorrectorField& corrector, const MacroStrain& ms,
                               const CrossSection& cs, const MicrostructureRealization& micro,
                               double L);

// Runs the scaled energy for each h (eps = h/gamma), with the limit
// L * Q0(rho, kappa) taken from the cell solve on the same discretization,
// and fits the log-log error rate.
SweepResult convergence_sweep(const std::vector<double>& h_list, const RegimeSpec& regime,
                              const CrossSection& cs, const MicrostructureRealization& micro,
                              const MacroStrain& ms, double L, int threads = 4);

struct AnsatzEnergy {
    double nonlinear = 0.0; // h^-4 int W(grad_h yh)
    double quadratic = 0.0; // int Q(G) at the same strain samples G = (R^T F - I)/h^2
};

// Finite-h deformation built from the rod solution: rotation exp(h A(x1)),
// the h^2-scaled unfolded corrector (combined from the four unit-strain
// correctors by linearity) and the in-plane quadratic compensation that
// reduces the scaled strain to fixed part + corrector strain.
AnsatzEnergy ansatz_energy_nonlinear(double h, const RodSolution& sol,
                                     const std::array<CorrectorField, 4>& unit_correctors,
                                     const std::vector<NonlinearLaw>& laws,
                                     const CrossSection& cs,
                                     const MicrostructureRealization& micro,
                                     const RegimeSpec& regime);

// Least-squares slope of log(y) against log(x).
double fit_loglog_rate(const std::vector<double>& x, const std::vector<double>& y);

} // namespace vkrod

#endif
