#ifndef VKROD_CELL_HH
#define VKROD_CELL_HH

#include <array>
#include <optional>

#include "vkrod/geometry.hpp"
#include "vkrod/microstructure.hpp"
#include "vkrod/pcg.hpp"

namespace vkrod {

// gamma = lim h/eps distinguishes which of thickness and microstructure
// oscillation is finer; the corrector space changes with it.
enum class Regime { Zero, Finite, Infinite };

struct RegimeSpec {
    Regime regime = Regime::Finite;
    double gamma = 1.0;  // used when regime == Finite
    int axial_nodes = 8; // N >= 2, periodic grid on the window
    double window = 1.0; // RVE window length T (one period for periodic media)

    // Verification knob (finite regime only): adds an explicit skew block
    // Psi1 to the corrector space. The minimum must not drop, since those
    // strains are already reachable through theta1.
    bool augment_skew = false;
};

void validate(const RegimeSpec& spec);

// Discrete minimizer of one cell problem. Nodal layout per regime:
//   Finite:   theta1[node][vertex], 3 components; node N == node 0
//   Zero:     psi1[node] (3 skew dofs), theta1[node] (axial component; the
//             transverse components are gauge-fixed to zero), theta2[node][vertex]
//   Infinite: theta1[node][vertex] (only its axial derivative carries energy),
//             theta2[vertex] (axially constant)
struct CorrectorField {
    RegimeSpec regime;
    int n_axial = 0;
    int n_vertices = 0;
    Eigen::VectorXd dofs;
};

// Field accessors (throw on regime mismatch).
Vector3 corrector_theta1(const CorrectorField& c, int node, int vertex);
Vector3 corrector_theta1_node(const CorrectorField& c, int node); // Regime::Zero
Vector3 corrector_psi1_axl(const CorrectorField& c, int node);    // Regime::Zero, axl of Psi1
Vector3 corrector_theta2(const CorrectorField& c, int node, int vertex);

// Corrector part of the strain, (D1 theta | scaled in-plane gradient), as a
// full 3x3 matrix at axial position s (wrapped into the window) and the
// qpt-th degree-2 quadrature point of triangle tri.
Matrix3 corrector_strain(const CorrectorField& c, const CrossSection& cs,
                         int tri, int qpt, double s);

// Same at arbitrary barycentric coordinates of a triangle.
Matrix3 corrector_strain_at(const CorrectorField& c, const CrossSection& cs,
                            int tri, const Vector3& bary, double s);

// Triangle containing xp (barycentric test with tolerance); -1 if outside.
int locate_triangle(const CrossSection& cs, const Vector2& xp, Vector3* bary = nullptr);

// Effective quadratic form Q0(rho, kappa) = 1/2 v^T a0 v, v = (rho, kappa),
// with its Schur reduction to the kappa block.
struct EffectiveForm {
    Eigen::Matrix4d a0 = Eigen::Matrix4d::Identity();
    Eigen::Matrix3d a0_1 = Eigen::Matrix3d::Identity();
    Eigen::Vector3d rho0_coeffs = Eigen::Vector3d::Zero();

    double q0(double rho, const Vector3& kappa) const;
    double q0_1(const Vector3& kappa) const;
    double rho0(const Vector3& kappa) const { return rho0_coeffs.dot(kappa); }
};

// Schur complement of the rho block: a0_1 = C - b b^T / a, rho0 = -b/a.
// Throws if the rho diagonal entry is not positive.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> reduce_form(const Eigen::Matrix4d& a0);
EffectiveForm effective_form_from_a0(const Eigen::Matrix4d& a0);

struct CellReport {
    std::array<double, 4> residuals{};
    std::array<int, 4> iterations{};
    int dof_count = 0;
    int constraint_count = 0;
};

// One assembled cell problem: the quadratic functional
//   (1/T) int_0^T int_omega Q(phase(s), iota(m) + corrector strain) dx' ds
// over the gauge-constrained tensor-product P1 space of the regime.
// Axial quadrature is split at microstructure segment boundaries, so
// piecewise-constant coefficients are integrated exactly.
class CellProblem {
public:
    CellProblem(const RegimeSpec& regime, const CrossSection& cs,
                const MicrostructureRealization& micro);

    int dof_count() const { return total_dofs_; }
    const RegimeSpec& regime() const { return regime_; }
    const CrossSection& section() const { return cs_; }

    // Quadratic part K, linear part g(ms) and constant c0(ms) of the
    // functional: E(theta) = 1/2 theta^T K theta + g^T theta + c0.
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& stiffness() const { return K_; }
    Eigen::VectorXd macro_rhs(const MacroStrain& ms) const;
    double macro_constant(const MacroStrain& ms) const;
    const detail::GaugeProjector& projector() const { return projector_; }

    // Gram matrix of the four unit macro strains without correctors
    // (the zero-corrector upper bound of a0 in the Loewner order).
    const Eigen::Matrix4d& macro_gram() const { return macro_gram_; }

    CorrectorField solve_corrector(const MacroStrain& ms,
                                   detail::PcgResult* info = nullptr) const;
    double cell_energy(const CorrectorField& corr, const MacroStrain& ms) const;

    // Solves the four unit-strain problems (optionally concurrently; the
    // result is schedule-independent) and assembles a0 from the energy
    // bilinear form of the (macro + corrector) pairs.
    EffectiveForm effective_form(CellReport* report = nullptr,
                                 std::array<CorrectorField, 4>* correctors = nullptr,
                                 int threads = 4) const;

private:
    RegimeSpec regime_;
    CrossSection cs_;
    const MicrostructureRealization& micro_;
    int total_dofs_ = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> K_;
    std::array<Eigen::VectorXd, 4> unit_rhs_;
    Eigen::Matrix4d macro_gram_ = Eigen::Matrix4d::Zero();
    detail::GaugeProjector projector_;
};

// Free functions matching the operation-level interface.
CorrectorField solve_corrector(const RegimeSpec& regime, const CrossSection& cs,
                               const MicrostructureRealization& micro, const MacroStrain& ms);
EffectiveForm effective_form(const RegimeSpec& regime, const CrossSection& cs,
                             const MicrostructureRealization& micro,
                             CellReport* report = nullptr, int threads = 4);
double cell_energy(const CorrectorField& corr, const RegimeSpec& regime,
                   const CrossSection& cs, const MicrostructureRealization& micro,
                   const MacroStrain& ms);

} // namespace vkrod

#endif
