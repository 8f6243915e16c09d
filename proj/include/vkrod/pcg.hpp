#ifndef VKROD_PCG_HH
#define VKROD_PCG_HH

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace vkrod {
namespace detail {

// Orthogonal projector onto the intersection of constraint null spaces.
// Constraint vectors are added in groups; vectors from different groups must
// have disjoint supports (the callers guarantee this), vectors inside one
// group are orthonormalized here.
class GaugeProjector {
public:
    using SparseVec = std::pair<std::vector<int>, std::vector<double>>;

    void add_group(std::vector<SparseVec> group);
    void apply(Eigen::VectorXd& v) const;
    int count() const { return (int)ortho_.size(); }
    const std::vector<SparseVec>& vectors() const { return ortho_; }

private:
    std::vector<SparseVec> ortho_; // unit norm, mutually orthogonal
};

struct PcgResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// Diagonal-preconditioned conjugate gradient restricted to the projector's
// subspace. Deterministic: fixed-order reductions, no parallel sums.
PcgResult pcg_solve(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                    const Eigen::VectorXd& b,
                    const GaugeProjector& proj,
                    Eigen::VectorXd& x,
                    double rel_tol = 1e-10,
                    int max_iterations = 100000);

} // namespace detail
} // namespace vkrod

#endif
