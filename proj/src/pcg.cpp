#include "vkrod/pcg.hpp"

#include <cmath>
#include <stdexcept>

namespace vkrod {
namespace detail {

namespace {

double sparse_dot(const GaugeProjector::SparseVec& a, const GaugeProjector::SparseVec& b) {
    double acc = 0.0;
    size_t i = 0, j = 0;
    while (i < a.first.size() && j < b.first.size()) {
        if (a.first[i] < b.first[j]) ++i;
        else if (a.first[i] > b.first[j]) ++j;
        else acc += a.second[i++] * b.second[j++];
    }
    return acc;
}

void axpy_sparse(GaugeProjector::SparseVec& a, double c, const GaugeProjector::SparseVec& b) {
    // a += c*b, merging index sets.
    GaugeProjector::SparseVec out;
    out.first.reserve(a.first.size() + b.first.size());
    out.second.reserve(a.first.size() + b.first.size());
    size_t i = 0, j = 0;
    while (i < a.first.size() || j < b.first.size()) {
        if (j == b.first.size() || (i < a.first.size() && a.first[i] < b.first[j])) {
            out.first.push_back(a.first[i]);
            out.second.push_back(a.second[i]);
            ++i;
        } else if (i == a.first.size() || b.first[j] < a.first[i]) {
            out.first.push_back(b.first[j]);
            out.second.push_back(c * b.second[j]);
            ++j;
        } else {
            out.first.push_back(a.first[i]);
            out.second.push_back(a.second[i] + c * b.second[j]);
            ++i; ++j;
        }
    }
    a = std::move(out);
}

} // namespace

void GaugeProjector::add_group(std::vector<SparseVec> group) {
    const size_t start = ortho_.size();
    for (auto& v : group) {
        // Modified Gram-Schmidt against the previous vectors of this group.
        for (size_t k = start; k < ortho_.size(); ++k) {
            const double c = sparse_dot(v, ortho_[k]);
            if (c != 0.0) axpy_sparse(v, -c, ortho_[k]);
        }
        double norm2 = 0.0;
        for (double x : v.second) norm2 += x * x;
        const double norm = std::sqrt(norm2);
        if (norm < 1e-14)
            throw std::runtime_error("GaugeProjector: constraint group is rank deficient");
        for (double& x : v.second) x /= norm;
        ortho_.push_back(std::move(v));
    }
}

void GaugeProjector::apply(Eigen::VectorXd& v) const {
    for (const auto& c : ortho_) {
        double dot = 0.0;
        for (size_t k = 0; k < c.first.size(); ++k)
            dot += c.second[k] * v[c.first[k]];
        for (size_t k = 0; k < c.first.size(); ++k)
            v[c.first[k]] -= dot * c.second[k];
    }
}

PcgResult pcg_solve(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                    const Eigen::VectorXd& b,
                    const GaugeProjector& proj,
                    Eigen::VectorXd& x,
                    double rel_tol,
                    int max_iterations) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd diag_inv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = A.coeff(i, i);
        diag_inv[i] = d > 0.0 ? 1.0 / d : 1.0;
    }

    x.setZero(n);
    Eigen::VectorXd r = b;
    proj.apply(r);
    const double b_norm = r.norm();
    PcgResult res;
    if (b_norm == 0.0) {
        res.converged = true;
        return res;
    }

    Eigen::VectorXd z = diag_inv.cwiseProduct(r);
    proj.apply(z);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q(n);
    double rz = r.dot(z);

    for (int it = 1; it <= max_iterations; ++it) {
        q.noalias() = A * p;
        proj.apply(q);
        const double pq = p.dot(q);
        if (!(pq > 0.0)) {
            res.iterations = it;
            res.rel_residual = r.norm() / b_norm;
            res.converged = false;
            return res;
        }
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        const double rel = r.norm() / b_norm;
        if (rel <= rel_tol) {
            res.iterations = it;
            res.rel_residual = rel;
            res.converged = true;
            return res;
        }
        z = diag_inv.cwiseProduct(r);
        proj.apply(z);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    res.iterations = max_iterations;
    res.rel_residual = r.norm() / b_norm;
    res.converged = false;
    return res;
}

} // namespace detail
} // namespace vkrod
