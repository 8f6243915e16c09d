#include "vkrod/material.hpp"

#include <cmath>
#include <stdexcept>

namespace vkrod {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

Vector6 sym_to_voigt(const Matrix3& G) {
    Matrix3 S = 0.5 * (G + G.transpose());
    Vector6 v;
    v << S(0, 0), S(1, 1), S(2, 2), kSqrt2 * S(1, 2), kSqrt2 * S(0, 2), kSqrt2 * S(0, 1);
    return v;
}

Matrix3 voigt_to_sym(const Vector6& v) {
    Matrix3 S;
    const double s23 = v(3) / kSqrt2, s13 = v(4) / kSqrt2, s12 = v(5) / kSqrt2;
    S << v(0), s12, s13,
         s12, v(1), s23,
         s13, s23, v(2);
    return S;
}

ElasticityTensor::ElasticityTensor(const Matrix6& m) : m_(m) {
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("ElasticityTensor: matrix must be symmetric");
    m_ = 0.5 * (m + m.transpose());
}

double ElasticityTensor::energy(const Matrix3& G) const {
    return energy_v(sym_to_voigt(G));
}

double ElasticityTensor::bilinear(const Matrix3& G, const Matrix3& H) const {
    return bilinear_v(sym_to_voigt(G), sym_to_voigt(H));
}

ElasticityTensor isotropic_tensor(double lame_lambda, double lame_mu) {
    if (!(lame_mu > 0.0) || lame_lambda < 0.0)
        throw std::invalid_argument("isotropic_tensor: need mu > 0 and lambda >= 0");
    Vector6 id_coords;
    id_coords << 1, 1, 1, 0, 0, 0; // coordinates of the identity matrix
    Matrix6 m = 2.0 * lame_mu * Matrix6::Identity()
              + lame_lambda * id_coords * id_coords.transpose();
    return ElasticityTensor(m);
}

double quadratic_energy(const ElasticityTensor& t, const Matrix3& G) {
    return t.energy(G);
}

std::pair<double, double> admissibility_bounds(const ElasticityTensor& t) {
    Eigen::SelfAdjointEigenSolver<Matrix6> es(t.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("admissibility_bounds: eigensolver failed");
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0))
        throw std::domain_error("admissibility_bounds: tensor is not positive definite");
    return {lo, hi};
}

NonlinearLaw make_svk_law(double lame_lambda, double lame_mu) {
    if (!(lame_mu > 0.0) || lame_lambda < 0.0)
        throw std::invalid_argument("make_svk_law: need mu > 0 and lambda >= 0");
    return NonlinearLaw{lame_lambda, lame_mu};
}

double svk_energy(const NonlinearLaw& law, const Matrix3& F) {
    Matrix3 E = 0.5 * (F.transpose() * F - Matrix3::Identity());
    const double tr = E.trace();
    return 0.5 * law.lame_lambda * tr * tr + law.lame_mu * E.squaredNorm();
}

double young_modulus(double lame_lambda, double lame_mu) {
    return lame_mu * (3.0 * lame_lambda + 2.0 * lame_mu) / (lame_lambda + lame_mu);
}

} // namespace vkrod
