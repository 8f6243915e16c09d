#ifndef VKROD_MATERIAL_HH
#define VKROD_MATERIAL_HH

#include <Eigen/Dense>
#include <utility>

namespace vkrod {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

// Coordinates of a symmetric 3x3 matrix in the orthonormal basis
//   B1 = e1(x)e1, B2 = e2(x)e2, B3 = e3(x)e3,
//   B4 = (e2(x)e3 + e3(x)e2)/sqrt(2),
//   B5 = (e1(x)e3 + e3(x)e1)/sqrt(2),
//   B6 = (e1(x)e2 + e2(x)e1)/sqrt(2).
// The sqrt(2) scaling makes the coordinate map an isometry, so operator
// eigenvalues of a stiffness matrix are literally the coercivity and
// boundedness constants of the quadratic form.
Vector6 sym_to_voigt(const Matrix3& G);
Matrix3 voigt_to_sym(const Vector6& v);

// Stiffness operator on symmetric strains, stored as a symmetric 6x6
// matrix in the orthonormal basis above. Q(G) = 1/2 A sym(G) : sym(G).
class ElasticityTensor {
public:
    ElasticityTensor() : m_(Matrix6::Zero()) {}
    explicit ElasticityTensor(const Matrix6& m);

    const Matrix6& matrix() const { return m_; }

    // 1/2 A sym(G):sym(G); depends on G only through sym(G).
    double energy(const Matrix3& G) const;
    // A sym(G):sym(H), the polarization of 2*energy.
    double bilinear(const Matrix3& G, const Matrix3& H) const;

    // Voigt-coordinate versions used by assembly inner loops.
    double energy_v(const Vector6& g) const { return 0.5 * g.dot(m_ * g); }
    double bilinear_v(const Vector6& g, const Vector6& h) const { return g.dot(m_ * h); }

private:
    Matrix6 m_;
};

// Q(G) = mu |sym G|^2 + (lambda/2) (tr G)^2, i.e. the operator
// 2 mu Id + lambda I(x)I on symmetric matrices.
ElasticityTensor isotropic_tensor(double lame_lambda, double lame_mu);

double quadratic_energy(const ElasticityTensor& t, const Matrix3& G);

// Extremal eigenvalues (alpha_est, beta_est) of the 6x6 stiffness matrix.
// Throws if the smallest eigenvalue is <= 0 (coercivity violation).
std::pair<double, double> admissibility_bounds(const ElasticityTensor& t);

// St. Venant-Kirchhoff density, the concrete nonlinear law whose quadratic
// expansion at the identity is isotropic_tensor(lambda, mu).
struct NonlinearLaw {
    double lame_lambda = 1.0;
    double lame_mu = 1.0;
};

NonlinearLaw make_svk_law(double lame_lambda, double lame_mu);

// W(F) = (lambda/2)(tr E)^2 + mu |E|^2 with E = (F^T F - I)/2.
// W(I) = 0 and W(RF) = W(F) for rotations R.
double svk_energy(const NonlinearLaw& law, const Matrix3& F);

// Young's modulus of the isotropic law, mu(3 lambda + 2 mu)/(lambda + mu):
// the uniaxial-stress stiffness after relaxing transverse strains.
double young_modulus(double lame_lambda, double lame_mu);

} // namespace vkrod

#endif
