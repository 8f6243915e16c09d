#ifndef VKROD_GEOMETRY_HH
#define VKROD_GEOMETRY_HH

#include <array>
#include <vector>

#include "vkrod/material.hpp"

namespace vkrod {

using Vector2 = Eigen::Vector2d;

// Conforming triangle mesh of the cross-section omega in the (x2, x3) plane.
// Triangles are positively oriented. P1 elements throughout; degree-2 Gauss
// quadrature is exact for every integrand assembled on these meshes.
struct CrossSection {
    std::vector<Vector2> vertices;
    std::vector<std::array<int, 3>> triangles;
    int quadrature_order = 2;

    double area() const;
    double max_edge_length() const;
};

enum class SectionShape { Disk, Rectangle, Polygon };

struct SectionProperties {
    double area = 0.0;
    double i2 = 0.0;       // int x2^2
    double i3 = 0.0;       // int x3^2
    double mu_omega = 0.0; // int (x2^2 + x3^2) = i2 + i3
};

// Similarity transform applied by normalize_section: x |-> scale * R(-angle) * (x - shift).
struct SectionTransform {
    Vector2 shift = Vector2::Zero();
    double angle = 0.0;
    double scale = 1.0;
};

// Axial stretch plus twist/curvature rate (rho, kappa). kappa = axl(Psi) of
// the induced skew matrix; the component order is fixed everywhere as
//   kappa = (kappa1, kappa2, kappa3) = (w', -v3'', v2'').
struct MacroStrain {
    double rho = 0.0;
    Vector3 kappa = Vector3::Zero();
};

// axl A = (A32, A13, A21) and its inverse on skew matrices.
Matrix3 skew_from_axl(const Vector3& k);
Vector3 axl(const Matrix3& A);

// iota(v) = v (x) e1: the 3x3 matrix with v in the first column.
Matrix3 iota(const Vector3& v);

// m(rho, kappa)(x') = rho e1 + Psi p(x') with p(x') = (0, x2, x3)^T, i.e.
//   (rho - kappa3 x2 + kappa2 x3, -kappa1 x3, kappa1 x2).
Vector3 macro_strain_field(const MacroStrain& ms, const Vector2& xp);

// Mesh generation. target_h bounds the maximum edge length.
//  - disk: hexagonal "spiderweb" mesh of an inscribed regular polygon
//  - rectangle: structured grid split into triangles
//  - polygon: ear-clipping triangulation + uniform refinement (simple polygons)
CrossSection build_disk_section(double radius, double target_h);
CrossSection build_rectangle_section(double width, double height, double target_h);
CrossSection build_polygon_section(const std::vector<Vector2>& poly, double target_h);

// Midpoint refinement: each triangle splits into four. Coarse vertices keep
// their indices, so coarse P1 functions are exactly representable.
CrossSection refine_uniform(const CrossSection& cs);

// Translate to the centroid, rotate to principal axes (int x2 x3 = 0, ties
// keep the identity rotation) and scale to unit area.
CrossSection normalize_section(const CrossSection& cs, SectionTransform* transform = nullptr);

// Exact degree-2 moments. Requires a normalized section for the paper
// conventions but computes faithfully on any mesh.
SectionProperties section_properties(const CrossSection& cs);

// First moments int_T x2 dx', int_T x3 dx' of the whole mesh (diagnostics).
Vector2 first_moments(const CrossSection& cs);
double product_moment(const CrossSection& cs); // int x2 x3

// Degree-2 quadrature rule on a triangle: edge-midpoint points, equal weights.
struct TriangleQuadrature {
    std::array<Vector2, 3> points;
    double weight; // per point; sum = triangle area
};
TriangleQuadrature triangle_quadrature(const CrossSection& cs, int tri);

// Gradients of the three P1 hat functions on a triangle (constant per element).
std::array<Vector2, 3> p1_gradients(const CrossSection& cs, int tri);

} // namespace vkrod

#endif
