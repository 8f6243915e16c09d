#include "vkrod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace vkrod {

namespace {

double tri_area(const Vector2& a, const Vector2& b, const Vector2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double bbox_diag2(const std::vector<Vector2>& pts) {
    Vector2 lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).squaredNorm();
}

void check_mesh(const CrossSection& cs) {
    if (cs.vertices.empty() || cs.triangles.empty())
        throw std::invalid_argument("cross-section mesh is empty");
    const double floor = 1e-14 * bbox_diag2(cs.vertices);
    for (const auto& t : cs.triangles) {
        const double a = tri_area(cs.vertices[t[0]], cs.vertices[t[1]], cs.vertices[t[2]]);
        if (!(a > floor))
            throw std::invalid_argument("cross-section mesh has a degenerate or negatively oriented triangle");
    }
}

bool segments_intersect(const Vector2& p1, const Vector2& p2, const Vector2& q1, const Vector2& q2) {
    auto orient = [](const Vector2& a, const Vector2& b, const Vector2& c) {
        const double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        return (v > 0) - (v < 0);
    };
    const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return o1 != o2 && o3 != o4;
}

} // namespace

double CrossSection::area() const {
    double a = 0.0;
    for (const auto& t : triangles)
        a += tri_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    return a;
}

double CrossSection::max_edge_length() const {
    double m = 0.0;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e)
            m = std::max(m, (vertices[t[e]] - vertices[t[(e + 1) % 3]]).norm());
    return m;
}

Matrix3 skew_from_axl(const Vector3& k) {
    Matrix3 A;
    A <<     0, -k(2),  k(1),
          k(2),     0, -k(0),
         -k(1),  k(0),     0;
    return A;
}

Vector3 axl(const Matrix3& A) {
    return Vector3(A(2, 1), A(0, 2), A(1, 0));
}

Matrix3 iota(const Vector3& v) {
    Matrix3 M = Matrix3::Zero();
    M.col(0) = v;
    return M;
}

Vector3 macro_strain_field(const MacroStrain& ms, const Vector2& xp) {
    const double x2 = xp.x(), x3 = xp.y();
    return Vector3(ms.rho - ms.kappa(2) * x2 + ms.kappa(1) * x3,
                   -ms.kappa(0) * x3,
                   ms.kappa(0) * x2);
}

CrossSection build_disk_section(double radius, double target_h) {
    if (!(radius > 0.0) || !(target_h > 0.0))
        throw std::invalid_argument("build_disk_section: radius and target_h must be positive");
    // Hexagonal ring mesh: ring j carries 6j vertices, giving near-equilateral
    // triangles and a 6m-fold symmetric boundary polygon. The longest edges
    // are the inner-ring diagonals at about 1.45 r/m.
    const int m = std::max(2, (int)std::ceil(1.46 * radius / target_h));
    CrossSection cs;
    cs.vertices.push_back(Vector2::Zero());
    std::vector<int> ring_start(m + 1, 0);
    for (int j = 1; j <= m; ++j) {
        ring_start[j] = (int)cs.vertices.size();
        const int n = 6 * j;
        const double r = radius * j / m;
        for (int k = 0; k < n; ++k) {
            const double phi = 2.0 * M_PI * k / n;
            cs.vertices.push_back(Vector2(r * std::cos(phi), r * std::sin(phi)));
        }
    }
    // Inner fan.
    for (int k = 0; k < 6; ++k)
        cs.triangles.push_back({0, ring_start[1] + k, ring_start[1] + (k + 1) % 6});
    // Ring j-1 -> ring j strips, sector by sector.
    for (int j = 2; j <= m; ++j) {
        const int ni = 6 * (j - 1), no = 6 * j;
        auto inner = [&](int k) { return ring_start[j - 1] + ((k % ni) + ni) % ni; };
        auto outer = [&](int k) { return ring_start[j] + ((k % no) + no) % no; };
        for (int s = 0; s < 6; ++s) {
            const int i0 = s * (j - 1), o0 = s * j;
            for (int k = 0; k < j - 1; ++k) {
                cs.triangles.push_back({inner(i0 + k), outer(o0 + k), outer(o0 + k + 1)});
                cs.triangles.push_back({inner(i0 + k), outer(o0 + k + 1), inner(i0 + k + 1)});
            }
            cs.triangles.push_back({inner(i0 + j - 1), outer(o0 + j - 1), outer(o0 + j)});
        }
    }
    check_mesh(cs);
    while (cs.max_edge_length() > target_h * (1.0 + 1e-9))
        cs = refine_uniform(cs);
    return cs;
}

CrossSection build_rectangle_section(double width, double height, double target_h) {
    if (!(width > 0.0) || !(height > 0.0) || !(target_h > 0.0))
        throw std::invalid_argument("build_rectangle_section: dimensions must be positive");
    // sqrt(2) accounts for the split-cell diagonals.
    const int nx = std::max(1, (int)std::ceil(std::sqrt(2.0) * width / target_h));
    const int ny = std::max(1, (int)std::ceil(std::sqrt(2.0) * height / target_h));
    CrossSection cs;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            cs.vertices.push_back(Vector2(-0.5 * width + width * i / nx,
                                          -0.5 * height + height * j / ny));
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            cs.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            cs.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    while (cs.max_edge_length() > target_h * (1.0 + 1e-9))
        cs = refine_uniform(cs);
    return cs;
}

CrossSection build_polygon_section(const std::vector<Vector2>& poly, double target_h) {
    if (poly.size() < 3 || !(target_h > 0.0))
        throw std::invalid_argument("build_polygon_section: need >= 3 vertices and target_h > 0");
    const int n = (int)poly.size();
    // Reject self-intersecting outlines (non-adjacent edge pairs crossing).
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                throw std::invalid_argument("build_polygon_section: polygon is self-intersecting");
        }
    double signed_area = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vector2& a = poly[i];
        const Vector2& b = poly[(i + 1) % n];
        signed_area += 0.5 * (a.x() * b.y() - b.x() * a.y());
    }
    std::vector<Vector2> pts = poly;
    if (signed_area < 0.0) std::reverse(pts.begin(), pts.end());

    CrossSection cs;
    cs.vertices = pts;
    // Ear clipping on the (now counter-clockwise) outline.
    std::vector<int> ring(pts.size());
    for (size_t i = 0; i < ring.size(); ++i) ring[i] = (int)i;
    const double eps = 1e-14 * bbox_diag2(pts);
    auto inside = [&](const Vector2& a, const Vector2& b, const Vector2& c, const Vector2& p) {
        return tri_area(a, b, p) > -eps && tri_area(b, c, p) > -eps && tri_area(c, a, p) > -eps;
    };
    int guard = 0;
    while (ring.size() > 3) {
        if (++guard > 10000)
            throw std::invalid_argument("build_polygon_section: triangulation failed (degenerate outline?)");
        bool clipped = false;
        for (size_t k = 0; k < ring.size(); ++k) {
            const int ia = ring[(k + ring.size() - 1) % ring.size()];
            const int ib = ring[k];
            const int ic = ring[(k + 1) % ring.size()];
            if (tri_area(pts[ia], pts[ib], pts[ic]) <= eps) continue;
            bool ear = true;
            for (int other : ring) {
                if (other == ia || other == ib || other == ic) continue;
                if (inside(pts[ia], pts[ib], pts[ic], pts[other])) { ear = false; break; }
            }
            if (ear) {
                cs.triangles.push_back({ia, ib, ic});
                ring.erase(ring.begin() + k);
                clipped = true;
                break;
            }
        }
        if (!clipped)
            throw std::invalid_argument("build_polygon_section: no ear found (degenerate outline?)");
    }
    cs.triangles.push_back({ring[0], ring[1], ring[2]});
    check_mesh(cs);
    while (cs.max_edge_length() > target_h * (1.0 + 1e-9))
        cs = refine_uniform(cs);
    return cs;
}

CrossSection refine_uniform(const CrossSection& cs) {
    CrossSection out;
    out.vertices = cs.vertices;
    out.quadrature_order = cs.quadrature_order;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = (int)out.vertices.size();
        out.vertices.push_back(0.5 * (cs.vertices[a] + cs.vertices[b]));
        midpoint.emplace(key, id);
        return id;
    };
    for (const auto& t : cs.triangles) {
        const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({m01, t[1], m12});
        out.triangles.push_back({m20, m12, t[2]});
        out.triangles.push_back({m01, m12, m20});
    }
    return out;
}

namespace {

// Exact integrals of 1, x2, x3, x2^2, x3^2, x2 x3 over the mesh.
struct RawMoments {
    double a = 0, m2 = 0, m3 = 0, i22 = 0, i33 = 0, i23 = 0;
};

RawMoments raw_moments(const CrossSection& cs) {
    RawMoments r;
    for (size_t t = 0; t < cs.triangles.size(); ++t) {
        const auto& tri = cs.triangles[t];
        const Vector2& p0 = cs.vertices[tri[0]];
        const Vector2& p1 = cs.vertices[tri[1]];
        const Vector2& p2 = cs.vertices[tri[2]];
        const double a = tri_area(p0, p1, p2);
        r.a += a;
        // Degree-2 midedge rule is exact for all of these.
        const Vector2 q[3] = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
        for (const auto& p : q) {
            const double w = a / 3.0;
            r.m2 += w * p.x();
            r.m3 += w * p.y();
            r.i22 += w * p.x() * p.x();
            r.i33 += w * p.y() * p.y();
            r.i23 += w * p.x() * p.y();
        }
    }
    return r;
}

} // namespace

CrossSection normalize_section(const CrossSection& cs, SectionTransform* transform) {
    check_mesh(cs);
    RawMoments r = raw_moments(cs);
    if (!(r.a > 0.0))
        throw std::invalid_argument("normalize_section: zero-area mesh");
    const Vector2 centroid(r.m2 / r.a, r.m3 / r.a);

    // Central second moments.
    const double i22 = r.i22 - r.a * centroid.x() * centroid.x();
    const double i33 = r.i33 - r.a * centroid.y() * centroid.y();
    const double i23 = r.i23 - r.a * centroid.x() * centroid.y();

    // Principal-axis rotation from the 2x2 inertia eigenproblem. Ties
    // (i22 == i33 and i23 == 0 within roundoff) keep the identity.
    double angle = 0.0;
    const double scale_m = std::max({std::abs(i22), std::abs(i33), 1e-300});
    if (std::abs(i23) > 1e-13 * scale_m)
        angle = 0.5 * std::atan2(2.0 * i23, i22 - i33);

    const double s = 1.0 / std::sqrt(r.a);
    const double ca = std::cos(angle), sa = std::sin(angle);

    CrossSection out = cs;
    for (auto& v : out.vertices) {
        const Vector2 c = v - centroid;
        v = s * Vector2(ca * c.x() + sa * c.y(), -sa * c.x() + ca * c.y());
    }
    if (transform) {
        transform->shift = centroid;
        transform->angle = angle;
        transform->scale = s;
    }
    return out;
}

SectionProperties section_properties(const CrossSection& cs) {
    RawMoments r = raw_moments(cs);
    SectionProperties p;
    p.area = r.a;
    p.i2 = r.i22;
    p.i3 = r.i33;
    p.mu_omega = p.i2 + p.i3;
    if (!(p.area > 0.0) || !(p.i2 > 0.0) || !(p.i3 > 0.0))
        throw std::invalid_argument("section_properties: degenerate section");
    return p;
}

Vector2 first_moments(const CrossSection& cs) {
    RawMoments r = raw_moments(cs);
    return Vector2(r.m2, r.m3);
}

double product_moment(const CrossSection& cs) {
    return raw_moments(cs).i23;
}

TriangleQuadrature triangle_quadrature(const CrossSection& cs, int tri) {
    const auto& t = cs.triangles[tri];
    const Vector2& p0 = cs.vertices[t[0]];
    const Vector2& p1 = cs.vertices[t[1]];
    const Vector2& p2 = cs.vertices[t[2]];
    TriangleQuadrature q;
    q.points = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
    q.weight = tri_area(p0, p1, p2) / 3.0;
    return q;
}

std::array<Vector2, 3> p1_gradients(const CrossSection& cs, int tri) {
    const auto& t = cs.triangles[tri];
    const Vector2& p0 = cs.vertices[t[0]];
    const Vector2& p1 = cs.vertices[t[1]];
    const Vector2& p2 = cs.vertices[t[2]];
    const double det = 2.0 * tri_area(p0, p1, p2);
    return {Vector2(p1.y() - p2.y(), p2.x() - p1.x()) / det,
            Vector2(p2.y() - p0.y(), p0.x() - p2.x()) / det,
            Vector2(p0.y() - p1.y(), p1.x() - p0.x()) / det};
}

} // namespace vkrod
