#include "vkrod/cell.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

namespace vkrod {

namespace {

// P1 hat values at the midedge quadrature points mid(01), mid(12), mid(20).
constexpr double kPhi[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
constexpr double kGauss[2] = {-0.5773502691896257, 0.5773502691896257};

enum GzNodeDof { GZ_PSI12 = 0, GZ_PSI13 = 1, GZ_PSI23 = 2, GZ_TH11 = 3 };

struct Layout {
    Regime regime;
    int N, V;
    int total;
    bool aug_skew = false;

    static Layout make(const RegimeSpec& rs, int vertices) {
        Layout l;
        l.regime = rs.regime;
        l.N = rs.axial_nodes;
        l.V = vertices;
        l.aug_skew = rs.augment_skew && rs.regime == Regime::Finite;
        switch (rs.regime) {
        case Regime::Finite: l.total = 3 * l.N * l.V + (l.aug_skew ? 3 * l.N : 0); break;
        case Regime::Zero: l.total = 4 * l.N + 3 * l.N * l.V; break;
        case Regime::Infinite: l.total = 3 * l.N * l.V + 3 * l.V; break;
        }
        return l;
    }

    int theta1(int node, int vertex, int comp) const { return 3 * (node * V + vertex) + comp; }
    int gz_node(int node, int which) const { return 4 * node + which; }
    int gz_theta2(int node, int vertex, int comp) const { return 4 * N + 3 * (node * V + vertex) + comp; }
    int gi_theta2(int vertex, int comp) const { return 3 * N * V + 3 * vertex + comp; }
    int aug_psi(int node, int which) const { return 3 * N * V + 3 * node + which; } // which: 12, 13, 23
};

Layout layout_of(const CorrectorField& c) {
    RegimeSpec rs = c.regime;
    rs.axial_nodes = c.n_axial;
    return Layout::make(rs, c.n_vertices);
}

void check_field(const CorrectorField& c) {
    const Layout l = layout_of(c);
    if (c.dofs.size() != l.total)
        throw std::invalid_argument("corrector field: dof vector does not match its layout");
}

} // namespace

void validate(const RegimeSpec& spec) {
    if (spec.regime == Regime::Finite && !(spec.gamma > 0.0))
        throw std::invalid_argument("regime: gamma must be positive in the finite regime");
    if (spec.axial_nodes < 2)
        throw std::invalid_argument("regime: need at least 2 axial nodes");
    if (!(spec.window > 0.0))
        throw std::invalid_argument("regime: window length must be positive");
}

Vector3 corrector_theta1(const CorrectorField& c, int node, int vertex) {
    check_field(c);
    if (c.regime.regime == Regime::Zero)
        throw std::invalid_argument("corrector_theta1: use corrector_theta1_node in the gamma->0 regime");
    const Layout l = layout_of(c);
    return Vector3(c.dofs[l.theta1(node, vertex, 0)],
                   c.dofs[l.theta1(node, vertex, 1)],
                   c.dofs[l.theta1(node, vertex, 2)]);
}

Vector3 corrector_theta1_node(const CorrectorField& c, int node) {
    check_field(c);
    if (c.regime.regime != Regime::Zero)
        throw std::invalid_argument("corrector_theta1_node: gamma->0 regime only");
    const Layout l = layout_of(c);
    return Vector3(c.dofs[l.gz_node(node, GZ_TH11)], 0.0, 0.0);
}

Vector3 corrector_psi1_axl(const CorrectorField& c, int node) {
    check_field(c);
    if (c.regime.regime != Regime::Zero)
        throw std::invalid_argument("corrector_psi1_axl: gamma->0 regime only");
    const Layout l = layout_of(c);
    // axl(Psi) = (Psi32, Psi13, Psi21) with stored dofs (Psi12, Psi13, Psi23).
    return Vector3(-c.dofs[l.gz_node(node, GZ_PSI23)],
                   c.dofs[l.gz_node(node, GZ_PSI13)],
                   -c.dofs[l.gz_node(node, GZ_PSI12)]);
}

Vector3 corrector_theta2(const CorrectorField& c, int node, int vertex) {
    check_field(c);
    const Layout l = layout_of(c);
    if (c.regime.regime == Regime::Zero)
        return Vector3(c.dofs[l.gz_theta2(node, vertex, 0)],
                       c.dofs[l.gz_theta2(node, vertex, 1)],
                       c.dofs[l.gz_theta2(node, vertex, 2)]);
    if (c.regime.regime == Regime::Infinite)
        return Vector3(c.dofs[l.gi_theta2(vertex, 0)],
                       c.dofs[l.gi_theta2(vertex, 1)],
                       c.dofs[l.gi_theta2(vertex, 2)]);
    throw std::invalid_argument("corrector_theta2: not defined in the finite regime");
}

Matrix3 corrector_strain_at(const CorrectorField& c, const CrossSection& cs,
                            int tri, const Vector3& bary, double s) {
    check_field(c);
    const Layout l = layout_of(c);
    const double T = c.regime.window;
    const double delta = T / l.N;
    double srel = s - T * std::floor(s / T);
    int elem = std::min((int)(srel / delta), l.N - 1);
    const double tau = srel / delta - elem;
    const int n0 = elem, n1 = (elem + 1) % l.N;

    const auto& t = cs.triangles[tri];
    const auto grads = p1_gradients(cs, tri);
    const Vector2 xp = bary(0) * cs.vertices[t[0]] + bary(1) * cs.vertices[t[1]]
                     + bary(2) * cs.vertices[t[2]];

    Matrix3 F = Matrix3::Zero();
    switch (c.regime.regime) {
    case Regime::Finite: {
        const double ginv = 1.0 / c.regime.gamma;
        for (int vl = 0; vl < 3; ++vl) {
            const int v = t[vl];
            for (int comp = 0; comp < 3; ++comp) {
                const double d0 = c.dofs[l.theta1(n0, v, comp)];
                const double d1 = c.dofs[l.theta1(n1, v, comp)];
                F(comp, 0) += (d1 - d0) / delta * bary(vl);
                const double interp = (1.0 - tau) * d0 + tau * d1;
                F(comp, 1) += ginv * interp * grads[vl].x();
                F(comp, 2) += ginv * interp * grads[vl].y();
            }
        }
        if (l.aug_skew) {
            const double dp12 = (c.dofs[l.aug_psi(n1, 0)] - c.dofs[l.aug_psi(n0, 0)]) / delta;
            const double dp13 = (c.dofs[l.aug_psi(n1, 1)] - c.dofs[l.aug_psi(n0, 1)]) / delta;
            const double dp23 = (c.dofs[l.aug_psi(n1, 2)] - c.dofs[l.aug_psi(n0, 2)]) / delta;
            F(0, 0) += dp12 * xp.x() + dp13 * xp.y();
            F(1, 0) += dp23 * xp.y();
            F(2, 0) += -dp23 * xp.x();
        }
        break;
    }
    case Regime::Zero: {
        const double dpsi12 = (c.dofs[l.gz_node(n1, GZ_PSI12)] - c.dofs[l.gz_node(n0, GZ_PSI12)]) / delta;
        const double dpsi13 = (c.dofs[l.gz_node(n1, GZ_PSI13)] - c.dofs[l.gz_node(n0, GZ_PSI13)]) / delta;
        const double dpsi23 = (c.dofs[l.gz_node(n1, GZ_PSI23)] - c.dofs[l.gz_node(n0, GZ_PSI23)]) / delta;
        const double dth11 = (c.dofs[l.gz_node(n1, GZ_TH11)] - c.dofs[l.gz_node(n0, GZ_TH11)]) / delta;
        F(0, 0) += dth11 + dpsi12 * xp.x() + dpsi13 * xp.y();
        F(1, 0) += dpsi23 * xp.y();
        F(2, 0) += -dpsi23 * xp.x();
        for (int vl = 0; vl < 3; ++vl) {
            const int v = t[vl];
            for (int comp = 0; comp < 3; ++comp) {
                const double d0 = c.dofs[l.gz_theta2(n0, v, comp)];
                const double d1 = c.dofs[l.gz_theta2(n1, v, comp)];
                const double interp = (1.0 - tau) * d0 + tau * d1;
                F(comp, 1) += interp * grads[vl].x();
                F(comp, 2) += interp * grads[vl].y();
            }
        }
        break;
    }
    case Regime::Infinite: {
        for (int vl = 0; vl < 3; ++vl) {
            const int v = t[vl];
            for (int comp = 0; comp < 3; ++comp) {
                const double d0 = c.dofs[l.theta1(n0, v, comp)];
                const double d1 = c.dofs[l.theta1(n1, v, comp)];
                F(comp, 0) += (d1 - d0) / delta * bary(vl);
                const double d2 = c.dofs[l.gi_theta2(v, comp)];
                F(comp, 1) += d2 * grads[vl].x();
                F(comp, 2) += d2 * grads[vl].y();
            }
        }
        break;
    }
    }
    return F;
}

Matrix3 corrector_strain(const CorrectorField& c, const CrossSection& cs,
                         int tri, int qpt, double s) {
    return corrector_strain_at(c, cs, tri,
                               Vector3(kPhi[qpt][0], kPhi[qpt][1], kPhi[qpt][2]), s);
}

int locate_triangle(const CrossSection& cs, const Vector2& xp, Vector3* bary) {
    const double tol = -1e-12;
    for (int tri = 0; tri < (int)cs.triangles.size(); ++tri) {
        const auto& t = cs.triangles[tri];
        const Vector2& a = cs.vertices[t[0]];
        const Vector2& b = cs.vertices[t[1]];
        const Vector2& c = cs.vertices[t[2]];
        const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
        const double l1 = ((b.x() - xp.x()) * (c.y() - xp.y()) - (c.x() - xp.x()) * (b.y() - xp.y())) / det;
        const double l2 = ((c.x() - xp.x()) * (a.y() - xp.y()) - (a.x() - xp.x()) * (c.y() - xp.y())) / det;
        const double l3 = 1.0 - l1 - l2;
        if (l1 >= tol && l2 >= tol && l3 >= tol) {
            if (bary) *bary = Vector3(l1, l2, l3);
            return tri;
        }
    }
    return -1;
}

double EffectiveForm::q0(double rho, const Vector3& kappa) const {
    Eigen::Vector4d v(rho, kappa(0), kappa(1), kappa(2));
    return 0.5 * v.dot(a0 * v);
}

double EffectiveForm::q0_1(const Vector3& kappa) const {
    return 0.5 * kappa.dot(a0_1 * kappa);
}

std::pair<Eigen::Matrix3d, Eigen::Vector3d> reduce_form(const Eigen::Matrix4d& a0) {
    const double a = a0(0, 0);
    if (!(a > 0.0))
        throw std::domain_error("reduce_form: stretch block of a0 is not positive");
    const Eigen::Vector3d b = a0.block<3, 1>(1, 0);
    const Eigen::Matrix3d C = a0.block<3, 3>(1, 1);
    return {C - b * b.transpose() / a, -b / a};
}

EffectiveForm effective_form_from_a0(const Eigen::Matrix4d& a0) {
    EffectiveForm eff;
    eff.a0 = 0.5 * (a0 + a0.transpose());
    auto [a01, rho0] = reduce_form(eff.a0);
    eff.a0_1 = a01;
    eff.rho0_coeffs = rho0;
    return eff;
}

CellProblem::CellProblem(const RegimeSpec& regime, const CrossSection& cs,
                         const MicrostructureRealization& micro)
    : regime_(regime), cs_(cs), micro_(micro) {
    validate(regime_);
    if (cs_.vertices.empty() || cs_.triangles.empty())
        throw std::invalid_argument("cell problem: empty cross-section mesh");

    const Layout lay = Layout::make(regime_, (int)cs_.vertices.size());
    total_dofs_ = lay.total;
    const int N = lay.N;
    const double T = regime_.window;
    const double delta = T / N;
    const int n_tri = (int)cs_.triangles.size();

    for (auto& v : unit_rhs_) v = Eigen::VectorXd::Zero(total_dofs_);
    macro_gram_.setZero();

    // Unit macro strains in the order (rho, kappa1, kappa2, kappa3).
    std::array<MacroStrain, 4> units;
    units[0].rho = 1.0;
    for (int k = 0; k < 3; ++k) units[k + 1].kappa(k) = 1.0;

    std::vector<Eigen::Triplet<double>> trips;

    std::vector<int> ids;
    std::vector<Vector6> bv;
    Eigen::MatrixXd k_loc;
    Eigen::MatrixXd g_loc;

    for (int elem = 0; elem < N; ++elem) {
        const int n0 = elem, n1 = (elem + 1) % N;
        const double s_left = elem * delta;
        const auto segs = micro_.segments_in(s_left, s_left + delta);

        for (int tri = 0; tri < n_tri; ++tri) {
            const auto& t = cs_.triangles[tri];
            const auto grads = p1_gradients(cs_, tri);
            const auto quad = triangle_quadrature(cs_, tri);

            // Local dof ids, fixed per (element, triangle).
            ids.clear();
            switch (regime_.regime) {
            case Regime::Finite:
                for (int a = 0; a < 2; ++a)
                    for (int vl = 0; vl < 3; ++vl)
                        for (int c = 0; c < 3; ++c)
                            ids.push_back(lay.theta1(a ? n1 : n0, t[vl], c));
                if (lay.aug_skew)
                    for (int a = 0; a < 2; ++a)
                        for (int w = 0; w < 3; ++w)
                            ids.push_back(lay.aug_psi(a ? n1 : n0, w));
                break;
            case Regime::Zero:
                for (int a = 0; a < 2; ++a)
                    for (int w = 0; w < 4; ++w)
                        ids.push_back(lay.gz_node(a ? n1 : n0, w));
                for (int a = 0; a < 2; ++a)
                    for (int vl = 0; vl < 3; ++vl)
                        for (int c = 0; c < 3; ++c)
                            ids.push_back(lay.gz_theta2(a ? n1 : n0, t[vl], c));
                break;
            case Regime::Infinite:
                for (int a = 0; a < 2; ++a)
                    for (int vl = 0; vl < 3; ++vl)
                        for (int c = 0; c < 3; ++c)
                            ids.push_back(lay.theta1(a ? n1 : n0, t[vl], c));
                for (int vl = 0; vl < 3; ++vl)
                    for (int c = 0; c < 3; ++c)
                        ids.push_back(lay.gi_theta2(t[vl], c));
                break;
            }
            const int nd = (int)ids.size();
            k_loc.setZero(nd, nd);
            g_loc.setZero(nd, 4);
            bv.assign(nd, Vector6::Zero());

            for (const auto& seg : segs) {
                const Matrix6& M = micro_.phase_tensor(seg.phase).matrix();
                const double half = 0.5 * (seg.end - seg.begin);
                const double mid = 0.5 * (seg.end + seg.begin);
                for (int gs = 0; gs < 2; ++gs) {
                    const double s_g = mid + half * kGauss[gs];
                    const double w_s = half; // Gauss weight 1 on [-1,1], scaled
                    const double tau = (s_g - s_left) / delta;

                    for (int qpt = 0; qpt < 3; ++qpt) {
                        const Vector2 xp = quad.points[qpt];
                        const double w = w_s * quad.weight / T;

                        // Strain sensitivities of the local dofs.
                        int d = 0;
                        Matrix3 B;
                        switch (regime_.regime) {
                        case Regime::Finite: {
                            const double ginv = 1.0 / regime_.gamma;
                            for (int a = 0; a < 2; ++a) {
                                const double dd = (a ? 1.0 : -1.0) / delta;
                                const double tf = a ? tau : 1.0 - tau;
                                for (int vl = 0; vl < 3; ++vl)
                                    for (int c = 0; c < 3; ++c) {
                                        B.setZero();
                                        B(c, 0) = dd * kPhi[qpt][vl];
                                        B(c, 1) = ginv * tf * grads[vl].x();
                                        B(c, 2) = ginv * tf * grads[vl].y();
                                        bv[d++] = sym_to_voigt(B);
                                    }
                            }
                            if (lay.aug_skew)
                                for (int a = 0; a < 2; ++a) {
                                    const double dd = (a ? 1.0 : -1.0) / delta;
                                    B.setZero(); B(0, 0) = dd * xp.x(); bv[d++] = sym_to_voigt(B);
                                    B.setZero(); B(0, 0) = dd * xp.y(); bv[d++] = sym_to_voigt(B);
                                    B.setZero(); B(1, 0) = dd * xp.y(); B(2, 0) = -dd * xp.x();
                                    bv[d++] = sym_to_voigt(B);
                                }
                            break;
                        }
                        case Regime::Zero: {
                            for (int a = 0; a < 2; ++a) {
                                const double dd = (a ? 1.0 : -1.0) / delta;
                                B.setZero(); B(0, 0) = dd * xp.x(); bv[d++] = sym_to_voigt(B);
                                B.setZero(); B(0, 0) = dd * xp.y(); bv[d++] = sym_to_voigt(B);
                                B.setZero(); B(1, 0) = dd * xp.y(); B(2, 0) = -dd * xp.x(); bv[d++] = sym_to_voigt(B);
                                B.setZero(); B(0, 0) = dd; bv[d++] = sym_to_voigt(B);
                            }
                            for (int a = 0; a < 2; ++a) {
                                const double tf = a ? tau : 1.0 - tau;
                                for (int vl = 0; vl < 3; ++vl)
                                    for (int c = 0; c < 3; ++c) {
                                        B.setZero();
                                        B(c, 1) = tf * grads[vl].x();
                                        B(c, 2) = tf * grads[vl].y();
                                        bv[d++] = sym_to_voigt(B);
                                    }
                            }
                            break;
                        }
                        case Regime::Infinite: {
                            for (int a = 0; a < 2; ++a) {
                                const double dd = (a ? 1.0 : -1.0) / delta;
                                for (int vl = 0; vl < 3; ++vl)
                                    for (int c = 0; c < 3; ++c) {
                                        B.setZero();
                                        B(c, 0) = dd * kPhi[qpt][vl];
                                        bv[d++] = sym_to_voigt(B);
                                    }
                            }
                            for (int vl = 0; vl < 3; ++vl)
                                for (int c = 0; c < 3; ++c) {
                                    B.setZero();
                                    B(c, 1) = grads[vl].x();
                                    B(c, 2) = grads[vl].y();
                                    bv[d++] = sym_to_voigt(B);
                                }
                            break;
                        }
                        }

                        std::array<Vector6, 4> mt;
                        for (int k = 0; k < 4; ++k) {
                            const Vector6 mv = sym_to_voigt(iota(macro_strain_field(units[k], xp)));
                            mt[k] = M * mv;
                            for (int j = 0; j <= k; ++j) {
                                const Vector6 mvj = sym_to_voigt(iota(macro_strain_field(units[j], xp)));
                                const double val = w * mvj.dot(mt[k]);
                                macro_gram_(j, k) += val;
                                if (j != k) macro_gram_(k, j) += val;
                            }
                        }
                        for (int e = 0; e < nd; ++e) {
                            const Vector6 te = M * bv[e];
                            for (int f = 0; f <= e; ++f)
                                k_loc(f, e) += w * bv[f].dot(te);
                            for (int k = 0; k < 4; ++k)
                                g_loc(e, k) += w * bv[e].dot(mt[k]);
                        }
                    }
                }
            }

            for (int e = 0; e < nd; ++e) {
                for (int f = 0; f < e; ++f) {
                    trips.emplace_back(ids[f], ids[e], k_loc(f, e));
                    trips.emplace_back(ids[e], ids[f], k_loc(f, e));
                }
                trips.emplace_back(ids[e], ids[e], k_loc(e, e));
                for (int k = 0; k < 4; ++k)
                    unit_rhs_[k][ids[e]] += g_loc(e, k);
            }
        }
    }

    K_.resize(total_dofs_, total_dofs_);
    K_.setFromTriplets(trips.begin(), trips.end());
    K_.makeCompressed();

    // Gauge constraints. Group supports are disjoint by construction.
    std::vector<double> wv(lay.V, 0.0), m2v(lay.V, 0.0), m3v(lay.V, 0.0);
    for (int tri = 0; tri < n_tri; ++tri) {
        const auto& t = cs_.triangles[tri];
        const auto quad = triangle_quadrature(cs_, tri);
        const double area = 3.0 * quad.weight;
        for (int vl = 0; vl < 3; ++vl) {
            wv[t[vl]] += area / 3.0;
            // int_T phi_i x = |T|/12 (2 x_i + x_j + x_k)
            const Vector2& pi = cs_.vertices[t[vl]];
            const Vector2& pj = cs_.vertices[t[(vl + 1) % 3]];
            const Vector2& pk = cs_.vertices[t[(vl + 2) % 3]];
            m2v[t[vl]] += area / 12.0 * (2.0 * pi.x() + pj.x() + pk.x());
            m3v[t[vl]] += area / 12.0 * (2.0 * pi.y() + pj.y() + pk.y());
        }
    }

    using SparseVec = detail::GaugeProjector::SparseVec;
    auto mean_vec = [&](auto&& dof_of, int comp, bool all_nodes) {
        SparseVec v;
        const int nodes = all_nodes ? N : 1;
        for (int i = 0; i < nodes; ++i)
            for (int vert = 0; vert < lay.V; ++vert) {
                v.first.push_back(dof_of(i, vert, comp));
                v.second.push_back(wv[vert]);
            }
        return v;
    };
    auto twist_vec = [&](auto&& dof_of, bool all_nodes) {
        // int (x2 theta_3 - x3 theta_2)
        SparseVec v;
        const int nodes = all_nodes ? N : 1;
        for (int i = 0; i < nodes; ++i)
            for (int vert = 0; vert < lay.V; ++vert) {
                v.first.push_back(dof_of(i, vert, 1));
                v.second.push_back(-m3v[vert]);
                v.first.push_back(dof_of(i, vert, 2));
                v.second.push_back(m2v[vert]);
            }
        std::vector<size_t> order(v.first.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v.first[a] < v.first[b]; });
        SparseVec sorted;
        for (size_t k : order) {
            sorted.first.push_back(v.first[k]);
            sorted.second.push_back(v.second[k]);
        }
        return sorted;
    };

    switch (regime_.regime) {
    case Regime::Finite: {
        // Kernel of the strain map: global constants and the global in-plane
        // rotation. Per-node constraints would cut off the mean axial and
        // twist-rate relaxation modes, so the gauge here is global.
        auto dof = [&](int i, int vert, int c) { return lay.theta1(i, vert, c); };
        std::vector<SparseVec> group;
        for (int c = 0; c < 3; ++c) group.push_back(mean_vec(dof, c, true));
        group.push_back(twist_vec(dof, true));
        projector_.add_group(std::move(group));
        if (lay.aug_skew)
            for (int w = 0; w < 3; ++w) {
                SparseVec v;
                for (int i = 0; i < N; ++i) {
                    v.first.push_back(lay.aug_psi(i, w));
                    v.second.push_back(1.0);
                }
                projector_.add_group({v});
            }
        break;
    }
    case Regime::Zero: {
        // theta2 carries the full per-node mean/twist constraints; adding
        // node constants or in-plane rotations to theta2 is strain-free.
        for (int i = 0; i < N; ++i) {
            auto dof = [&](int, int vert, int c) { return lay.gz_theta2(i, vert, c); };
            std::vector<SparseVec> group;
            for (int c = 0; c < 3; ++c) group.push_back(mean_vec(dof, c, false));
            group.push_back(twist_vec(dof, false));
            projector_.add_group(std::move(group));
        }
        // Node-level fields are defined up to global constants.
        for (int w = 0; w < 4; ++w) {
            SparseVec v;
            for (int i = 0; i < N; ++i) {
                v.first.push_back(lay.gz_node(i, w));
                v.second.push_back(1.0);
            }
            projector_.add_group({v});
        }
        break;
    }
    case Regime::Infinite: {
        // theta1 enters through its axial derivative only: pin its axial
        // mean per vertex and component.
        for (int vert = 0; vert < lay.V; ++vert)
            for (int c = 0; c < 3; ++c) {
                SparseVec v;
                for (int i = 0; i < N; ++i) {
                    v.first.push_back(lay.theta1(i, vert, c));
                    v.second.push_back(1.0);
                }
                projector_.add_group({v});
            }
        auto dof = [&](int, int vert, int c) { return lay.gi_theta2(vert, c); };
        std::vector<SparseVec> group;
        for (int c = 0; c < 3; ++c) group.push_back(mean_vec(dof, c, false));
        group.push_back(twist_vec(dof, false));
        projector_.add_group(std::move(group));
        break;
    }
    }
}

Eigen::VectorXd CellProblem::macro_rhs(const MacroStrain& ms) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(total_dofs_);
    const Eigen::Vector4d coeffs(ms.rho, ms.kappa(0), ms.kappa(1), ms.kappa(2));
    for (int k = 0; k < 4; ++k)
        if (coeffs[k] != 0.0) g += coeffs[k] * unit_rhs_[k];
    return g;
}

double CellProblem::macro_constant(const MacroStrain& ms) const {
    const Eigen::Vector4d coeffs(ms.rho, ms.kappa(0), ms.kappa(1), ms.kappa(2));
    return 0.5 * coeffs.dot(macro_gram_ * coeffs);
}

CorrectorField CellProblem::solve_corrector(const MacroStrain& ms,
                                            detail::PcgResult* info) const {
    Eigen::VectorXd rhs = -macro_rhs(ms);
    Eigen::VectorXd x;
    const auto res = detail::pcg_solve(K_, rhs, projector_, x);
    if (info) *info = res;
    if (!res.converged)
        throw std::runtime_error("cell solver did not converge (rel residual "
                                 + std::to_string(res.rel_residual) + ")");
    CorrectorField out;
    out.regime = regime_;
    out.n_axial = regime_.axial_nodes;
    out.n_vertices = (int)cs_.vertices.size();
    out.dofs = std::move(x);
    return out;
}

double CellProblem::cell_energy(const CorrectorField& corr, const MacroStrain& ms) const {
    check_field(corr);
    if (corr.regime.regime != regime_.regime || corr.n_axial != regime_.axial_nodes
        || corr.n_vertices != (int)cs_.vertices.size())
        throw std::invalid_argument("cell_energy: corrector does not match this problem");
    const Eigen::VectorXd g = macro_rhs(ms);
    return macro_constant(ms) + g.dot(corr.dofs) + 0.5 * corr.dofs.dot(K_ * corr.dofs);
}

EffectiveForm CellProblem::effective_form(CellReport* report,
                                          std::array<CorrectorField, 4>* correctors,
                                          int threads) const {
    std::array<MacroStrain, 4> units;
    units[0].rho = 1.0;
    for (int k = 0; k < 3; ++k) units[k + 1].kappa(k) = 1.0;

    std::array<CorrectorField, 4> sol;
    std::array<detail::PcgResult, 4> info;
    if (threads > 1) {
        std::array<std::future<std::pair<CorrectorField, detail::PcgResult>>, 4> futs;
        for (int k = 0; k < 4; ++k)
            futs[k] = std::async(std::launch::async, [this, &units, k]() {
                detail::PcgResult r;
                CorrectorField f = solve_corrector(units[k], &r);
                return std::make_pair(std::move(f), r);
            });
        for (int k = 0; k < 4; ++k) {
            auto pr = futs[k].get();
            sol[k] = std::move(pr.first);
            info[k] = pr.second;
        }
    } else {
        for (int k = 0; k < 4; ++k)
            sol[k] = solve_corrector(units[k], &info[k]);
    }

    // a0[j][k] is the energy bilinear form on (macro_j + corrector_j,
    // macro_k + corrector_k): macro Gram + cross terms + corrector part.
    Eigen::Matrix4d a0 = macro_gram_;
    std::array<Eigen::VectorXd, 4> ktheta;
    for (int k = 0; k < 4; ++k) ktheta[k] = K_ * sol[k].dofs;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
            a0(j, k) += unit_rhs_[j].dot(sol[k].dofs) + unit_rhs_[k].dot(sol[j].dofs)
                      + sol[j].dofs.dot(ktheta[k]);
    a0 = 0.5 * (a0 + a0.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(a0);
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
        throw std::runtime_error("effective_form: assembled a0 is not positive definite");

    if (report) {
        for (int k = 0; k < 4; ++k) {
            report->residuals[k] = info[k].rel_residual;
            report->iterations[k] = info[k].iterations;
        }
        report->dof_count = total_dofs_;
        report->constraint_count = projector_.count();
    }
    if (correctors) *correctors = std::move(sol);

    return effective_form_from_a0(a0);
}

CorrectorField solve_corrector(const RegimeSpec& regime, const CrossSection& cs,
                               const MicrostructureRealization& micro, const MacroStrain& ms) {
    return CellProblem(regime, cs, micro).solve_corrector(ms);
}

EffectiveForm effective_form(const RegimeSpec& regime, const CrossSection& cs,
                             const MicrostructureRealization& micro,
                             CellReport* report, int threads) {
    return CellProblem(regime, cs, micro).effective_form(report, nullptr, threads);
}

double cell_energy(const CorrectorField& corr, const RegimeSpec& regime,
                   const CrossSection& cs, const MicrostructureRealization& micro,
                   const MacroStrain& ms) {
    return CellProblem(regime, cs, micro).cell_energy(corr, ms);
}

} // namespace vkrod
