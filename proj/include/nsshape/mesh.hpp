#pragma once

/// Curvilinear quadrilateral meshes with polynomial element mappings of
/// degree q, boundary frames (normal, tangent, curvature, arc measure) and
/// the structured generators used by the workbench: a NACA O-mesh, a
/// butterfly disk mesh and a Cartesian rectangle.
///
/// Orientation conventions (used by every downstream module):
///  - element mappings are positively oriented (det J > 0),
///  - faces 0..3 = bottom/right/top/left of [-1,1]^2, each traversed
///    counterclockwise with parameter sigma in [-1,1],
///  - the outward normal is the tangent rotated by -90 degrees; on a wall
///    this points out of the fluid, i.e. into the body,
///  - K = div_Gamma n computed with that normal (unit circle, outward n: K=1).

#include "nsshape/basis.hpp"
#include "nsshape/common.hpp"
#include "nsshape/naca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nsshape {

enum class BoundaryTag { WALL_ADIA, WALL_ISO, FARFIELD };

inline const char* to_string(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::WALL_ADIA: return "WALL_ADIA";
        case BoundaryTag::WALL_ISO: return "WALL_ISO";
        case BoundaryTag::FARFIELD: return "FARFIELD";
    }
    return "?";
}

inline bool is_wall(BoundaryTag t) { return t != BoundaryTag::FARFIELD; }

struct BoundaryEdge {
    int elem;
    int face;
    BoundaryTag tag;
};

struct InteriorFace {
    int elem_l, face_l;
    int elem_r, face_r;
};

struct SurfaceFrame {
    Vec2 point;
    Vec2 n; ///< unit outward normal (out of the fluid domain)
    Vec2 t; ///< unit tangent along increasing edge parameter
    double K;       ///< additive curvature div_Gamma n
    double ds_dxi;  ///< arc measure per unit of the [0,1] edge parameter
};

class CurvilinearMesh {
  public:
    int degree = 1;
    std::vector<Vec2> nodes;
    std::vector<std::vector<int>> elem_nodes; ///< (q+1)^2 ids, lexicographic, xi1 fastest
    std::vector<InteriorFace> interior_faces;
    std::vector<BoundaryEdge> boundary_edges; ///< wall edges first, in loop order
    int n_wall_edges = 0;

    int n_elements() const { return static_cast<int>(elem_nodes.size()); }
    int nodes_per_elem() const { return (degree + 1) * (degree + 1); }

    const Lagrange1D& lagrange() const {
        if (!lag_) lag_ = std::make_shared<Lagrange1D>(Lagrange1D::uniform(degree));
        return *lag_;
    }

    Vec2 map_point(int elem, const Vec2& xi) const {
        const int n1 = degree + 1;
        std::vector<double> la(n1), lb(n1);
        lagrange().eval(xi[0], la.data());
        lagrange().eval(xi[1], lb.data());
        Vec2 x = Vec2::Zero();
        const auto& en = elem_nodes[elem];
        for (int b = 0; b < n1; ++b)
            for (int a = 0; a < n1; ++a)
                x += la[a] * lb[b] * nodes[en[b * n1 + a]];
        return x;
    }

    /// Mapping derivatives: J(c,i) = d x_c / d xi_i; optionally second
    /// derivatives d2[c](i,j) = d^2 x_c / (d xi_i d xi_j).
    void map_derivatives(int elem, const Vec2& xi, Vec2* x, Mat2* J,
                         std::array<Mat2, 2>* d2 = nullptr) const {
        const int n1 = degree + 1;
        std::vector<double> la(n1), lb(n1), da(n1), db(n1), dda(n1), ddb(n1);
        lagrange().eval(xi[0], la.data(), da.data(), d2 ? dda.data() : nullptr);
        lagrange().eval(xi[1], lb.data(), db.data(), d2 ? ddb.data() : nullptr);
        if (x) *x = Vec2::Zero();
        if (J) J->setZero();
        if (d2) {
            (*d2)[0].setZero();
            (*d2)[1].setZero();
        }
        const auto& en = elem_nodes[elem];
        for (int b = 0; b < n1; ++b)
            for (int a = 0; a < n1; ++a) {
                const Vec2& X = nodes[en[b * n1 + a]];
                if (x) *x += la[a] * lb[b] * X;
                if (J) {
                    J->col(0) += da[a] * lb[b] * X;
                    J->col(1) += la[a] * db[b] * X;
                }
                if (d2)
                    for (int c = 0; c < 2; ++c) {
                        (*d2)[c](0, 0) += dda[a] * lb[b] * X[c];
                        (*d2)[c](0, 1) += da[a] * db[b] * X[c];
                        (*d2)[c](1, 0) += da[a] * db[b] * X[c];
                        (*d2)[c](1, 1) += la[a] * ddb[b] * X[c];
                    }
            }
    }

    /// Reference coordinates of face point; sigma in [-1,1], faces CCW.
    static Vec2 face_xi(int face, double sigma) {
        switch (face) {
            case 0: return Vec2(sigma, -1.0);
            case 1: return Vec2(1.0, sigma);
            case 2: return Vec2(-sigma, 1.0);
            default: return Vec2(-1.0, -sigma);
        }
    }

    static Vec2 face_dxi(int face) {
        switch (face) {
            case 0: return Vec2(1.0, 0.0);
            case 1: return Vec2(0.0, 1.0);
            case 2: return Vec2(-1.0, 0.0);
            default: return Vec2(0.0, -1.0);
        }
    }

    /// Physical curve along a face: position and derivatives w.r.t. sigma.
    void face_curve(int elem, int face, double sigma, Vec2* x, Vec2* dx,
                    Vec2* ddx = nullptr) const {
        const Vec2 xi = face_xi(face, sigma);
        const Vec2 dxi = face_dxi(face);
        Mat2 J;
        std::array<Mat2, 2> d2;
        map_derivatives(elem, xi, x, &J, ddx ? &d2 : nullptr);
        if (dx) *dx = J * dxi;
        if (ddx)
            for (int c = 0; c < 2; ++c) (*ddx)[c] = dxi.dot(d2[c] * dxi);
    }

    SurfaceFrame frame(int boundary_edge_id, double xi01) const {
        const BoundaryEdge& be = boundary_edges[boundary_edge_id];
        const double sigma = 2.0 * xi01 - 1.0;
        Vec2 x, dx, ddx;
        face_curve(be.elem, be.face, sigma, &x, &dx, &ddx);
        const double nrm = dx.norm();
        if (nrm < 1e-14)
            throw GeometryError("degenerate boundary edge " + std::to_string(boundary_edge_id));
        SurfaceFrame f;
        f.point = x;
        f.t = dx / nrm;
        f.n = Vec2(f.t[1], -f.t[0]);
        f.K = (dx[0] * ddx[1] - dx[1] * ddx[0]) / (nrm * nrm * nrm);
        f.ds_dxi = 2.0 * nrm; // d sigma / d xi01 = 2
        return f;
    }

    double edge_length(int boundary_edge_id, int n_quad = 8) const {
        const QuadRule1D rule = gauss_legendre(n_quad);
        double len = 0.0;
        const BoundaryEdge& be = boundary_edges[boundary_edge_id];
        for (int q = 0; q < rule.size(); ++q) {
            Vec2 x, dx;
            face_curve(be.elem, be.face, rule.x[q], &x, &dx);
            len += rule.w[q] * dx.norm();
        }
        return len;
    }

    /// Scan det J over a tensor sample grid; throws naming the first bad element.
    void check_positive_jacobians(int n_sample = 8) const {
        const QuadRule1D rule = gauss_legendre(n_sample);
        std::vector<double> pts = rule.x;
        pts.push_back(-1.0);
        pts.push_back(1.0);
        for (int e = 0; e < n_elements(); ++e)
            for (double x1 : pts)
                for (double x2 : pts) {
                    Mat2 J;
                    map_derivatives(e, Vec2(x1, x2), nullptr, &J);
                    if (!(J.determinant() > 0.0))
                        throw GeometryError("inverted element " + std::to_string(e) +
                                            " (det J = " + std::to_string(J.determinant()) +
                                            " at xi = (" + std::to_string(x1) + ", " +
                                            std::to_string(x2) + "))");
                }
    }

  private:
    mutable std::shared_ptr<Lagrange1D> lag_;
};

/// Assembles a watertight mesh from per-element node coordinates, deduping
/// shared nodes and pairing interior faces by their corner nodes.
class MeshBuilder {
  public:
    explicit MeshBuilder(int degree) : degree_(degree) {
        if (degree < 1) throw ConfigError("geometric degree must be >= 1");
    }

    int add_element(const std::vector<Vec2>& coords) {
        const int n1 = degree_ + 1;
        if (static_cast<int>(coords.size()) != n1 * n1)
            throw ConfigError("element needs (q+1)^2 geometry nodes");
        std::vector<int> ids(coords.size());
        for (size_t i = 0; i < coords.size(); ++i) ids[i] = node_id(coords[i]);
        elem_nodes_.push_back(std::move(ids));
        return static_cast<int>(elem_nodes_.size()) - 1;
    }

    void tag_boundary(int elem, int face, BoundaryTag tag, bool wall_loop_member = false) {
        if (wall_loop_member)
            wall_loop_.push_back({elem, face, tag});
        else
            other_boundary_.push_back({elem, face, tag});
    }

    CurvilinearMesh finalize() {
        CurvilinearMesh mesh;
        mesh.degree = degree_;
        mesh.nodes = std::move(nodes_);
        mesh.elem_nodes = std::move(elem_nodes_);
        mesh.n_wall_edges = static_cast<int>(wall_loop_.size());
        mesh.boundary_edges = wall_loop_;
        mesh.boundary_edges.insert(mesh.boundary_edges.end(), other_boundary_.begin(),
                                   other_boundary_.end());
        rebuild_interior_faces(mesh);
        return mesh;
    }

    /// Recompute the interior face list by pairing faces on shared corner
    /// nodes; every unpaired face must already be a tagged boundary edge.
    static void rebuild_interior_faces(CurvilinearMesh& mesh) {
        mesh.interior_faces.clear();
        std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> by_corners;
        const int q = mesh.degree;
        const int n1 = q + 1;
        auto corner_ids = [&](int elem, int face) {
            const auto& en = mesh.elem_nodes[elem];
            int c0 = 0, c1 = 0;
            switch (face) {
                case 0: c0 = en[0]; c1 = en[q]; break;
                case 1: c0 = en[q]; c1 = en[n1 * n1 - 1]; break;
                case 2: c0 = en[n1 * n1 - 1]; c1 = en[q * n1]; break;
                default: c0 = en[q * n1]; c1 = en[0]; break;
            }
            return std::make_pair(std::min(c0, c1), std::max(c0, c1));
        };
        for (int e = 0; e < mesh.n_elements(); ++e)
            for (int f = 0; f < 4; ++f)
                by_corners[corner_ids(e, f)].push_back({e, f});

        std::map<std::pair<int, int>, int> boundary_seen;
        for (size_t i = 0; i < mesh.boundary_edges.size(); ++i)
            boundary_seen[{mesh.boundary_edges[i].elem, mesh.boundary_edges[i].face}] = 1;

        for (auto& [key, faces] : by_corners) {
            if (faces.size() == 2) {
                mesh.interior_faces.push_back(
                    {faces[0].first, faces[0].second, faces[1].first, faces[1].second});
            } else if (faces.size() == 1) {
                if (!boundary_seen.count(faces[0]))
                    throw GeometryError("untagged boundary face on element " +
                                        std::to_string(faces[0].first));
            } else {
                throw GeometryError("face shared by more than two elements");
            }
        }
    }

  private:
    int node_id(const Vec2& x) {
        const auto key = std::make_pair(static_cast<std::int64_t>(std::llround(x[0] * 1e12)),
                                        static_cast<std::int64_t>(std::llround(x[1] * 1e12)));
        auto it = registry_.find(key);
        if (it != registry_.end()) return it->second;
        nodes_.push_back(x);
        const int id = static_cast<int>(nodes_.size()) - 1;
        registry_.emplace(key, id);
        return id;
    }

    int degree_;
    std::vector<Vec2> nodes_;
    std::vector<std::vector<int>> elem_nodes_;
    std::map<std::pair<std::int64_t, std::int64_t>, int> registry_;
    std::vector<BoundaryEdge> wall_loop_;
    std::vector<BoundaryEdge> other_boundary_;
};

struct GradingParams {
    double radial_stretch = 6.0;   ///< exponential clustering toward the wall
    double wall_clustering = 0.72; ///< arc-length clustering toward LE/TE, in [0,0.95]
};

/// Structured O-mesh around a NACA airfoil. The wall loop runs trailing
/// edge -> lower surface -> leading edge -> upper surface (clockwise around
/// the body), which makes every element mapping positively oriented with
/// xi2 pointing from the wall to the far field.
inline CurvilinearMesh generate_naca_omesh(const AirfoilGeometry& airfoil, int n_wall_edges,
                                           int n_radial, double farfield_radius, int degree,
                                           const GradingParams& grading = {}) {
    if (n_wall_edges < 8) throw ConfigError("n_wall_edges must be >= 8");
    if (degree < 1 || degree > 4) throw ConfigError("geometric degree must be in [1,4]");
    if (farfield_radius < 10.0 * airfoil.chord)
        throw ConfigError("farfield_radius must be at least 10 chords");

    const int q = degree;
    const int Ns = n_wall_edges * q;
    const int Nr = n_radial * q + 1;
    const Vec2 center(0.5 * airfoil.chord, 0.0);

    // wall nodes placed by arc length (TE -> lower -> LE -> upper) with a
    // clustering density bounded away from zero; the raw cosine parameter has
    // zero speed at the trailing edge and would degenerate the mapping there
    const double c = std::clamp(grading.wall_clustering, 0.0, 0.95);
    const int M = 1 << 14;
    std::vector<double> phi_tab(M + 1), arc_tab(M + 1);
    phi_tab[0] = 2.0 * kPi;
    arc_tab[0] = 0.0;
    Vec2 prev = airfoil.surface_point(phi_tab[0]);
    for (int k = 1; k <= M; ++k) {
        phi_tab[k] = 2.0 * kPi * (1.0 - static_cast<double>(k) / M);
        const Vec2 p = airfoil.surface_point(phi_tab[k]);
        arc_tab[k] = arc_tab[k - 1] + (p - prev).norm();
        prev = p;
    }
    const double total_arc = arc_tab[M];

    // far-field circle angle follows the wall arc fraction, so the radial
    // rays fan out monotonically (projecting through a fixed center fails
    // for thin profiles)
    std::vector<Vec2> surf(Ns), circ(Ns);
    int seek = 0;
    for (int i = 0; i < Ns; ++i) {
        const double t = static_cast<double>(i) / Ns;
        const double frac = t - c / (4.0 * kPi) * std::sin(4.0 * kPi * t);
        const double a = frac * total_arc;
        while (seek < M - 1 && arc_tab[seek + 1] < a) ++seek;
        const double f = (a - arc_tab[seek]) / (arc_tab[seek + 1] - arc_tab[seek]);
        const double phi = phi_tab[seek] + f * (phi_tab[seek + 1] - phi_tab[seek]);
        surf[i] = airfoil.surface_point(phi);
        const double theta = -2.0 * kPi * frac;
        circ[i] = center + farfield_radius * Vec2(std::cos(theta), std::sin(theta));
    }

    // Exponential grading between element layers; linear within an element so
    // the radial interpolant stays monotone for any stretch factor.
    const double beta = grading.radial_stretch;
    auto stretch = [beta](double r) {
        return beta > 0.0 ? (std::exp(beta * r) - 1.0) / (std::exp(beta) - 1.0) : r;
    };
    std::vector<double> w(Nr);
    for (int l = 0; l <= n_radial; ++l) {
        const double w_lo = stretch(static_cast<double>(l) / n_radial);
        if (l == n_radial) {
            w[Nr - 1] = w_lo;
            break;
        }
        const double w_hi = stretch(static_cast<double>(l + 1) / n_radial);
        for (int b = 0; b < q; ++b)
            w[l * q + b] = w_lo + (w_hi - w_lo) * b / q;
    }

    auto point = [&](int i, int j) {
        const int iw = i % Ns;
        return (surf[iw] + w[j] * (circ[iw] - surf[iw])).eval();
    };

    MeshBuilder builder(q);
    const int n1 = q + 1;
    for (int l = 0; l < n_radial; ++l)
        for (int k = 0; k < n_wall_edges; ++k) {
            std::vector<Vec2> coords(n1 * n1);
            for (int b = 0; b < n1; ++b)
                for (int a = 0; a < n1; ++a)
                    coords[b * n1 + a] = point(k * q + a, l * q + b);
            const int e = builder.add_element(coords);
            if (l == 0) builder.tag_boundary(e, 0, BoundaryTag::WALL_ADIA, true);
            if (l == n_radial - 1) builder.tag_boundary(e, 2, BoundaryTag::FARFIELD);
        }
    CurvilinearMesh mesh = builder.finalize();
    mesh.check_positive_jacobians(q + 3);
    return mesh;
}

/// Butterfly mesh of a disk: an m x m core square and four transfinite
/// blocks out to the circle. The circle edges form the wall loop; requires
/// n_boundary_edges divisible by 4.
inline CurvilinearMesh generate_disk_mesh(int n_boundary_edges, int n_radial, double radius,
                                          int degree, BoundaryTag tag = BoundaryTag::WALL_ADIA) {
    if (n_boundary_edges < 8 || n_boundary_edges % 4 != 0)
        throw ConfigError("n_boundary_edges must be >= 8 and divisible by 4");
    const int q = degree;
    const int n1 = q + 1;
    const int m = n_boundary_edges / 4;
    const double a = 0.5 * radius;

    MeshBuilder builder(q);

    // core square
    for (int l = 0; l < m; ++l)
        for (int k = 0; k < m; ++k) {
            std::vector<Vec2> coords(n1 * n1);
            for (int b = 0; b < n1; ++b)
                for (int a2 = 0; a2 < n1; ++a2) {
                    const double x = -a + 2.0 * a * (k * q + a2) / (m * q);
                    const double y = -a + 2.0 * a * (l * q + b) / (m * q);
                    coords[b * n1 + a2] = Vec2(x, y);
                }
            builder.add_element(coords);
        }

    // four ring blocks; element xi1 = radial (outward), xi2 = zeta (CCW)
    struct WallEdgeRef { int elem, face; };
    std::vector<std::vector<WallEdgeRef>> wall_edges_per_block(4);
    for (int B = 0; B < 4; ++B) {
        const double theta0 = B * kPi / 2.0;
        Eigen::Rotation2D<double> rot(theta0);
        auto sq = [&](double zeta) { return (rot * Vec2(a, zeta * a)).eval(); };
        auto arc = [&](double zeta) {
            const double t = theta0 + zeta * kPi / 4.0;
            return (radius * Vec2(std::cos(t), std::sin(t))).eval();
        };
        for (int j = 0; j < m; ++j)
            for (int l = 0; l < n_radial; ++l) {
                std::vector<Vec2> coords(n1 * n1);
                for (int b = 0; b < n1; ++b)
                    for (int a2 = 0; a2 < n1; ++a2) {
                        const double r = static_cast<double>(l * q + a2) / (n_radial * q);
                        const double zeta = -1.0 + 2.0 * (j * q + b) / (m * q);
                        coords[b * n1 + a2] = ((1.0 - r) * sq(zeta) + r * arc(zeta)).eval();
                    }
                const int e = builder.add_element(coords);
                if (l == n_radial - 1) wall_edges_per_block[B].push_back({e, 1});
            }
    }
    for (int B = 0; B < 4; ++B)
        for (const auto& we : wall_edges_per_block[B]) builder.tag_boundary(we.elem, we.face, tag, true);

    CurvilinearMesh mesh = builder.finalize();
    mesh.check_positive_jacobians(q + 3);
    return mesh;
}

/// Cartesian rectangle; boundary tags in the order bottom, right, top, left.
inline CurvilinearMesh generate_rect_mesh(int nx, int ny, const Vec2& lo, const Vec2& hi,
                                          int degree, const std::array<BoundaryTag, 4>& tags) {
    const int q = degree;
    const int n1 = q + 1;
    MeshBuilder builder(q);
    for (int l = 0; l < ny; ++l)
        for (int k = 0; k < nx; ++k) {
            std::vector<Vec2> coords(n1 * n1);
            for (int b = 0; b < n1; ++b)
                for (int a2 = 0; a2 < n1; ++a2) {
                    const double x = lo[0] + (hi[0] - lo[0]) * (k * q + a2) / (nx * q);
                    const double y = lo[1] + (hi[1] - lo[1]) * (l * q + b) / (ny * q);
                    coords[b * n1 + a2] = Vec2(x, y);
                }
            const int e = builder.add_element(coords);
            const bool wall0 = is_wall(tags[0]), wall1 = is_wall(tags[1]);
            const bool wall2 = is_wall(tags[2]), wall3 = is_wall(tags[3]);
            if (l == 0) builder.tag_boundary(e, 0, tags[0], wall0);
            if (k == nx - 1) builder.tag_boundary(e, 1, tags[1], wall1);
            if (l == ny - 1) builder.tag_boundary(e, 2, tags[2], wall2);
            if (k == 0) builder.tag_boundary(e, 3, tags[3], wall3);
        }
    CurvilinearMesh mesh = builder.finalize();
    mesh.check_positive_jacobians(q + 3);
    return mesh;
}

} // namespace nsshape
