#pragma once

/// Perturbation-of-identity machinery: per-edge quartic wall bumps with a C^2
/// interior decay, and mesh deformation x -> x + t V(x) with V always
/// evaluated on the reference configuration.

#include "nsshape/mesh.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace nsshape {

/// B(xi) = 16 xi^2 (1-xi)^2: unit-height bump, zero value and slope at both ends.
inline double quartic_bump_profile(double xi) {
    const double a = xi * (1.0 - xi);
    return 16.0 * a * a;
}

/// C^2 step: 0 -> 1 over [0,1] with zero first and second derivatives at ends.
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

struct WallFootprint {
    int edge = -1;
    double xi = 0.0;
    double distance = std::numeric_limits<double>::max();
    Vec2 closest = Vec2::Zero();
    Vec2 normal = Vec2::Zero();
};

/// Closest-point projection onto the wall loop of a fixed reference mesh.
class WallProjection {
  public:
    explicit WallProjection(const CurvilinearMesh& mesh) : mesh_(&mesh) {
        if (mesh.n_wall_edges == 0) throw GeometryError("mesh has no wall edges");
        ref_nodes_ = mesh.nodes;
    }

    const CurvilinearMesh& mesh() const { return *mesh_; }
    const std::vector<Vec2>& reference_nodes() const { return ref_nodes_; }
    int n_wall_edges() const { return mesh_->n_wall_edges; }

    WallFootprint project(const Vec2& x) const {
        WallFootprint best;
        for (int e = 0; e < mesh_->n_wall_edges; ++e) {
            // coarse scan then Newton on d/dxi |x - X(xi)|^2
            double xi_best = 0.0;
            double d2_best = std::numeric_limits<double>::max();
            constexpr int kScan = 9;
            for (int i = 0; i <= kScan; ++i) {
                const double xi = static_cast<double>(i) / kScan;
                Vec2 X, dX;
                edge_curve(e, xi, X, dX);
                const double d2 = (x - X).squaredNorm();
                if (d2 < d2_best) {
                    d2_best = d2;
                    xi_best = xi;
                }
            }
            double xi = xi_best;
            for (int it = 0; it < 30; ++it) {
                Vec2 X, dX, ddX;
                edge_curve(e, xi, X, dX, &ddX);
                const Vec2 r = x - X;
                const double g = -r.dot(dX);
                const double h = dX.dot(dX) - r.dot(ddX);
                if (std::abs(h) < 1e-30) break;
                double step = -g / h;
                step = std::clamp(step, -0.25, 0.25);
                xi = std::clamp(xi + step, 0.0, 1.0);
                if (std::abs(step) < 1e-14) break;
            }
            Vec2 X, dX;
            edge_curve(e, xi, X, dX);
            const double d2 = (x - X).squaredNorm();
            if (d2 < best.distance * best.distance) {
                best.edge = e;
                best.xi = xi;
                best.distance = std::sqrt(d2);
                best.closest = X;
            }
        }
        best.normal = mesh_->frame(best.edge, best.xi).n;
        return best;
    }

  private:
    /// Edge curve with derivatives w.r.t. the [0,1] edge parameter.
    void edge_curve(int e, double xi, Vec2& X, Vec2& dX, Vec2* ddX = nullptr) const {
        const auto& be = mesh_->boundary_edges[e];
        mesh_->face_curve(be.elem, be.face, 2.0 * xi - 1.0, &X, &dX, ddX);
        dX *= 2.0;
        if (ddX) *ddX *= 4.0;
    }

    const CurvilinearMesh* mesh_;
    std::vector<Vec2> ref_nodes_;
};

/// Boundary vector field V with V.n = amplitude B(xi) on one wall edge and a
/// C^2 radial decay into the domain; V = 0 beyond support_radius.
class PerturbationField {
  public:
    enum class Kind { QUARTIC_BUMP, UNIFORM_NORMAL };

    PerturbationField(std::shared_ptr<const WallProjection> proj, int edge, double amplitude,
                      double support_radius, Kind kind = Kind::QUARTIC_BUMP)
        : proj_(std::move(proj)), edge_(edge), amplitude_(amplitude),
          support_radius_(support_radius), kind_(kind) {
        if (kind_ == Kind::QUARTIC_BUMP && (edge < 0 || edge >= proj_->n_wall_edges()))
            throw GeometryError("quartic bump requires a wall edge, got edge " +
                                std::to_string(edge));
    }

    int edge() const { return edge_; }
    double amplitude() const { return amplitude_; }
    double support_radius() const { return support_radius_; }
    const WallProjection& projection() const { return *proj_; }

    /// V.n on the wall: amplitude B(xi) on the bump edge, 0 elsewhere.
    double wall_normal_value(int edge_id, double xi) const {
        if (kind_ == Kind::UNIFORM_NORMAL) return amplitude_;
        if (edge_id != edge_) return 0.0;
        return amplitude_ * quartic_bump_profile(xi);
    }

    /// Interior extension at an arbitrary point of the reference domain.
    Vec2 evaluate(const Vec2& x) const {
        const WallFootprint fp = proj_->project(x);
        if (fp.distance >= support_radius_) return Vec2::Zero();
        const double vn = wall_normal_value(fp.edge, fp.xi);
        if (vn == 0.0) return Vec2::Zero();
        const double decay = 1.0 - smoothstep5(fp.distance / support_radius_);
        return (vn * decay) * fp.normal;
    }

    /// V at a reference mesh node (deformations must use these, never the
    /// already-deformed coordinates).
    Vec2 at_reference_node(int node_id) const { return evaluate(proj_->reference_nodes()[node_id]); }

  private:
    std::shared_ptr<const WallProjection> proj_;
    int edge_;
    double amplitude_;
    double support_radius_;
    Kind kind_;
};

inline PerturbationField quartic_bump(std::shared_ptr<const WallProjection> proj, int edge_id,
                                      double amplitude, double support_radius = 2.0) {
    return PerturbationField(std::move(proj), edge_id, amplitude, support_radius);
}

/// V.n = amplitude on the whole wall (uniform inflation; test geometries).
inline PerturbationField uniform_normal_field(std::shared_ptr<const WallProjection> proj,
                                              double amplitude, double support_radius) {
    return PerturbationField(std::move(proj), -1, amplitude, support_radius,
                             PerturbationField::Kind::UNIFORM_NORMAL);
}

/// x -> x + t V(x) applied to all geometry nodes. V is evaluated on the
/// reference configuration stored in the field, so deforming by +t then -t
/// restores the input mesh exactly up to round-off.
inline CurvilinearMesh deform_mesh(const CurvilinearMesh& mesh, const PerturbationField& V,
                                   double t) {
    if (mesh.nodes.size() != V.projection().reference_nodes().size())
        throw GeometryError("perturbation field belongs to a different mesh");
    CurvilinearMesh out = mesh;
    if (t == 0.0) return out;
    for (size_t i = 0; i < out.nodes.size(); ++i)
        out.nodes[i] += t * V.at_reference_node(static_cast<int>(i));
    try {
        out.check_positive_jacobians(mesh.degree + 3);
    } catch (const GeometryError&) {
        // bisect for the largest admissible step to report
        double lo = 0.0, hi = std::abs(t);
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            CurvilinearMesh trial = mesh;
            const double tt = t >= 0.0 ? mid : -mid;
            for (size_t i = 0; i < trial.nodes.size(); ++i)
                trial.nodes[i] += tt * V.at_reference_node(static_cast<int>(i));
            try {
                trial.check_positive_jacobians(mesh.degree + 3);
                lo = mid;
            } catch (const GeometryError&) {
                hi = mid;
            }
        }
        throw GeometryError("mesh deformation inverts an element at t = " + std::to_string(t) +
                            "; max admissible |t| is about " + std::to_string(lo));
    }
    return out;
}

} // namespace nsshape
