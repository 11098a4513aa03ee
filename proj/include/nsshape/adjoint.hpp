#pragma once

/// Discrete adjoint: (dR/du)^T z = dJ/du solved with the same sparse LU
/// machinery as the Newton steps, plus diagnostics on how well the discrete
/// adjoint fulfills the continuous adjoint wall conditions.

#include "nsshape/objective.hpp"
#include "nsshape/solver.hpp"

#include <sstream>

namespace nsshape {

struct AdjointResult {
    DGField z;
    double linear_residual = 0.0;
};

inline AdjointResult solve_adjoint(const DGContext& ctx, const DGField& flow,
                                   const Eigen::VectorXd& dJdu) {
    SparseMat A = assemble_jacobian(ctx, flow);
    LinearLU lu;
    lu.factorize(A);
    AdjointResult out;
    out.z = DGField(ctx.mesh->n_elements(), ctx.space->nb);
    out.z.coeffs() = lu.solve_transpose(dJdu);
    if (!out.z.coeffs().allFinite())
        throw SolveError("adjoint solve produced non-finite values");
    out.linear_residual = (A.transpose() * out.z.coeffs() - dJdu).norm();
    return out;
}

/// Per-wall-point deviations from the continuous adjoint boundary conditions:
/// z_{2,3} = psi / C_inf on the wall, z_4 = 0 (isothermal), grad z_4 . n = 0
/// (adiabatic). Weak enforcement: these are diagnostics, not assertions.
struct AdjointBCReport {
    struct Sample {
        int edge;
        double s; ///< arc length along the wall loop
        double dev_momentum;
        double dev_energy; ///< |z4| on iso, |grad z4 . n| on adia
    };
    std::vector<Sample> samples;
    double max_momentum = 0.0, mean_momentum = 0.0;
    double max_energy = 0.0, mean_energy = 0.0;

    std::string csv() const {
        std::ostringstream os;
        os << "edge,s,dev_momentum,dev_energy\n";
        for (const auto& s : samples)
            os << s.edge << "," << format_g17(s.s) << "," << format_g17(s.dev_momentum) << ","
               << format_g17(s.dev_energy) << "\n";
        return os.str();
    }
};

inline AdjointBCReport adjoint_bc_report(const DGContext& ctx, const DGField& z, Objective which,
                                         double alpha_deg, double c_inf) {
    const CurvilinearMesh& mesh = *ctx.mesh;
    const DGSpace& sp = *ctx.space;
    const Vec2 psi = force_direction(which, alpha_deg);
    AdjointBCReport rep;
    detail::SideTrace tz;
    double s_offset = 0.0;
    for (int bi = 0; bi < mesh.n_wall_edges; ++bi) {
        const BoundaryEdge& be = mesh.boundary_edges[bi];
        const auto& pts = ctx.geom->bface[bi];
        detail::face_trace(ctx, z, be.elem, be.face, 0, nullptr, false, pts, tz);
        double s_local = 0.0;
        for (int qp = 0; qp < sp.nq1; ++qp) {
            const auto& pt = pts[qp];
            const Vec2 z23(tz.u[qp][1], tz.u[qp][2]);
            const double dev_m = (z23 - psi / c_inf).norm();
            double dev_e;
            if (be.tag == BoundaryTag::WALL_ISO) {
                dev_e = std::abs(tz.u[qp][3]);
            } else {
                const Vec2 gz4(tz.g[qp](3, 0), tz.g[qp](3, 1));
                dev_e = std::abs(gz4.dot(pt.n));
            }
            s_local += 0.5 * pt.dsw; // midpoint-ish arc coordinate
            rep.samples.push_back({bi, s_offset + s_local, dev_m, dev_e});
            s_local += 0.5 * pt.dsw;
            rep.max_momentum = std::max(rep.max_momentum, dev_m);
            rep.max_energy = std::max(rep.max_energy, dev_e);
            rep.mean_momentum += dev_m;
            rep.mean_energy += dev_e;
        }
        s_offset += mesh.edge_length(bi);
    }
    if (!rep.samples.empty()) {
        rep.mean_momentum /= static_cast<double>(rep.samples.size());
        rep.mean_energy /= static_cast<double>(rep.samples.size());
    }
    return rep;
}

} // namespace nsshape
