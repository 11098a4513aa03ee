#pragma once

/// Lift/drag coefficients J = (1/C_inf) int_{Gamma_W} (p n - tau n) . psi ds
/// evaluated from the interior trace, and the exact linearization J'[u](w)
/// used as the adjoint right-hand side.

#include "nsshape/residual.hpp"

namespace nsshape {

enum class Objective { LIFT, DRAG };

inline const char* to_string(Objective o) { return o == Objective::LIFT ? "lift" : "drag"; }

inline Vec2 force_direction(Objective which, double alpha_deg) {
    const double a = alpha_deg * kPi / 180.0;
    return which == Objective::LIFT ? Vec2(-std::sin(a), std::cos(a))
                                    : Vec2(std::cos(a), std::sin(a));
}

/// C_inf = 1/2 rho_inf |v_inf|^2 chord
inline double reference_force(const GasModel& gas, double mach, double chord = 1.0) {
    const double vinf = mach * std::sqrt(gas.gamma);
    return 0.5 * vinf * vinf * chord;
}

inline double compute_objective(const DGContext& ctx, const DGField& f, Objective which,
                                double alpha_deg, double c_inf) {
    const CurvilinearMesh& mesh = *ctx.mesh;
    const Vec2 psi = force_direction(which, alpha_deg);
    double J = 0.0;
    detail::SideTrace tr;
    for (size_t bi = 0; bi < mesh.boundary_edges.size(); ++bi) {
        const BoundaryEdge& be = mesh.boundary_edges[bi];
        if (!is_wall(be.tag)) continue;
        const auto& pts = ctx.geom->bface[bi];
        detail::face_trace(ctx, f, be.elem, be.face, 0, nullptr, false, pts, tr);
        for (int qp = 0; qp < ctx.space->nq1; ++qp) {
            const auto& pt = pts[qp];
            const double p = pressure(tr.u[qp], ctx.gas);
            const Mat2 tau = viscous_stress(velocity_gradient(tr.u[qp], tr.g[qp]), ctx.gas);
            const Vec2 traction = p * pt.n - tau * pt.n;
            J += pt.dsw * traction.dot(psi);
        }
    }
    return J / c_inf;
}

/// Dual coefficient vector of w -> J'[u](w).
inline Eigen::VectorXd objective_linearization(const DGContext& ctx, const DGField& f,
                                               Objective which, double alpha_deg, double c_inf) {
    const CurvilinearMesh& mesh = *ctx.mesh;
    const DGSpace& sp = *ctx.space;
    const int nb = sp.nb, nq1 = sp.nq1;
    const Vec2 psi = force_direction(which, alpha_deg);
    Eigen::VectorXd dJ = Eigen::VectorXd::Zero(ctx.n_dofs());
    detail::SideTrace tr;
    for (size_t bi = 0; bi < mesh.boundary_edges.size(); ++bi) {
        const BoundaryEdge& be = mesh.boundary_edges[bi];
        if (!is_wall(be.tag)) continue;
        const auto& pts = ctx.geom->bface[bi];
        detail::face_trace(ctx, f, be.elem, be.face, 0, nullptr, false, pts, tr);
        const double* phl = sp.fphi[be.face][0].data();
        for (int qp = 0; qp < nq1; ++qp) {
            const auto& pt = pts[qp];
            const Vec4 dp = pressure_derivative(tr.u[qp], ctx.gas);
            const StressLinearization lin = stress_linearization(tr.u[qp], tr.g[qp], ctx.gas);
            const double npsi = pt.n.dot(psi);
            for (int bs = 0; bs < nb; ++bs) {
                const double ps = phl[bs * nq1 + qp];
                const Vec2 gs = pt.JinvT_l * Vec2(sp.fdphi1[be.face][0][bs * nq1 + qp],
                                                  sp.fdphi2[be.face][0][bs * nq1 + qp]);
                for (int j = 0; j < 4; ++j) {
                    double v = dp[j] * ps * npsi;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            const double dtau = lin.du[a][b][j] * ps +
                                                lin.dgrad[a][b](j, 0) * gs[0] +
                                                lin.dgrad[a][b](j, 1) * gs[1];
                            v -= psi[a] * dtau * pt.n[b];
                        }
                    dJ[(be.elem * nb + bs) * 4 + j] += pt.dsw * v / c_inf;
                }
            }
        }
    }
    return dJ;
}

} // namespace nsshape
