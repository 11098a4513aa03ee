#pragma once

/// Steady DG discretization of the variational compressible Navier-Stokes
/// problem: local Lax-Friedrichs convective interface flux, BR2 viscous
/// scheme (face-local lifting, penalty eta) with the symmetrizing term that
/// keeps the discretization adjoint consistent, weakly imposed no-slip walls
/// and free-stream far field. Exact analytic Jacobian for Newton and the
/// discrete adjoint.

#include "nsshape/bc.hpp"
#include "nsshape/field.hpp"
#include "nsshape/gas.hpp"
#include "nsshape/space.hpp"

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <vector>

namespace nsshape {

using SparseMat = Eigen::SparseMatrix<double>;

struct DGContext {
    const CurvilinearMesh* mesh;
    const DGSpace* space;
    const GeometryCache* geom;
    const BoundaryConditionSet* bcs;
    GasModel gas;
    double eta = 4.0; ///< BR2 stabilization, >= number of element faces
    std::function<State(const Vec2&)> source; ///< optional manufactured source

    int n_dofs() const { return 4 * space->nb * mesh->n_elements(); }
};

namespace detail {

/// traces of a field on one side of a face at the nq1 matched points
struct SideTrace {
    std::vector<State> u;
    std::vector<StateGrad> g;
};

inline void face_trace(const DGContext& ctx, const DGField& f, int elem, int face, int orient,
                       const Mat2* jinv_tab, bool jinv_is_r, const std::vector<GeometryCache::FacePt>& pts,
                       SideTrace& out) {
    const DGSpace& sp = *ctx.space;
    const int nb = sp.nb, nq1 = sp.nq1;
    out.u.assign(nq1, State::Zero());
    out.g.assign(nq1, StateGrad::Zero());
    auto U = f.elem_block(elem);
    const auto& pv = sp.fphi[face][orient];
    const auto& d1 = sp.fdphi1[face][orient];
    const auto& d2 = sp.fdphi2[face][orient];
    for (int qp = 0; qp < nq1; ++qp) {
        const Mat2& JinvT = jinv_tab ? jinv_tab[qp] : (jinv_is_r ? pts[qp].JinvT_r : pts[qp].JinvT_l);
        for (int b = 0; b < nb; ++b) {
            const State ub = U.row(b).transpose();
            out.u[qp] += pv[b * nq1 + qp] * ub;
            const Vec2 gref(d1[b * nq1 + qp], d2[b * nq1 + qp]);
            const Vec2 gphys = JinvT * gref;
            out.g[qp].col(0) += gphys[0] * ub;
            out.g[qp].col(1) += gphys[1] * ub;
        }
    }
}

/// The |v.n| and max() kinks in the plain LLF wave speed stall Newton near
/// no-slip walls; both are smoothed with a fixed width (the dissipation
/// stays an upper bound and multiplies the inter-element jump, so accuracy
/// is unaffected).
constexpr double kLlfSmoothing = 0.05;

inline double smooth_wave_speed(const State& u, const Vec2& n, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const double vn = q.v.dot(n);
    return std::sqrt(vn * vn + kLlfSmoothing * kLlfSmoothing) + q.a;
}

inline Vec4 smooth_wave_speed_derivative(const State& u, const Vec2& n, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const Eigen::Matrix<double, 2, 4> dv = velocity_derivative(u);
    const double vn = q.v.dot(n);
    const double root = std::sqrt(vn * vn + kLlfSmoothing * kLlfSmoothing);
    const Vec4 dp = pressure_derivative(u, gas);
    Vec4 d_p_over_rho = dp / q.rho;
    d_p_over_rho[0] -= q.p / (q.rho * q.rho);
    const Vec4 da = (gas.gamma / (2.0 * q.a)) * d_p_over_rho;
    const Vec4 dvn = (n[0] * dv.row(0) + n[1] * dv.row(1)).transpose();
    return (vn / root) * dvn + da;
}

inline double smooth_max(double a, double b, double* da = nullptr, double* db = nullptr) {
    const double d = a - b;
    const double root = std::sqrt(d * d + kLlfSmoothing * kLlfSmoothing);
    if (da) *da = 0.5 * (1.0 + d / root);
    if (db) *db = 0.5 * (1.0 - d / root);
    return 0.5 * (a + b + root);
}

/// local Lax-Friedrichs numerical flux
inline Vec4 llf_flux(const State& ul, const State& ur, const Vec2& n, const GasModel& gas) {
    const FluxPair Fl = convective_flux(ul, gas);
    const FluxPair Fr = convective_flux(ur, gas);
    const double lam = smooth_max(smooth_wave_speed(ul, n, gas), smooth_wave_speed(ur, n, gas));
    return 0.5 * (Fl * n + Fr * n) - 0.5 * lam * (ur - ul);
}

} // namespace detail

struct ResidualResult {
    Eigen::VectorXd R;
    bool admissible = true;
};

inline bool field_admissible(const DGContext& ctx, const DGField& f) {
    const DGSpace& sp = *ctx.space;
    const int nb = sp.nb, nqv = sp.nqv, nq1 = sp.nq1;
    for (int e = 0; e < ctx.mesh->n_elements(); ++e) {
        auto U = f.elem_block(e);
        for (int qp = 0; qp < nqv; ++qp) {
            State u = State::Zero();
            for (int b = 0; b < nb; ++b) u += sp.phi[b * nqv + qp] * U.row(b).transpose();
            if (!is_admissible(u, ctx.gas)) return false;
        }
        for (int face = 0; face < 4; ++face)
            for (int qp = 0; qp < nq1; ++qp) {
                State u = State::Zero();
                for (int b = 0; b < nb; ++b)
                    u += sp.fphi[face][0][b * nq1 + qp] * U.row(b).transpose();
                if (!is_admissible(u, ctx.gas)) return false;
            }
    }
    return true;
}

inline ResidualResult assemble_residual(const DGContext& ctx, const DGField& f) {
    const CurvilinearMesh& mesh = *ctx.mesh;
    const DGSpace& sp = *ctx.space;
    const GeometryCache& geom = *ctx.geom;
    const GasModel& gas = ctx.gas;
    const int nb = sp.nb, nqv = sp.nqv, nq1 = sp.nq1;

    ResidualResult res;
    res.R = Eigen::VectorXd::Zero(ctx.n_dofs());
    if (!field_admissible(ctx, f)) {
        res.admissible = false;
        return res;
    }
    auto R = [&](int e, int b, int c) -> double& { return res.R[(e * nb + b) * 4 + c]; };

    // volume terms
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto U = f.elem_block(e);
        for (int qp = 0; qp < nqv; ++qp) {
            const auto& pt = geom.vol[e][qp];
            State u = State::Zero();
            StateGrad g = StateGrad::Zero();
            for (int b = 0; b < nb; ++b) {
                const State ub = U.row(b).transpose();
                u += sp.phi[b * nqv + qp] * ub;
                const Vec2 gp = pt.JinvT * Vec2(sp.dphi1[b * nqv + qp], sp.dphi2[b * nqv + qp]);
                g.col(0) += gp[0] * ub;
                g.col(1) += gp[1] * ub;
            }
            const FluxPair F = convective_flux(u, gas) - viscous_flux(u, g, gas);
            State src = State::Zero();
            if (ctx.source) src = ctx.source(pt.x);
            for (int b = 0; b < nb; ++b) {
                const Vec2 gp = pt.JinvT * Vec2(sp.dphi1[b * nqv + qp], sp.dphi2[b * nqv + qp]);
                for (int c = 0; c < 4; ++c)
                    R(e, b, c) += pt.jw * (-(F(c, 0) * gp[0] + F(c, 1) * gp[1]) -
                                           src[c] * sp.phi[b * nqv + qp]);
            }
        }
    }

    detail::SideTrace tl, tr;

    // interior faces
    for (size_t fi = 0; fi < mesh.interior_faces.size(); ++fi) {
        const InteriorFace& If = mesh.interior_faces[fi];
        const auto& pts = geom.iface[fi];
        detail::face_trace(ctx, f, If.elem_l, If.face_l, 0, nullptr, false, pts, tl);
        detail::face_trace(ctx, f, If.elem_r, If.face_r, 1, nullptr, true, pts, tr);

        // lifted jump contribution at face points: r_s(qp) = sum_qp' L_s(qp,qp') jump(qp') n(qp')
        std::vector<StateGrad> rl(nq1, StateGrad::Zero()), rr(nq1, StateGrad::Zero());
        for (int qp = 0; qp < nq1; ++qp)
            for (int qq = 0; qq < nq1; ++qq) {
                const State jmp = tl.u[qq] - tr.u[qq];
                for (int k = 0; k < 2; ++k) {
                    rl[qp].col(k) += geom.lift_l[fi](qp, qq) * pts[qq].n[k] * jmp;
                    rr[qp].col(k) += geom.lift_r[fi](qp, qq) * pts[qq].n[k] * jmp;
                }
            }

        for (int qp = 0; qp < nq1; ++qp) {
            const auto& pt = pts[qp];
            const Vec4 hc = detail::llf_flux(tl.u[qp], tr.u[qp], pt.n, gas);
            const FluxPair Fvl = viscous_flux(tl.u[qp], (tl.g[qp] + ctx.eta * rl[qp]).eval(), gas);
            const FluxPair Fvr = viscous_flux(tr.u[qp], (tr.g[qp] + ctx.eta * rr[qp]).eval(), gas);
            const Vec4 hv = 0.5 * (Fvl + Fvr) * pt.n;
            const Vec4 h = hc - hv;

            // symmetrizing term: jump (x) n against G^T grad(test) on each side
            const State jmp = tl.u[qp] - tr.u[qp];
            StateGrad jn;
            jn.col(0) = jmp * pt.n[0];
            jn.col(1) = jmp * pt.n[1];
            const FluxPair Sl = viscous_flux(tl.u[qp], jn, gas);
            const FluxPair Sr = viscous_flux(tr.u[qp], jn, gas);

            for (int b = 0; b < nb; ++b) {
                const double pl = sp.fphi[If.face_l][0][b * nq1 + qp];
                const double pr = sp.fphi[If.face_r][1][b * nq1 + qp];
                const Vec2 gl = pt.JinvT_l * Vec2(sp.fdphi1[If.face_l][0][b * nq1 + qp],
                                                  sp.fdphi2[If.face_l][0][b * nq1 + qp]);
                const Vec2 gr = pt.JinvT_r * Vec2(sp.fdphi1[If.face_r][1][b * nq1 + qp],
                                                  sp.fdphi2[If.face_r][1][b * nq1 + qp]);
                for (int c = 0; c < 4; ++c) {
                    R(If.elem_l, b, c) += pt.dsw * (h[c] * pl -
                                                    0.5 * (Sl(c, 0) * gl[0] + Sl(c, 1) * gl[1]));
                    R(If.elem_r, b, c) += pt.dsw * (-h[c] * pr -
                                                    0.5 * (Sr(c, 0) * gr[0] + Sr(c, 1) * gr[1]));
                }
            }
        }
    }

    // boundary edges
    for (size_t bi = 0; bi < mesh.boundary_edges.size(); ++bi) {
        const BoundaryEdge& be = mesh.boundary_edges[bi];
        const auto& pts = geom.bface[bi];
        detail::face_trace(ctx, f, be.elem, be.face, 0, nullptr, false, pts, tl);

        const bool wall = is_wall(be.tag);
        const bool dirichlet = !wall && static_cast<bool>(ctx.bcs->exact_state);
        const bool penalized = wall || dirichlet;

        std::vector<State> ub(nq1);
        for (int qp = 0; qp < nq1; ++qp) {
            if (wall)
                ub[qp] = wall_state(tl.u[qp], be.tag, gas, ctx.bcs->T_wall);
            else if (dirichlet)
                ub[qp] = ctx.bcs->exact_state(pts[qp].x);
            else
                ub[qp] = ctx.bcs->freestream;
        }

        std::vector<StateGrad> rb(nq1, StateGrad::Zero());
        if (penalized)
            for (int qp = 0; qp < nq1; ++qp)
                for (int qq = 0; qq < nq1; ++qq) {
                    const State jmp = tl.u[qq] - ub[qq];
                    for (int k = 0; k < 2; ++k)
                        rb[qp].col(k) += geom.lift_b[bi](qp, qq) * pts[qq].n[k] * jmp;
                }

        for (int qp = 0; qp < nq1; ++qp) {
            const auto& pt = pts[qp];
            Vec4 hc, hv;
            FluxPair S = FluxPair::Zero();
            if (wall) {
                hc = convective_flux(ub[qp], gas) * pt.n;
                FluxPair Fv = viscous_flux(ub[qp], (tl.g[qp] + ctx.eta * rb[qp]).eval(), gas);
                hv = Fv * pt.n;
                const State jmp = tl.u[qp] - ub[qp];
                StateGrad jn;
                jn.col(0) = jmp * pt.n[0];
                jn.col(1) = jmp * pt.n[1];
                S = viscous_flux(ub[qp], jn, gas);
                if (be.tag == BoundaryTag::WALL_ADIA) {
                    hv[3] = 0.0; // no heat flux through the adiabatic wall
                    S.row(3).setZero();
                }
            } else if (dirichlet) {
                hc = detail::llf_flux(tl.u[qp], ub[qp], pt.n, gas);
                FluxPair Fv = viscous_flux(ub[qp], (tl.g[qp] + ctx.eta * rb[qp]).eval(), gas);
                hv = Fv * pt.n;
                const State jmp = tl.u[qp] - ub[qp];
                StateGrad jn;
                jn.col(0) = jmp * pt.n[0];
                jn.col(1) = jmp * pt.n[1];
                S = viscous_flux(ub[qp], jn, gas);
            } else {
                hc = detail::llf_flux(tl.u[qp], ub[qp], pt.n, gas);
                hv = viscous_flux(tl.u[qp], tl.g[qp], gas) * pt.n;
            }
            const Vec4 h = hc - hv;
            for (int b = 0; b < nb; ++b) {
                const double pl = sp.fphi[be.face][0][b * nq1 + qp];
                const Vec2 gl = pt.JinvT_l * Vec2(sp.fdphi1[be.face][0][b * nq1 + qp],
                                                  sp.fdphi2[be.face][0][b * nq1 + qp]);
                for (int c = 0; c < 4; ++c)
                    R(be.elem, b, c) += pt.dsw * (h[c] * pl - (S(c, 0) * gl[0] + S(c, 1) * gl[1]));
            }
        }
    }

    return res;
}

namespace detail {

/// d(llf)/du for the `us` side; `uo` is the opposite state
inline Mat4 llf_flux_jacobian_side(const State& us, const State& uo, const Vec2& n, bool is_left,
                                   const GasModel& gas) {
    const FluxJacobian A = convective_jacobian(us, gas);
    Mat4 H = 0.5 * (n[0] * A.A[0] + n[1] * A.A[1]);
    const double ss = smooth_wave_speed(us, n, gas);
    const double so = smooth_wave_speed(uo, n, gas);
    double dls, dlo;
    const double lam = smooth_max(ss, so, &dls, &dlo);
    (void)dlo;
    H += (is_left ? 0.5 : -0.5) * lam * Mat4::Identity();
    const Vec4 dlam = dls * smooth_wave_speed_derivative(us, n, gas);
    const State ul = is_left ? us : uo;
    const State ur = is_left ? uo : us;
    H -= 0.5 * (ur - ul) * dlam.transpose();
    return H;
}

} // namespace detail

inline SparseMat assemble_jacobian(const DGContext& ctx, const DGField& f) {
    const CurvilinearMesh& mesh = *ctx.mesh;
    const DGSpace& sp = *ctx.space;
    const GeometryCache& geom = *ctx.geom;
    const GasModel& gas = ctx.gas;
    const int nb = sp.nb, nqv = sp.nqv, nq1 = sp.nq1;
    const int nl = 4 * nb; // local block size
    const int N = ctx.n_dofs();

    if (!field_admissible(ctx, f))
        throw InadmissibleStateError(0.0, 0.0);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(mesh.n_elements()) * nl * nl * 5 / 2);

    auto push_block = [&](int elem_t, int elem_s, const Eigen::MatrixXd& B) {
        const int row0 = elem_t * nl, col0 = elem_s * nl;
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                if (B(i, j) != 0.0) trips.emplace_back(row0 + i, col0 + j, B(i, j));
    };

    Eigen::MatrixXd D(nl, nl);

    // volume contributions
    for (int e = 0; e < mesh.n_elements(); ++e) {
        D.setZero();
        auto U = f.elem_block(e);
        std::vector<Vec2> gp(nb);
        for (int qp = 0; qp < nqv; ++qp) {
            const auto& pt = geom.vol[e][qp];
            State u = State::Zero();
            StateGrad g = StateGrad::Zero();
            for (int b = 0; b < nb; ++b) {
                const State ub = U.row(b).transpose();
                u += sp.phi[b * nqv + qp] * ub;
                gp[b] = pt.JinvT * Vec2(sp.dphi1[b * nqv + qp], sp.dphi2[b * nqv + qp]);
                g.col(0) += gp[b][0] * ub;
                g.col(1) += gp[b][1] * ub;
            }
            const FluxJacobian Ac = convective_jacobian(u, gas);
            auto [Av, G] = viscous_jacobians(u, g, gas);
            Mat4 M0 = Ac.A[0] - Av.A[0];
            Mat4 M1 = Ac.A[1] - Av.A[1];
            for (int bs = 0; bs < nb; ++bs) {
                const double ps = sp.phi[bs * nqv + qp];
                const Mat4 T0 =
                    M0 * ps - G.G[0][0] * gp[bs][0] - G.G[0][1] * gp[bs][1];
                const Mat4 T1 =
                    M1 * ps - G.G[1][0] * gp[bs][0] - G.G[1][1] * gp[bs][1];
                for (int bt = 0; bt < nb; ++bt) {
                    const Mat4 blk = -pt.jw * (gp[bt][0] * T0 + gp[bt][1] * T1);
                    for (int c = 0; c < 4; ++c)
                        for (int j = 0; j < 4; ++j) D(bt * 4 + c, bs * 4 + j) += blk(c, j);
                }
            }
        }
        push_block(e, e, D);
    }

    detail::SideTrace tl, tr;
    // lifted source-basis tables: lam[lift][src][bs][qp] as Vec2
    using LamTab = std::vector<Vec2>;
    auto build_lam = [&](const Eigen::MatrixXd& kernel, const double* src_phi,
                         const std::vector<GeometryCache::FacePt>& pts, LamTab& lam) {
        lam.assign(static_cast<size_t>(nb) * nq1, Vec2::Zero());
        for (int bs = 0; bs < nb; ++bs)
            for (int qp = 0; qp < nq1; ++qp) {
                Vec2 acc = Vec2::Zero();
                for (int qq = 0; qq < nq1; ++qq)
                    acc += kernel(qp, qq) * src_phi[bs * nq1 + qq] * pts[qq].n;
                lam[bs * nq1 + qp] = acc;
            }
    };

    Eigen::MatrixXd Bll(nl, nl), Blr(nl, nl), Brl(nl, nl), Brr(nl, nl);
    LamTab lam_ll, lam_lr, lam_rl, lam_rr;

    for (size_t fi = 0; fi < mesh.interior_faces.size(); ++fi) {
        const InteriorFace& If = mesh.interior_faces[fi];
        const auto& pts = geom.iface[fi];
        detail::face_trace(ctx, f, If.elem_l, If.face_l, 0, nullptr, false, pts, tl);
        detail::face_trace(ctx, f, If.elem_r, If.face_r, 1, nullptr, true, pts, tr);
        const double* phl = sp.fphi[If.face_l][0].data();
        const double* phr = sp.fphi[If.face_r][1].data();
        build_lam(geom.lift_l[fi], phl, pts, lam_ll);
        build_lam(geom.lift_l[fi], phr, pts, lam_lr);
        build_lam(geom.lift_r[fi], phl, pts, lam_rl);
        build_lam(geom.lift_r[fi], phr, pts, lam_rr);

        std::vector<StateGrad> rl(nq1, StateGrad::Zero()), rr(nq1, StateGrad::Zero());
        for (int qp = 0; qp < nq1; ++qp)
            for (int qq = 0; qq < nq1; ++qq) {
                const State jmp = tl.u[qq] - tr.u[qq];
                for (int k = 0; k < 2; ++k) {
                    rl[qp].col(k) += geom.lift_l[fi](qp, qq) * pts[qq].n[k] * jmp;
                    rr[qp].col(k) += geom.lift_r[fi](qp, qq) * pts[qq].n[k] * jmp;
                }
            }

        Bll.setZero();
        Blr.setZero();
        Brl.setZero();
        Brr.setZero();
        std::vector<Vec2> gtl(nb), gtr(nb);
        for (int qp = 0; qp < nq1; ++qp) {
            const auto& pt = pts[qp];
            for (int b = 0; b < nb; ++b) {
                gtl[b] = pt.JinvT_l * Vec2(sp.fdphi1[If.face_l][0][b * nq1 + qp],
                                           sp.fdphi2[If.face_l][0][b * nq1 + qp]);
                gtr[b] = pt.JinvT_r * Vec2(sp.fdphi1[If.face_r][1][b * nq1 + qp],
                                           sp.fdphi2[If.face_r][1][b * nq1 + qp]);
            }
            const Mat4 Hl = detail::llf_flux_jacobian_side(tl.u[qp], tr.u[qp], pt.n, true, gas);
            const Mat4 Hr = detail::llf_flux_jacobian_side(tr.u[qp], tl.u[qp], pt.n, false, gas);

            const StateGrad gtilde_l = tl.g[qp] + ctx.eta * rl[qp];
            const StateGrad gtilde_r = tr.g[qp] + ctx.eta * rr[qp];
            auto [Avl, Gl] = viscous_jacobians(tl.u[qp], gtilde_l, gas);
            auto [Avr, Gr] = viscous_jacobians(tr.u[qp], gtilde_r, gas);

            const State jmp = tl.u[qp] - tr.u[qp];
            StateGrad jn;
            jn.col(0) = jmp * pt.n[0];
            jn.col(1) = jmp * pt.n[1];
            auto [Asl, Gl2] = viscous_jacobians(tl.u[qp], jn, gas);
            auto [Asr, Gr2] = viscous_jacobians(tr.u[qp], jn, gas);
            (void)Gl2;
            (void)Gr2;

            for (int bs = 0; bs < nb; ++bs) {
                const double psl = phl[bs * nq1 + qp];
                const double psr = phr[bs * nq1 + qp];

                // d(hc - hv)/dU_s for each source side
                // viscous: hv = 0.5 (Fv(ul, gl + eta rl) + Fv(ur, gr + eta rr)) . n
                Mat4 dh_l = Hl * psl; // LLF w.r.t. left
                Mat4 dh_r = Hr * psr; // LLF w.r.t. right
                for (int k = 0; k < 2; ++k) {
                    // left flux term, d/dU_l
                    Mat4 t = Avl.A[k] * psl;
                    for (int l = 0; l < 2; ++l)
                        t += Gl.G[k][l] *
                             (gtl[bs][l] + ctx.eta * lam_ll[bs * nq1 + qp][l]);
                    dh_l -= 0.5 * pt.n[k] * t;
                    // left flux term, d/dU_r (through the lifting jump only)
                    Mat4 t2 = Mat4::Zero();
                    for (int l = 0; l < 2; ++l)
                        t2 += Gl.G[k][l] * (-ctx.eta * lam_lr[bs * nq1 + qp][l]);
                    dh_r -= 0.5 * pt.n[k] * t2;
                    // right flux term, d/dU_r
                    Mat4 t3 = Avr.A[k] * psr;
                    for (int l = 0; l < 2; ++l)
                        t3 += Gr.G[k][l] *
                              (gtr[bs][l] - ctx.eta * lam_rr[bs * nq1 + qp][l]);
                    dh_r -= 0.5 * pt.n[k] * t3;
                    // right flux term, d/dU_l
                    Mat4 t4 = Mat4::Zero();
                    for (int l = 0; l < 2; ++l)
                        t4 += Gr.G[k][l] * (ctx.eta * lam_rl[bs * nq1 + qp][l]);
                    dh_l -= 0.5 * pt.n[k] * t4;
                }

                // symmetrizing terms: -0.5 dsw Fv(u_T, jn) : grad(phi_T)
                // derivative pieces: through u_T and through the jump
                for (int bt = 0; bt < nb; ++bt) {
                    const double ptl = phl[bt * nq1 + qp];
                    const double ptr = phr[bt * nq1 + qp];
                    Mat4 blk_ll = pt.dsw * ptl * dh_l;
                    Mat4 blk_lr = pt.dsw * ptl * dh_r;
                    Mat4 blk_rl = -pt.dsw * ptr * dh_l;
                    Mat4 blk_rr = -pt.dsw * ptr * dh_r;

                    for (int k = 0; k < 2; ++k) {
                        // test on L: -0.5 dsw grad(phi_l)_k [Fv(ul, jn)]_{.,k}
                        Mat4 dS_du = Asl.A[k] * psl; // w.r.t. U_l through u_l
                        Mat4 dS_jmp_l = Mat4::Zero(), dS_jmp_r = Mat4::Zero();
                        for (int l = 0; l < 2; ++l) {
                            dS_jmp_l += Gl.G[k][l] * (pt.n[l] * psl);
                            dS_jmp_r += Gl.G[k][l] * (-pt.n[l] * psr);
                        }
                        blk_ll -= 0.5 * pt.dsw * gtl[bt][k] * (dS_du + dS_jmp_l);
                        blk_lr -= 0.5 * pt.dsw * gtl[bt][k] * dS_jmp_r;
                        // test on R
                        Mat4 dSr_du = Asr.A[k] * psr; // w.r.t. U_r through u_r
                        Mat4 dSr_jmp_l = Mat4::Zero(), dSr_jmp_r = Mat4::Zero();
                        for (int l = 0; l < 2; ++l) {
                            dSr_jmp_l += Gr.G[k][l] * (pt.n[l] * psl);
                            dSr_jmp_r += Gr.G[k][l] * (-pt.n[l] * psr);
                        }
                        blk_rl -= 0.5 * pt.dsw * gtr[bt][k] * dSr_jmp_l;
                        blk_rr -= 0.5 * pt.dsw * gtr[bt][k] * (dSr_du + dSr_jmp_r);
                    }

                    for (int c = 0; c < 4; ++c)
                        for (int j = 0; j < 4; ++j) {
                            Bll(bt * 4 + c, bs * 4 + j) += blk_ll(c, j);
                            Blr(bt * 4 + c, bs * 4 + j) += blk_lr(c, j);
                            Brl(bt * 4 + c, bs * 4 + j) += blk_rl(c, j);
                            Brr(bt * 4 + c, bs * 4 + j) += blk_rr(c, j);
                        }
                }
            }
        }
        push_block(If.elem_l, If.elem_l, Bll);
        push_block(If.elem_l, If.elem_r, Blr);
        push_block(If.elem_r, If.elem_l, Brl);
        push_block(If.elem_r, If.elem_r, Brr);
    }

    // boundary edges
    for (size_t bi = 0; bi < mesh.boundary_edges.size(); ++bi) {
        const BoundaryEdge& be = mesh.boundary_edges[bi];
        const auto& pts = geom.bface[bi];
        detail::face_trace(ctx, f, be.elem, be.face, 0, nullptr, false, pts, tl);
        const double* phl = sp.fphi[be.face][0].data();

        const bool wall = is_wall(be.tag);
        const bool dirichlet = !wall && static_cast<bool>(ctx.bcs->exact_state);
        const bool penalized = wall || dirichlet;
        const bool adiabatic = be.tag == BoundaryTag::WALL_ADIA;

        std::vector<State> ub(nq1);
        std::vector<Mat4> Db(nq1, Mat4::Zero());
        for (int qp = 0; qp < nq1; ++qp) {
            if (wall) {
                ub[qp] = wall_state(tl.u[qp], be.tag, gas, ctx.bcs->T_wall);
                Db[qp] = wall_state_jacobian(tl.u[qp], be.tag, gas, ctx.bcs->T_wall);
            } else if (dirichlet)
                ub[qp] = ctx.bcs->exact_state(pts[qp].x);
            else
                ub[qp] = ctx.bcs->freestream;
        }

        std::vector<StateGrad> rb(nq1, StateGrad::Zero());
        // matrix-valued lifting tables: d r_b(qp)(:,l) / dU(bs,:) carries the
        // wall-state Jacobian evaluated where the jump lives
        std::array<std::vector<Mat4>, 2> lam_bm;
        if (penalized) {
            lam_bm[0].assign(static_cast<size_t>(nb) * nq1, Mat4::Zero());
            lam_bm[1].assign(static_cast<size_t>(nb) * nq1, Mat4::Zero());
            for (int bs = 0; bs < nb; ++bs)
                for (int qp = 0; qp < nq1; ++qp)
                    for (int qq = 0; qq < nq1; ++qq) {
                        const Mat4 Djmp_qq =
                            wall ? (Mat4::Identity() - Db[qq]).eval() : Mat4::Identity().eval();
                        const double c = geom.lift_b[bi](qp, qq) * phl[bs * nq1 + qq];
                        for (int l = 0; l < 2; ++l)
                            lam_bm[l][bs * nq1 + qp] += c * pts[qq].n[l] * Djmp_qq;
                    }
            for (int qp = 0; qp < nq1; ++qp)
                for (int qq = 0; qq < nq1; ++qq) {
                    const State jmp = tl.u[qq] - ub[qq];
                    for (int k = 0; k < 2; ++k)
                        rb[qp].col(k) += geom.lift_b[bi](qp, qq) * pts[qq].n[k] * jmp;
                }
        }

        Bll.setZero();
        std::vector<Vec2> gtl(nb);
        for (int qp = 0; qp < nq1; ++qp) {
            const auto& pt = pts[qp];
            for (int b = 0; b < nb; ++b)
                gtl[b] = pt.JinvT_l * Vec2(sp.fdphi1[be.face][0][b * nq1 + qp],
                                           sp.fdphi2[be.face][0][b * nq1 + qp]);

            if (wall || dirichlet) {
                // convective part
                Mat4 Hc;
                if (wall) {
                    const FluxJacobian Ab = convective_jacobian(ub[qp], gas);
                    Hc = (pt.n[0] * Ab.A[0] + pt.n[1] * Ab.A[1]) * Db[qp];
                } else {
                    Hc = detail::llf_flux_jacobian_side(tl.u[qp], ub[qp], pt.n, true, gas);
                }
                const StateGrad gtilde = tl.g[qp] + ctx.eta * rb[qp];
                auto [Avb, Gb] = viscous_jacobians(ub[qp], gtilde, gas);
                const State jmp = tl.u[qp] - ub[qp];
                StateGrad jn;
                jn.col(0) = jmp * pt.n[0];
                jn.col(1) = jmp * pt.n[1];
                auto [Asb, Gb2] = viscous_jacobians(ub[qp], jn, gas);
                (void)Gb2;

                for (int bs = 0; bs < nb; ++bs) {
                    const double ps = phl[bs * nq1 + qp];
                    // jump derivative: (I - Db) phi_bs for wall; phi_bs for dirichlet
                    const Mat4 Djmp = wall ? ((Mat4::Identity() - Db[qp]) * ps).eval()
                                           : (Mat4::Identity() * ps).eval();
                    Mat4 dh = Hc * ps;
                    Mat4 dhv = Mat4::Zero();
                    for (int k = 0; k < 2; ++k) {
                        Mat4 tv = Mat4::Zero();
                        // u_b dependence of Fv(u_b, gtilde)
                        if (wall) tv += Avb.A[k] * (Db[qp] * ps);
                        // gradient dependence: grad u_l + eta * lifting(jump)
                        for (int l = 0; l < 2; ++l) {
                            Mat4 dgr = Mat4::Identity() * gtl[bs][l];
                            dgr += ctx.eta * lam_bm[l][bs * nq1 + qp];
                            tv += Gb.G[k][l] * dgr;
                        }
                        dhv += pt.n[k] * tv;
                    }
                    if (adiabatic) dhv.row(3).setZero();
                    dh -= dhv;

                    for (int bt = 0; bt < nb; ++bt) {
                        const double ptl = phl[bt * nq1 + qp];
                        Mat4 blk = pt.dsw * ptl * dh;
                        // symmetrizing term: -dsw Fv(u_b, jn) : grad(phi)
                        for (int k = 0; k < 2; ++k) {
                            Mat4 dS = Mat4::Zero();
                            if (wall) dS += Asb.A[k] * (Db[qp] * ps);
                            for (int l = 0; l < 2; ++l) dS += Gb.G[k][l] * (pt.n[l] * Djmp);
                            if (adiabatic) dS.row(3).setZero();
                            blk -= pt.dsw * gtl[bt][k] * dS;
                        }
                        for (int c = 0; c < 4; ++c)
                            for (int j = 0; j < 4; ++j)
                                Bll(bt * 4 + c, bs * 4 + j) += blk(c, j);
                    }
                }
            } else {
                // freestream far field: LLF + viscous from the interior trace
                const Mat4 Hc = detail::llf_flux_jacobian_side(tl.u[qp], ub[qp], pt.n, true, gas);
                auto [Av, G] = viscous_jacobians(tl.u[qp], tl.g[qp], gas);
                for (int bs = 0; bs < nb; ++bs) {
                    const double ps = phl[bs * nq1 + qp];
                    Mat4 dh = Hc * ps;
                    for (int k = 0; k < 2; ++k) {
                        Mat4 tv = Av.A[k] * ps;
                        for (int l = 0; l < 2; ++l) tv += G.G[k][l] * gtl[bs][l];
                        dh -= pt.n[k] * tv;
                    }
                    for (int bt = 0; bt < nb; ++bt) {
                        const double ptl = phl[bt * nq1 + qp];
                        const Mat4 blk = pt.dsw * ptl * dh;
                        for (int c = 0; c < 4; ++c)
                            for (int j = 0; j < 4; ++j)
                                Bll(bt * 4 + c, bs * 4 + j) += blk(c, j);
                    }
                }
            }
        }
        push_block(be.elem, be.elem, Bll);
    }

    SparseMat A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

/// dR/du applied to a coefficient direction w.
inline Eigen::VectorXd residual_jacobian_vector_product(const DGContext& ctx, const DGField& f,
                                                        const Eigen::VectorXd& w) {
    return assemble_jacobian(ctx, f) * w;
}

} // namespace nsshape
