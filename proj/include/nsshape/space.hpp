#pragma once

/// DG reference space: tensor-product normalized Legendre basis of degree p
/// on [-1,1]^2 with volume and face quadrature tables, plus the per-mesh
/// geometry cache (metric terms, element mass factorizations and the BR2
/// face lifting kernels).

#include "nsshape/basis.hpp"
#include "nsshape/mesh.hpp"

#include <Eigen/Cholesky>
#include <vector>

namespace nsshape {

/// Evaluate the tensor Legendre basis at one reference point.
inline void basis_eval(int p, const Vec2& xi, double* val, Vec2* grad = nullptr,
                       std::array<double, 3>* hess = nullptr) {
    const int n1 = p + 1;
    std::vector<double> v1(n1), d1(n1), s1(n1), v2(n1), d2(n1), s2(n1);
    legendre_all(p, xi[0], v1.data(), d1.data(), s1.data());
    legendre_all(p, xi[1], v2.data(), d2.data(), s2.data());
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i) {
            const int b = j * n1 + i;
            if (val) val[b] = v1[i] * v2[j];
            if (grad) grad[b] = Vec2(d1[i] * v2[j], v1[i] * d2[j]);
            if (hess) hess[b] = {s1[i] * v2[j], d1[i] * d2[j], v1[i] * s2[j]};
        }
}

class DGSpace {
  public:
    int p = 1;
    int nb = 4;   ///< basis functions per element, (p+1)^2
    int nq1 = 4;  ///< 1D quadrature points
    int nqv = 16; ///< volume quadrature points

    std::vector<Vec2> vol_xi;
    std::vector<double> vol_w;
    std::vector<double> phi, dphi1, dphi2; ///< [b * nqv + qp]

    QuadRule1D face_rule;
    /// face traces [face][orient][b * nq1 + qp]; orient 1 reverses the
    /// parameter so that index qp matches the physical point seen by the
    /// neighbouring element
    std::array<std::array<std::vector<double>, 2>, 4> fphi, fdphi1, fdphi2;

    explicit DGSpace(int order, int geometric_degree = 4) : p(order) {
        nb = (p + 1) * (p + 1);
        // exactness >= 2p + q per direction
        nq1 = (2 * p + geometric_degree + 2) / 2 + 1;
        nqv = nq1 * nq1;
        const QuadRule1D r1 = gauss_legendre(nq1);
        face_rule = r1;

        vol_xi.resize(nqv);
        vol_w.resize(nqv);
        phi.resize(nb * nqv);
        dphi1.resize(nb * nqv);
        dphi2.resize(nb * nqv);
        std::vector<double> val(nb);
        std::vector<Vec2> grad(nb);
        for (int q2 = 0; q2 < nq1; ++q2)
            for (int q1 = 0; q1 < nq1; ++q1) {
                const int qp = q2 * nq1 + q1;
                vol_xi[qp] = Vec2(r1.x[q1], r1.x[q2]);
                vol_w[qp] = r1.w[q1] * r1.w[q2];
                basis_eval(p, vol_xi[qp], val.data(), grad.data());
                for (int b = 0; b < nb; ++b) {
                    phi[b * nqv + qp] = val[b];
                    dphi1[b * nqv + qp] = grad[b][0];
                    dphi2[b * nqv + qp] = grad[b][1];
                }
            }
        for (int f = 0; f < 4; ++f)
            for (int orient = 0; orient < 2; ++orient) {
                auto& pv = fphi[f][orient];
                auto& d1v = fdphi1[f][orient];
                auto& d2v = fdphi2[f][orient];
                pv.resize(nb * nq1);
                d1v.resize(nb * nq1);
                d2v.resize(nb * nq1);
                for (int qp = 0; qp < nq1; ++qp) {
                    const double sigma = orient == 0 ? r1.x[qp] : -r1.x[qp];
                    basis_eval(p, CurvilinearMesh::face_xi(f, sigma), val.data(), grad.data());
                    for (int b = 0; b < nb; ++b) {
                        pv[b * nq1 + qp] = val[b];
                        d1v[b * nq1 + qp] = grad[b][0];
                        d2v[b * nq1 + qp] = grad[b][1];
                    }
                }
            }
    }
};

/// Metric data for one mesh/space pair.
class GeometryCache {
  public:
    struct VolPt {
        Vec2 x;
        Mat2 JinvT; ///< maps reference gradients to physical gradients
        double jw;  ///< det J times quadrature weight
    };
    struct FacePt {
        Vec2 x;
        Vec2 n;      ///< unit normal, outward w.r.t. the L element
        double dsw;  ///< arc measure times quadrature weight
        Mat2 JinvT_l, JinvT_r;
    };

    std::vector<std::vector<VolPt>> vol;              // [elem][qp]
    std::vector<Eigen::LLT<Eigen::MatrixXd>> mass;    // per-elem mass factorization
    std::vector<double> elem_size;                    // sqrt(area)
    std::vector<double> elem_volume;
    std::vector<std::vector<FacePt>> iface;           // [interior face][qp]
    std::vector<Eigen::MatrixXd> lift_l, lift_r;      // BR2 kernels, nq1 x nq1
    std::vector<std::vector<FacePt>> bface;           // [boundary edge][qp]
    std::vector<Eigen::MatrixXd> lift_b;

    GeometryCache(const CurvilinearMesh& mesh, const DGSpace& space) {
        const int ne = mesh.n_elements();
        const int nqv = space.nqv, nq1 = space.nq1, nb = space.nb;
        vol.assign(ne, {});
        mass.reserve(ne);
        elem_size.resize(ne);
        elem_volume.resize(ne);
        for (int e = 0; e < ne; ++e) {
            auto& pts = vol[e];
            pts.resize(nqv);
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
            double area = 0.0;
            for (int qp = 0; qp < nqv; ++qp) {
                Vec2 x;
                Mat2 J;
                mesh.map_derivatives(e, space.vol_xi[qp], &x, &J);
                const double detJ = J.determinant();
                if (!(detJ > 0.0))
                    throw GeometryError("non-positive Jacobian in element " + std::to_string(e));
                pts[qp].x = x;
                pts[qp].JinvT = J.inverse().transpose();
                pts[qp].jw = detJ * space.vol_w[qp];
                area += pts[qp].jw;
                for (int bt = 0; bt < nb; ++bt)
                    for (int bs = 0; bs <= bt; ++bs)
                        M(bt, bs) += pts[qp].jw * space.phi[bt * nqv + qp] * space.phi[bs * nqv + qp];
            }
            M = M.selfadjointView<Eigen::Lower>();
            mass.emplace_back(M);
            elem_size[e] = std::sqrt(area);
            elem_volume[e] = area;
        }

        auto face_points = [&](int elem, int face, bool with_r, int elem_r, int face_r,
                               std::vector<FacePt>& pts) {
            pts.resize(nq1);
            for (int qp = 0; qp < nq1; ++qp) {
                const double sigma = space.face_rule.x[qp];
                Vec2 x, dx;
                mesh.face_curve(elem, face, sigma, &x, &dx);
                FacePt& fp = pts[qp];
                fp.x = x;
                const double len = dx.norm();
                fp.n = Vec2(dx[1], -dx[0]) / len;
                fp.dsw = len * space.face_rule.w[qp];
                Mat2 J;
                mesh.map_derivatives(elem, CurvilinearMesh::face_xi(face, sigma), nullptr, &J);
                fp.JinvT_l = J.inverse().transpose();
                if (with_r) {
                    Mat2 Jr;
                    mesh.map_derivatives(elem_r, CurvilinearMesh::face_xi(face_r, -sigma), nullptr,
                                         &Jr);
                    fp.JinvT_r = Jr.inverse().transpose();
                }
            }
        };

        // lifting kernel: r(qp) = sum_qp' L(qp,qp') jump(qp'), where r solves
        // (r, phi)_K = -c <jump n, phi>_f against the element basis
        auto lifting_kernel = [&](int elem, const double* trace_tab,
                                  const std::vector<FacePt>& pts, double c) {
            Eigen::MatrixXd P(nq1, nb);
            for (int qp = 0; qp < nq1; ++qp)
                for (int b = 0; b < nb; ++b) P(qp, b) = trace_tab[b * nq1 + qp];
            Eigen::MatrixXd W = P.transpose(); // nb x nq1
            for (int qp = 0; qp < nq1; ++qp) W.col(qp) *= pts[qp].dsw;
            Eigen::MatrixXd K = P * mass[elem].solve(W);
            return (-c * K).eval();
        };

        const int nif = static_cast<int>(mesh.interior_faces.size());
        iface.assign(nif, {});
        lift_l.resize(nif);
        lift_r.resize(nif);
        for (int f = 0; f < nif; ++f) {
            const InteriorFace& If = mesh.interior_faces[f];
            face_points(If.elem_l, If.face_l, true, If.elem_r, If.face_r, iface[f]);
            lift_l[f] = lifting_kernel(If.elem_l, space.fphi[If.face_l][0].data(), iface[f], 0.5);
            lift_r[f] = lifting_kernel(If.elem_r, space.fphi[If.face_r][1].data(), iface[f], 0.5);
        }
        const int nbf = static_cast<int>(mesh.boundary_edges.size());
        bface.assign(nbf, {});
        lift_b.resize(nbf);
        for (int f = 0; f < nbf; ++f) {
            const BoundaryEdge& be = mesh.boundary_edges[f];
            face_points(be.elem, be.face, false, 0, 0, bface[f]);
            lift_b[f] = lifting_kernel(be.elem, space.fphi[be.face][0].data(), bface[f], 1.0);
        }
    }
};

} // namespace nsshape
