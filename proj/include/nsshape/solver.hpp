#pragma once

/// Pseudo-transient Newton driver for the steady DG system, with SER CFL
/// growth, admissibility-aware line search and a sparse direct linear
/// backend shared with the adjoint solve.

#include "nsshape/residual.hpp"

#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <sstream>

namespace nsshape {

struct SolverConfig {
    double tol = 1e-10; ///< absolute tolerance on ||R||_2
    int max_iters = 200;
    double cfl0 = 10.0;
    double cfl_max = 1e14;
    double cfl_growth = 4.0;
    double cfl_shrink = 0.25;
    double cfl_min = 1e-6;
    int max_line_search = 10;
    bool lazy_jacobian = false; ///< reuse the factorization while contraction is good
    bool verbose = false;
};

struct SolveHistory {
    struct Entry {
        int iter;
        double res_norm;
        double cfl;
        double J_drag;
        double J_lift;
    };
    std::vector<Entry> entries;
    bool converged = false;
    int newton_iters = 0;

    std::string csv() const {
        std::ostringstream os;
        os << "iter,res_norm,cfl,J_drag,J_lift\n";
        for (const auto& e : entries)
            os << e.iter << "," << format_g17(e.res_norm) << "," << format_g17(e.cfl) << ","
               << format_g17(e.J_drag) << "," << format_g17(e.J_lift) << "\n";
        return os.str();
    }
};

class NewtonFailure : public SolveError {
  public:
    NewtonFailure(const std::string& msg, SolveHistory hist)
        : SolveError(msg), history(std::move(hist)) {}
    SolveHistory history;
};

class LinearLU {
  public:
    void factorize(const SparseMat& A) {
        if (!analyzed_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
        }
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) throw SolveError("sparse LU factorization failed");
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return lu_.solve(b); }
    Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) {
        return lu_.transpose().solve(b);
    }

  private:
    Eigen::SparseLU<SparseMat> lu_;
    bool analyzed_ = false;
};

namespace detail {

/// block-diagonal mass scaled by 1/dt per element
inline SparseMat ptc_matrix(const DGContext& ctx, const DGField& u, double cfl) {
    const DGSpace& sp = *ctx.space;
    const GeometryCache& geom = *ctx.geom;
    const int nb = sp.nb, nqv = sp.nqv;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(ctx.mesh->n_elements()) * nb * nb * 4);
    for (int e = 0; e < ctx.mesh->n_elements(); ++e) {
        double lam = 1e-300;
        auto U = u.elem_block(e);
        for (int qp = 0; qp < nqv; ++qp) {
            State s = State::Zero();
            for (int b = 0; b < nb; ++b) s += sp.phi[b * nqv + qp] * U.row(b).transpose();
            const PrimitiveState q = primitive_from_conserved(s, ctx.gas);
            lam = std::max(lam, q.v.norm() + q.a);
        }
        const double dt = cfl * geom.elem_size[e] / lam;
        const Eigen::MatrixXd M = geom.mass[e].reconstructedMatrix() / dt;
        for (int bt = 0; bt < nb; ++bt)
            for (int bs = 0; bs < nb; ++bs)
                if (M(bt, bs) != 0.0)
                    for (int c = 0; c < 4; ++c)
                        trips.emplace_back((e * nb + bt) * 4 + c, (e * nb + bs) * 4 + c,
                                           M(bt, bs));
    }
    SparseMat P(ctx.n_dofs(), ctx.n_dofs());
    P.setFromTriplets(trips.begin(), trips.end());
    return P;
}

} // namespace detail

using ObjectiveProbe = std::function<std::pair<double, double>(const DGField&)>;

/// Drives ||R(u)||_2 below config.tol. Throws SolveError (carrying the
/// history) on CFL underflow or iteration exhaustion.
inline SolveHistory solve_steady(const DGContext& ctx, DGField& u, const SolverConfig& config,
                                 const ObjectiveProbe& probe = {}) {
    SolveHistory hist;
    ResidualResult rr = assemble_residual(ctx, u);
    if (!rr.admissible) throw SolveError("initial field is inadmissible");
    double res_norm = rr.R.norm();
    double cfl = config.cfl0;
    LinearLU lu;
    bool have_factorization = false;

    auto record = [&](int iter) {
        double jd = 0.0, jl = 0.0;
        if (probe) std::tie(jd, jl) = probe(u);
        hist.entries.push_back({iter, res_norm, cfl, jd, jl});
    };
    record(0);

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        if (res_norm <= config.tol) {
            hist.converged = true;
            hist.newton_iters = iter - 1;
            return hist;
        }
        const bool refactor = !config.lazy_jacobian || !have_factorization;
        if (refactor) {
            SparseMat A = assemble_jacobian(ctx, u);
            if (cfl < config.cfl_max * 0.999) {
                SparseMat P = detail::ptc_matrix(ctx, u, cfl);
                A = A + P;
            }
            lu.factorize(A);
            have_factorization = true;
        }
        const Eigen::VectorXd delta = lu.solve(-rr.R);

        double omega = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < config.max_line_search; ++ls, omega *= 0.5) {
            DGField trial = u;
            trial.coeffs() += omega * delta;
            ResidualResult rt = assemble_residual(ctx, trial);
            if (!rt.admissible) continue;
            const double rn = rt.R.norm();
            const bool good = rn <= res_norm * (1.0 - 1e-4 * omega);
            const bool tolerable = rn <= res_norm * 1.2 && omega < 1.0;
            if (good || (tolerable && ls == config.max_line_search - 1)) {
                const double contraction = rn / res_norm;
                u = trial;
                rr = rt;
                res_norm = rn;
                accepted = true;
                // SER-style growth with a floor: plateaus must not freeze the
                // pseudo-time step, otherwise PTC limit-cycles
                double grow = contraction < 1.0
                                  ? std::clamp(1.0 / contraction, 1.5, config.cfl_growth)
                                  : 1.0;
                cfl = std::min(cfl * grow, config.cfl_max);
                if (config.lazy_jacobian && contraction > 0.5) have_factorization = false;
                break;
            }
        }
        if (!accepted) {
            cfl *= config.cfl_shrink;
            have_factorization = false;
            if (cfl < config.cfl_min)
                throw NewtonFailure("pseudo-time CFL underflow at ||R|| = " +
                                        std::to_string(res_norm),
                                    hist);
            record(iter);
            continue;
        }
        record(iter);
        if (config.verbose)
            std::printf("  newton %3d  |R| %.3e  cfl %.2e\n", iter, res_norm, cfl);
    }
    if (res_norm <= config.tol) {
        hist.converged = true;
        return hist;
    }
    throw NewtonFailure("Newton failed to converge in " + std::to_string(config.max_iters) +
                            " iterations, ||R|| = " + std::to_string(res_norm),
                        hist);
}

} // namespace nsshape
