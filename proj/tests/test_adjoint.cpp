#include "nsshape/adjoint.hpp"

#include "test_utils.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace nsshape;
using namespace nsshape::testing;

namespace {

struct SmallCase {
    CurvilinearMesh mesh;
    std::unique_ptr<DGSpace> space;
    std::unique_ptr<GeometryCache> geom;
    BoundaryConditionSet bcs;
    GasModel gas;
    DGContext ctx;
    DGField u;
    double c_inf;
};

/// converged coarse NACA flow, shared across test cases
SmallCase& small_flow(int p = 1) {
    static std::map<int, std::unique_ptr<SmallCase>> cache;
    auto it = cache.find(p);
    if (it != cache.end()) return *it->second;
    auto sc = std::make_unique<SmallCase>();
    sc->gas = GasModel::nondimensional(1.4, 0.72, 0.5, 5000.0);
    sc->mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 12, 10, 10.0, 3);
    sc->space = std::make_unique<DGSpace>(p, sc->mesh.degree);
    sc->geom = std::make_unique<GeometryCache>(sc->mesh, *sc->space);
    sc->bcs = BoundaryConditionSet::farfield(sc->gas, 0.5, 2.0);
    sc->ctx = DGContext{&sc->mesh, sc->space.get(), sc->geom.get(), &sc->bcs, sc->gas};
    sc->u = constant_field(sc->mesh, *sc->space, sc->bcs.freestream);
    sc->c_inf = reference_force(sc->gas, 0.5);
    SolverConfig cfg;
    cfg.tol = 1e-11;
    cfg.cfl0 = 1.0;
    cfg.max_iters = 200;
    SolveHistory h = solve_steady(sc->ctx, sc->u, cfg);
    REQUIRE(h.converged);
    auto [itr, ok] = cache.emplace(p, std::move(sc));
    (void)ok;
    return *itr->second;
}

} // namespace

TEST_CASE("objective linearization matches finite differences of J") {
    SmallCase& sc = small_flow();
    for (Objective which : {Objective::DRAG, Objective::LIFT}) {
        const Eigen::VectorXd dJ = objective_linearization(sc.ctx, sc.u, which, 2.0, sc.c_inf);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd w(sc.ctx.n_dofs());
            for (int i = 0; i < w.size(); ++i) w[i] = uniform(-1.0, 1.0);
            const double h = 1e-6 / w.lpNorm<Eigen::Infinity>();
            DGField fp = sc.u, fm = sc.u;
            fp.coeffs() += h * w;
            fm.coeffs() -= h * w;
            const double fd = (compute_objective(sc.ctx, fp, which, 2.0, sc.c_inf) -
                               compute_objective(sc.ctx, fm, which, 2.0, sc.c_inf)) /
                              (2.0 * h);
            const double an = dJ.dot(w);
            CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
        }
    }
}

TEST_CASE("objective linearization vanishes for directions away from the wall") {
    SmallCase& sc = small_flow();
    const Eigen::VectorXd dJ = objective_linearization(sc.ctx, sc.u, Objective::DRAG, 2.0, sc.c_inf);
    // a direction supported on far-field-adjacent elements only
    Eigen::VectorXd w = Eigen::VectorXd::Zero(sc.ctx.n_dofs());
    const int nb = sc.space->nb;
    for (const auto& be : sc.mesh.boundary_edges)
        if (be.tag == BoundaryTag::FARFIELD)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < 4; ++c)
                    w[(be.elem * nb + b) * 4 + c] = uniform(-1.0, 1.0);
    CHECK(std::abs(dJ.dot(w)) == 0.0);
    // linearity: scaling w doubles the value
    Eigen::VectorXd w2(sc.ctx.n_dofs());
    for (int i = 0; i < w2.size(); ++i) w2[i] = uniform(-1.0, 1.0);
    CHECK(dJ.dot((2.0 * w2).eval()) == Catch::Approx(2.0 * dJ.dot(w2)).epsilon(1e-13));
}

TEST_CASE("discrete adjoint duality: J'[u](w) = z^T dR/du w") {
    SmallCase& sc = small_flow();
    SparseMat A = assemble_jacobian(sc.ctx, sc.u);
    for (Objective which : {Objective::DRAG, Objective::LIFT}) {
        const Eigen::VectorXd dJ = objective_linearization(sc.ctx, sc.u, which, 2.0, sc.c_inf);
        AdjointResult adj = solve_adjoint(sc.ctx, sc.u, dJ);
        CHECK(adj.linear_residual <= 1e-9 * std::max(1.0, dJ.norm()));
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd w(sc.ctx.n_dofs());
            for (int i = 0; i < w.size(); ++i) w[i] = uniform(-1.0, 1.0);
            const double lhs = dJ.dot(w);
            const double rhs = adj.z.coeffs().dot(A * w);
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST_CASE("transpose pairing of the Jacobian") {
    SmallCase& sc = small_flow();
    SparseMat A = assemble_jacobian(sc.ctx, sc.u);
    SparseMat At = SparseMat(A.transpose());
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd w(sc.ctx.n_dofs()), y(sc.ctx.n_dofs());
        for (int i = 0; i < w.size(); ++i) {
            w[i] = uniform(-1.0, 1.0);
            y[i] = uniform(-1.0, 1.0);
        }
        const double a = (A * w).dot(y);
        const double b = w.dot(At * y);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("zero objective linearization gives a zero adjoint") {
    SmallCase& sc = small_flow();
    AdjointResult adj = solve_adjoint(sc.ctx, sc.u, Eigen::VectorXd::Zero(sc.ctx.n_dofs()));
    CHECK(adj.z.coeffs().norm() == 0.0);
}

TEST_CASE("adjoint residual vanishes on interior, wall and far-field subsets") {
    SmallCase& sc = small_flow();
    SparseMat A = assemble_jacobian(sc.ctx, sc.u);
    const Eigen::VectorXd dJ = objective_linearization(sc.ctx, sc.u, Objective::LIFT, 2.0, sc.c_inf);
    AdjointResult adj = solve_adjoint(sc.ctx, sc.u, dJ);
    Eigen::VectorXd rho = dJ - A.transpose() * adj.z.coeffs();

    std::vector<char> wall_adj(sc.mesh.n_elements(), 0), ff_adj(sc.mesh.n_elements(), 0);
    for (const auto& be : sc.mesh.boundary_edges)
        (is_wall(be.tag) ? wall_adj : ff_adj)[be.elem] = 1;
    const int nb = sc.space->nb;
    double r_int = 0, r_wall = 0, r_ff = 0;
    for (int e = 0; e < sc.mesh.n_elements(); ++e) {
        double r = 0;
        for (int b = 0; b < nb; ++b)
            for (int c = 0; c < 4; ++c) r += std::pow(rho[(e * nb + b) * 4 + c], 2);
        if (wall_adj[e]) r_wall += r;
        else if (ff_adj[e]) r_ff += r;
        else r_int += r;
    }
    const double tol = 1e-9 * std::max(1.0, dJ.norm());
    CHECK(std::sqrt(r_int) <= tol);
    CHECK(std::sqrt(r_wall) <= tol);
    CHECK(std::sqrt(r_ff) <= tol);
}

TEST_CASE("Mach total derivative: FD of J equals -z^T dR/dM") {
    SmallCase& sc = small_flow();
    const Objective which = Objective::DRAG;
    const Eigen::VectorXd dJ = objective_linearization(sc.ctx, sc.u, which, 2.0, sc.c_inf);
    AdjointResult adj = solve_adjoint(sc.ctx, sc.u, dJ);

    // dR/dM at fixed u via central differences of the far-field state only
    const double hM = 1e-6;
    BoundaryConditionSet bp = sc.bcs, bm = sc.bcs;
    bp.freestream = freestream_state(sc.gas, 0.5 + hM, 2.0);
    bm.freestream = freestream_state(sc.gas, 0.5 - hM, 2.0);
    DGContext cp = sc.ctx, cm = sc.ctx;
    cp.bcs = &bp;
    cm.bcs = &bm;
    Eigen::VectorXd dRdM =
        (assemble_residual(cp, sc.u).R - assemble_residual(cm, sc.u).R) / (2.0 * hM);
    const double adj_total = -adj.z.coeffs().dot(dRdM);

    // FD of J: re-solve at perturbed Mach (same gas, same C_inf)
    const double hM2 = 1e-4;
    auto resolve = [&](double mach) {
        BoundaryConditionSet b = sc.bcs;
        b.freestream = freestream_state(sc.gas, mach, 2.0);
        DGContext c = sc.ctx;
        c.bcs = &b;
        DGField u = sc.u;
        SolverConfig cfg;
        cfg.tol = 1e-12;
        cfg.cfl0 = 1e5;
        cfg.max_iters = 100;
        SolveHistory h = solve_steady(c, u, cfg);
        REQUIRE(h.converged);
        return compute_objective(c, u, which, 2.0, sc.c_inf);
    };
    const double fd_total = (resolve(0.5 + hM2) - resolve(0.5 - hM2)) / (2.0 * hM2);
    INFO("adjoint " << adj_total << " fd " << fd_total);
    CHECK(std::abs(fd_total - adj_total) <= 1e-4 * std::abs(fd_total));
}

TEST_CASE("adjoint wall targets: rotation between lift and drag, exact z gives zero deviation") {
    SmallCase& sc = small_flow();
    // artificial z equal to the wall target everywhere
    const Vec2 psi_l = force_direction(Objective::LIFT, 2.0);
    const Vec2 psi_d = force_direction(Objective::DRAG, 2.0);
    CHECK(psi_d.dot(psi_l) == Catch::Approx(0.0).margin(1e-15)); // 90 degree rotation
    CHECK(force_direction(Objective::DRAG, 0.0).isApprox(Vec2(1, 0), 1e-15));
    CHECK(force_direction(Objective::LIFT, 0.0).isApprox(Vec2(0, 1), 1e-15));

    DGField z(sc.mesh.n_elements(), sc.space->nb);
    const State target(0.0, psi_l[0] / sc.c_inf, psi_l[1] / sc.c_inf, 0.0);
    z = constant_field(sc.mesh, *sc.space, target);
    AdjointBCReport rep = adjoint_bc_report(sc.ctx, z, Objective::LIFT, 2.0, sc.c_inf);
    CHECK(rep.max_momentum <= 1e-13);
    CHECK(rep.max_energy <= 1e-13);
}

TEST_CASE("adjoint wall deviations shrink as p grows") {
    double prev_mean = 0.0;
    for (int p : {1, 2}) {
        SmallCase& sc = small_flow(p);
        const Eigen::VectorXd dJ =
            objective_linearization(sc.ctx, sc.u, Objective::DRAG, 2.0, sc.c_inf);
        AdjointResult adj = solve_adjoint(sc.ctx, sc.u, dJ);
        AdjointBCReport rep = adjoint_bc_report(sc.ctx, adj.z, Objective::DRAG, 2.0, sc.c_inf);
        INFO("p=" << p << " mean momentum deviation " << rep.mean_momentum);
        if (p > 1) CHECK(rep.mean_momentum < prev_mean);
        prev_mean = rep.mean_momentum;
    }
}
