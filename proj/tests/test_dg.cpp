#include "nsshape/residual.hpp"

#include "test_utils.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace nsshape;
using namespace nsshape::testing;

namespace {

GasModel desk_gas() { return GasModel::nondimensional(1.4, 0.72, 0.5, 5000.0); }

CurvilinearMesh all_farfield(CurvilinearMesh mesh) {
    for (auto& be : mesh.boundary_edges) be.tag = BoundaryTag::FARFIELD;
    mesh.n_wall_edges = 0;
    return mesh;
}

DGField perturbed_freestream(const CurvilinearMesh& mesh, const DGSpace& space, const State& uinf,
                             double eps) {
    DGField f = constant_field(mesh, space, uinf);
    for (int i = 0; i < f.coeffs().size(); ++i) f.coeffs()[i] += uniform(-eps, eps);
    return f;
}

} // namespace

TEST_CASE("volume quadrature integrates basis products on curved elements") {
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 12, 3, 10.0, 4);
    DGSpace space(2, mesh.degree);
    GeometryCache geom(mesh, space);
    // reference: much higher-order rule evaluated through the raw mapping
    const QuadRule1D ref = gauss_legendre(space.nq1 + 6);
    const int nb = space.nb;
    std::vector<double> val(nb);
    for (int e : {0, 5, mesh.n_elements() - 1}) {
        Eigen::MatrixXd M_ref = Eigen::MatrixXd::Zero(nb, nb);
        for (int q2 = 0; q2 < ref.size(); ++q2)
            for (int q1 = 0; q1 < ref.size(); ++q1) {
                const Vec2 xi(ref.x[q1], ref.x[q2]);
                Mat2 J;
                mesh.map_derivatives(e, xi, nullptr, &J);
                basis_eval(space.p, xi, val.data());
                const double jw = J.determinant() * ref.w[q1] * ref.w[q2];
                for (int a = 0; a < nb; ++a)
                    for (int b = 0; b < nb; ++b) M_ref(a, b) += jw * val[a] * val[b];
            }
        // reconstruct the cached mass matrix from its factorization
        Eigen::MatrixXd M = geom.mass[e].reconstructedMatrix();
        CHECK((M - M_ref).cwiseAbs().maxCoeff() <= 1e-12 * M_ref.norm());
    }
}

TEST_CASE("local Lax-Friedrichs flux is consistent") {
    GasModel gas = desk_gas();
    for (int trial = 0; trial < 50; ++trial) {
        State u = random_admissible_state();
        Vec2 n(uniform(-1, 1), uniform(-1, 1));
        n.normalize();
        const Vec4 h = detail::llf_flux(u, u, n, gas);
        const Vec4 exact = convective_flux(u, gas) * n;
        CHECK((h - exact).norm() <= 1e-14 * std::max(1.0, exact.norm()));
    }
}

TEST_CASE("free-stream preservation on the curved NACA mesh") {
    GasModel gas = desk_gas();
    CurvilinearMesh mesh =
        all_farfield(generate_naca_omesh(AirfoilGeometry::naca0012(), 16, 4, 10.0, 4));
    DGSpace space(2, mesh.degree);
    GeometryCache geom(mesh, space);
    BoundaryConditionSet bcs = BoundaryConditionSet::farfield(gas, 0.5, 2.0);
    DGContext ctx{&mesh, &space, &geom, &bcs, gas};
    DGField f = constant_field(mesh, space, bcs.freestream);
    ResidualResult r = assemble_residual(ctx, f);
    REQUIRE(r.admissible);
    CHECK(r.R.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("residual flags inadmissible fields instead of throwing") {
    GasModel gas = desk_gas();
    CurvilinearMesh mesh = generate_rect_mesh(2, 2, Vec2(0, 0), Vec2(1, 1), 1,
                                              {BoundaryTag::FARFIELD, BoundaryTag::FARFIELD,
                                               BoundaryTag::FARFIELD, BoundaryTag::FARFIELD});
    DGSpace space(1, mesh.degree);
    GeometryCache geom(mesh, space);
    BoundaryConditionSet bcs = BoundaryConditionSet::farfield(gas, 0.5, 0.0);
    DGContext ctx{&mesh, &space, &geom, &bcs, gas};
    DGField f = constant_field(mesh, space, bcs.freestream);
    f.coeffs()[0] = -10.0; // negative density
    ResidualResult r = assemble_residual(ctx, f);
    CHECK_FALSE(r.admissible);
}

TEST_CASE("Jacobian matches central differences on the wall-bounded mesh") {
    GasModel gas = desk_gas();
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 10, 3, 10.0, 3);
    DGSpace space(1, mesh.degree);
    GeometryCache geom(mesh, space);
    BoundaryConditionSet bcs = BoundaryConditionSet::farfield(gas, 0.5, 2.0);
    DGContext ctx{&mesh, &space, &geom, &bcs, gas};

    DGField f = perturbed_freestream(mesh, space, bcs.freestream, 0.01);
    REQUIRE(field_admissible(ctx, f));
    SparseMat A = assemble_jacobian(ctx, f);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd w(ctx.n_dofs());
        for (int i = 0; i < w.size(); ++i) w[i] = uniform(-1.0, 1.0);
        const double h = 1e-6 / w.lpNorm<Eigen::Infinity>();
        DGField fp = f, fm = f;
        fp.coeffs() += h * w;
        fm.coeffs() -= h * w;
        ResidualResult rp = assemble_residual(ctx, fp);
        ResidualResult rm = assemble_residual(ctx, fm);
        REQUIRE(rp.admissible);
        REQUIRE(rm.admissible);
        Eigen::VectorXd fd = (rp.R - rm.R) / (2.0 * h);
        Eigen::VectorXd an = A * w;
        CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
    }
}

TEST_CASE("Jacobian matches central differences with isothermal wall") {
    GasModel gas = desk_gas();
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 10, 3, 10.0, 2);
    for (auto& be : mesh.boundary_edges)
        if (is_wall(be.tag)) be.tag = BoundaryTag::WALL_ISO;
    DGSpace space(1, mesh.degree);
    GeometryCache geom(mesh, space);
    BoundaryConditionSet bcs = BoundaryConditionSet::farfield(gas, 0.5, 2.0, /*T_wall=*/1.02);
    DGContext ctx{&mesh, &space, &geom, &bcs, gas};

    DGField f = perturbed_freestream(mesh, space, bcs.freestream, 0.01);
    REQUIRE(field_admissible(ctx, f));
    SparseMat A = assemble_jacobian(ctx, f);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd w(ctx.n_dofs());
        for (int i = 0; i < w.size(); ++i) w[i] = uniform(-1.0, 1.0);
        const double h = 1e-6 / w.lpNorm<Eigen::Infinity>();
        DGField fp = f, fm = f;
        fp.coeffs() += h * w;
        fm.coeffs() -= h * w;
        Eigen::VectorXd fd = (assemble_residual(ctx, fp).R - assemble_residual(ctx, fm).R) / (2.0 * h);
        Eigen::VectorXd an = A * w;
        CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
    }
}

TEST_CASE("Jacobian-vector product: zero direction and linearity") {
    GasModel gas = desk_gas();
    CurvilinearMesh mesh = generate_rect_mesh(3, 3, Vec2(0, 0), Vec2(1, 1), 2,
                                              {BoundaryTag::FARFIELD, BoundaryTag::FARFIELD,
                                               BoundaryTag::FARFIELD, BoundaryTag::FARFIELD});
    DGSpace space(2, mesh.degree);
    GeometryCache geom(mesh, space);
    BoundaryConditionSet bcs = BoundaryConditionSet::farfield(gas, 0.5, 2.0);
    DGContext ctx{&mesh, &space, &geom, &bcs, gas};
    DGField f = perturbed_freestream(mesh, space, bcs.freestream, 0.02);
    SparseMat A = assemble_jacobian(ctx, f);

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(ctx.n_dofs());
    CHECK((A * zero).norm() == 0.0);

    Eigen::VectorXd w1(ctx.n_dofs()), w2(ctx.n_dofs());
    for (int i = 0; i < w1.size(); ++i) {
        w1[i] = uniform(-1, 1);
        w2[i] = uniform(-1, 1);
    }
    Eigen::VectorXd lhs = A * (w1 + w2);
    Eigen::VectorXd rhs = A * w1 + A * w2;
    CHECK((lhs - rhs).norm() <= 1e-13 * std::max(1.0, rhs.norm()));
}
