#include "nsshape/mesh.hpp"
#include "nsshape/mesh_io.hpp"
#include "nsshape/perturbation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace nsshape;

TEST_CASE("NACA0012 thickness polynomial") {
    AirfoilGeometry open = AirfoilGeometry::naca0012(false);
    AirfoilGeometry closed = AirfoilGeometry::naca0012(true);
    CHECK(open.half_thickness(0.0) == 0.0);
    CHECK(closed.half_thickness(0.0) == 0.0);
    CHECK(closed.half_thickness(1.0) == Catch::Approx(0.0).margin(1e-16));
    CHECK(open.half_thickness(1.0) > 1e-4); // open TE has finite thickness
    // max thickness about 12% of chord near x = 0.3
    CHECK(2.0 * closed.half_thickness(0.3) == Catch::Approx(0.12).epsilon(2e-2));
}

TEST_CASE("NACA O-mesh: paper-scale mesh has 40 wall edges with 5 nodes each") {
    AirfoilGeometry airfoil = AirfoilGeometry::naca0012();
    CurvilinearMesh mesh = generate_naca_omesh(airfoil, 40, 6, 10.0, 4);
    CHECK(mesh.n_wall_edges == 40);
    const int n1 = mesh.degree + 1;
    CHECK(n1 == 5);
    for (int e = 0; e < mesh.n_wall_edges; ++e) {
        const auto& be = mesh.boundary_edges[e];
        REQUIRE(be.face == 0);
        // the 5 wall-face geometry nodes lie on the airfoil curve
        const auto& en = mesh.elem_nodes[be.elem];
        for (int a = 0; a < n1; ++a) {
            const Vec2& X = mesh.nodes[en[a]];
            CHECK(std::abs(std::abs(X[1]) - airfoil.half_thickness(std::clamp(X[0], 0.0, 1.0))) <=
                  1e-12);
        }
    }
    // structured O-mesh face bookkeeping
    CHECK(mesh.n_elements() == 40 * 6);
    CHECK(static_cast<int>(mesh.interior_faces.size()) == 40 * (2 * 6 - 1));
    CHECK(static_cast<int>(mesh.boundary_edges.size()) == 2 * 40);
    mesh.check_positive_jacobians();
}

TEST_CASE("mesh generation rejects bad configuration") {
    AirfoilGeometry airfoil = AirfoilGeometry::naca0012();
    CHECK_THROWS_AS(generate_naca_omesh(airfoil, 6, 6, 10.0, 4), ConfigError);
    CHECK_THROWS_AS(generate_naca_omesh(airfoil, 16, 6, 5.0, 4), ConfigError);
    CHECK_THROWS_AS(generate_naca_omesh(airfoil, 16, 6, 10.0, 7), ConfigError);
}

TEST_CASE("surface frames on a circle of radius 2: K = 1/2") {
    CurvilinearMesh disk = generate_disk_mesh(48, 3, 2.0, 4);
    CHECK(disk.n_wall_edges == 48);
    for (int e = 0; e < disk.n_wall_edges; ++e)
        for (double xi : {0.12, 0.5, 0.9}) {
            SurfaceFrame f = disk.frame(e, xi);
            CHECK(f.n.norm() == Catch::Approx(1.0).margin(1e-12));
            CHECK(std::abs(f.n.dot(f.t)) <= 1e-12);
            CHECK(f.K == Catch::Approx(0.5).margin(1e-6));
            // outward normal: aligned with the radius
            CHECK(f.n.dot(f.point.normalized()) == Catch::Approx(1.0).margin(1e-6));
            CHECK(f.point.norm() == Catch::Approx(2.0).margin(1e-7));
        }
}

TEST_CASE("straight edges have exactly zero curvature") {
    CurvilinearMesh rect = generate_rect_mesh(3, 2, Vec2(0, 0), Vec2(1, 1), 3,
                                              {BoundaryTag::WALL_ADIA, BoundaryTag::FARFIELD,
                                               BoundaryTag::FARFIELD, BoundaryTag::FARFIELD});
    for (size_t e = 0; e < rect.boundary_edges.size(); ++e)
        for (double xi : {0.2, 0.7}) {
            SurfaceFrame f = rect.frame(static_cast<int>(e), xi);
            CHECK(std::abs(f.K) <= 1e-12);
            CHECK(f.n.norm() == Catch::Approx(1.0).margin(1e-14));
        }
}

TEST_CASE("wall arc measure of the unit circle sums to 2 pi") {
    for (int edges : {8, 16, 32}) {
        CurvilinearMesh disk = generate_disk_mesh(edges, 2, 1.0, 4);
        const QuadRule1D rule = gauss_legendre(8);
        double total = 0.0;
        for (int e = 0; e < disk.n_wall_edges; ++e)
            for (int qp = 0; qp < rule.size(); ++qp) {
                SurfaceFrame f = disk.frame(e, 0.5 * (rule.x[qp] + 1.0));
                total += 0.5 * rule.w[qp] * f.ds_dxi;
            }
        CHECK(total == Catch::Approx(2.0 * kPi).margin(1e-8));
    }
}

TEST_CASE("NACA wall normals point out of the fluid, into the body") {
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 16, 4, 10.0, 4);
    bool checked_upper = false, checked_lower = false;
    for (int e = 0; e < mesh.n_wall_edges; ++e) {
        SurfaceFrame f = mesh.frame(e, 0.5);
        if (f.point[1] > 0.03) {
            CHECK(f.n[1] < 0.0);
            checked_upper = true;
        }
        if (f.point[1] < -0.03) {
            CHECK(f.n[1] > 0.0);
            checked_lower = true;
        }
    }
    CHECK(checked_upper);
    CHECK(checked_lower);
}

TEST_CASE("quartic bump profile") {
    CHECK(quartic_bump_profile(0.0) == 0.0);
    CHECK(quartic_bump_profile(1.0) == 0.0);
    CHECK(quartic_bump_profile(0.5) == Catch::Approx(1.0).epsilon(1e-15));
    // zero slope at the ends keeps the perturbed profile C^1
    const double eps = 1e-6;
    CHECK(quartic_bump_profile(eps) / eps <= 32.0 * eps * 1.01);
    CHECK(quartic_bump_profile(1.0 - eps) / eps <= 32.0 * eps * 1.01);
}

TEST_CASE("bump requires a wall edge") {
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 16, 4, 10.0, 2);
    auto proj = std::make_shared<WallProjection>(mesh);
    CHECK_THROWS_AS(quartic_bump(proj, mesh.n_wall_edges + 3, 1e-3), GeometryError);
    CHECK_NOTHROW(quartic_bump(proj, 5, 1e-3));
}

TEST_CASE("deformation: identity at t=0, reverses exactly, inflates the disk") {
    CurvilinearMesh disk = generate_disk_mesh(32, 3, 1.0, 4);
    auto proj = std::make_shared<WallProjection>(disk);

    SECTION("t = 0 keeps node coordinates bitwise") {
        PerturbationField V = quartic_bump(proj, 2, 1e-2, 0.5);
        CurvilinearMesh same = deform_mesh(disk, V, 0.0);
        for (size_t i = 0; i < disk.nodes.size(); ++i) {
            CHECK(same.nodes[i][0] == disk.nodes[i][0]);
            CHECK(same.nodes[i][1] == disk.nodes[i][1]);
        }
    }

    SECTION("zero-amplitude field leaves the wall curve unchanged") {
        PerturbationField V = quartic_bump(proj, 2, 0.0, 0.5);
        CurvilinearMesh same = deform_mesh(disk, V, 0.7);
        for (size_t i = 0; i < disk.nodes.size(); ++i)
            CHECK((same.nodes[i] - disk.nodes[i]).norm() == 0.0);
    }

    SECTION("V = n with t = 0.1 moves the boundary to radius 1.1") {
        PerturbationField V = uniform_normal_field(proj, 1.0, 0.45);
        CurvilinearMesh grown = deform_mesh(disk, V, 0.1);
        const int n1 = grown.degree + 1;
        for (int e = 0; e < grown.n_wall_edges; ++e) {
            const auto& be = grown.boundary_edges[e];
            // face-1 node ids: column a = degree
            for (int b = 0; b < n1; ++b) {
                REQUIRE(be.face == 1);
                const Vec2& X = grown.nodes[grown.elem_nodes[be.elem][b * n1 + grown.degree]];
                CHECK(X.norm() == Catch::Approx(1.1).margin(1e-12));
            }
        }
    }

    SECTION("forward then backward deformation restores coordinates") {
        PerturbationField V = quartic_bump(proj, 4, 5e-2, 0.5);
        CurvilinearMesh there = deform_mesh(disk, V, 0.3);
        CurvilinearMesh back = deform_mesh(there, V, -0.3);
        for (size_t i = 0; i < disk.nodes.size(); ++i)
            CHECK((back.nodes[i] - disk.nodes[i]).norm() <= 1e-12);
    }

    SECTION("an inverting deformation reports the admissible range") {
        PerturbationField V = uniform_normal_field(proj, 1.0, 0.6);
        CHECK_THROWS_WITH(deform_mesh(disk, V, -0.9),
                          Catch::Matchers::ContainsSubstring("max admissible"));
    }
}

TEST_CASE("mesh file round trip is lossless") {
    CurvilinearMesh mesh = generate_naca_omesh(AirfoilGeometry::naca0012(), 12, 3, 10.0, 3);
    std::ostringstream s1;
    write_mesh(mesh, s1);
    std::istringstream in(s1.str());
    CurvilinearMesh mesh2 = read_mesh(in);
    REQUIRE(mesh2.nodes.size() == mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        CHECK(mesh2.nodes[i][0] == mesh.nodes[i][0]);
        CHECK(mesh2.nodes[i][1] == mesh.nodes[i][1]);
    }
    CHECK(mesh2.n_wall_edges == mesh.n_wall_edges);
    CHECK(mesh2.interior_faces.size() == mesh.interior_faces.size());
    std::ostringstream s2;
    write_mesh(mesh2, s2);
    CHECK(s1.str() == s2.str());
}
