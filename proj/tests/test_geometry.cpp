#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "weavehom/errors.hpp"
#include "weavehom/geometry.hpp"
#include "weavehom/vtk.hpp"

using namespace weavehom;

TEST_CASE("profile pieces") {
    CHECK(profile(0.05, 0.1) == doctest::Approx(-0.1));
    CHECK(profile(0.5, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(profile(0.9, 0.1) == doctest::Approx(0.1));
    CHECK(profile(1.5, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(profile(1.95, 0.1) == doctest::Approx(-0.1));
    CHECK(profile(2.05, 0.1) == doctest::Approx(profile(0.05, 0.1)));
    CHECK_THROWS_AS(profile(0.5, 0.3), ParameterError);
    CHECK_THROWS_AS(profile(0.5, 0.0), ParameterError);
}

TEST_CASE("profile is bounded, antiperiodic and C1") {
    const double k = 0.1;
    for (int i = 0; i <= 2000; ++i) {
        const double z = 2.0 * i / 2000.0;
        CHECK(std::abs(profile(z, k)) <= k + 1e-15);
        CHECK(profile(z + 1.0, k) == doctest::Approx(-profile(z, k)).epsilon(1e-12));
    }
    for (double z0 : {k, 1.0 - k, 1.0, 1.0 + k}) {
        double prev = 1e9;
        for (double h : {1e-2, 1e-3, 1e-4}) {
            const double left = (profile(z0, k) - profile(z0 - h, k)) / h;
            const double right = (profile(z0 + h, k) - profile(z0, k)) / h;
            const double jump = std::abs(right - left);
            CHECK(jump <= prev);
            prev = jump;
        }
        CHECK(prev < 1e-3);
    }
    for (double z : {0.2, 0.45, 0.7, 1.3}) {
        const double h = 1e-6;
        const double fd = (profile(z + h, k) - profile(z - h, k)) / (2 * h);
        CHECK(profile_derivative(z, k) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("middle lines") {
    WeaveParams p;
    p.kappa = 0.1;
    p.epsilon = 0.1;
    p.n_periods = 2;
    const Vec3 a = middle_line(1, 0, 0.0, p);
    CHECK(a[0] == doctest::Approx(0.0));
    CHECK(a[1] == doctest::Approx(0.0));
    CHECK(a[2] == doctest::Approx(0.01));
    const Vec3 b = middle_line(2, 0, 0.0, p);
    CHECK(b[2] == doctest::Approx(-0.01));
    for (double s : {0.0, 0.013, 0.07, 0.15}) {
        const Vec3 d = middle_line(1, 1, s + 2 * p.epsilon, p) - middle_line(1, 1, s, p);
        CHECK(d[0] == doctest::Approx(2 * p.epsilon));
        CHECK(std::abs(d[1]) < 1e-14);
        CHECK(std::abs(d[2]) < 1e-14);
    }
    CHECK_THROWS_AS(middle_line(3, 0, 0.0, p), ParameterError);
    CHECK_THROWS_AS(middle_line(1, 5, 0.0, p), ParameterError);
}

TEST_CASE("yarn map framing and injectivity") {
    WeaveParams p;
    p.kappa = 0.1;
    p.epsilon = 1.0;
    p.n_periods = 1;
    for (double s : {0.05, 0.3, 0.77}) {
        const Vec3 m = middle_line(1, 1, s, p);
        CHECK((yarn_map(1, 1, Vec3(s, 0, 0), p) - m).norm() < 1e-14);
    }
    const Vec3 flat = yarn_map(1, 0, Vec3(0.05, 0, 0.1), p) - middle_line(1, 0, 0.05, p);
    CHECK(flat.isApprox(Vec3(0, 0, 0.1)));
    CHECK_THROWS(yarn_map(1, 0, Vec3(0.5, 0.2, 0), p));

    // finite-difference Jacobian sampling
    const double h = 1e-6;
    for (int dir : {1, 2}) {
        for (int i = 0; i <= 20; ++i) {
            for (double z2 : {-0.09, 0.0, 0.09}) {
                for (double z3 : {-0.09, 0.0, 0.09}) {
                    const double s = 2.0 * i / 20.0;
                    Vec3 z = dir == 1 ? Vec3(s, z2, z3) : Vec3(z2, s, z3);
                    Eigen::Matrix3d J;
                    for (int c = 0; c < 3; ++c) {
                        Vec3 zp = z, zm = z;
                        zp[c] += h;
                        zm[c] -= h;
                        J.col(c) = (yarn_map(dir, 1, zp, p) - yarn_map(dir, 1, zm, p)) / (2 * h);
                    }
                    CHECK(J.determinant() > 0.0);
                }
            }
        }
    }

    // distinct parameters never collide
    std::vector<Vec3> pts;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k)
                pts.push_back(yarn_map(1, 1, Vec3(0.01 + 1.9 * i / 14.0, -0.08 + 0.04 * j, -0.08 + 0.04 * k), p));
    double dmin = 1e9;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) dmin = std::min(dmin, (pts[a] - pts[b]).norm());
    CHECK(dmin > 1e-12);
}

TEST_CASE("cell mesh invariants and node count") {
    WeaveParams p;
    p.kappa = 0.1;
    p.resolution = {8, 2, 2};
    const CellMesh mesh = build_cell_mesh(p);
    const MeshCheck chk = check_cell_mesh(mesh);
    for (const auto &m : chk.messages) MESSAGE(m);
    CHECK(chk.ok());
    CHECK(chk.min_jacobian > 0.0);
    CHECK(mesh.num_nodes() == predicted_cell_node_count(p.resolution));
    // crossings (p, q) with p, q in {0, 1, 2}; boundary ones are partial squares
    CHECK(mesh.contact_faces.size() == 9);
    for (const auto &face : mesh.contact_faces) {
        for (int n : face) CHECK(std::abs(mesh.nodes[n][2]) < 1e-10);
    }
    // same spacing: 2*(axial + cross) elements per period, 2*thick through the height
    const int nxy = 2 * (p.resolution.axial + p.resolution.cross);
    const CellMesh solid = build_solid_cell_mesh(p, nxy, nxy, 2 * p.resolution.thick);
    CHECK(solid.num_elements() > mesh.num_elements());
    CHECK(mesh.volume() < solid.volume());
}

TEST_CASE("cell mesh at other resolutions") {
    for (Resolution r : {Resolution{4, 2, 1}, Resolution{6, 4, 2}, Resolution{10, 2, 3}}) {
        WeaveParams p;
        p.kappa = 0.15;
        p.resolution = r;
        const CellMesh mesh = build_cell_mesh(p);
        CHECK(check_cell_mesh(mesh).ok());
        CHECK(mesh.num_nodes() == predicted_cell_node_count(r));
    }
}

TEST_CASE("cell mesh rejects coarse or odd resolutions") {
    WeaveParams p;
    p.resolution = {8, 1, 2};
    CHECK_THROWS_AS(build_cell_mesh(p), Error);
    p.resolution = {0, 2, 2};
    CHECK_THROWS_AS(build_cell_mesh(p), Error);
    p.resolution = {8, 2, 2};
    p.kappa = 0.3;
    CHECK_THROWS_AS(build_cell_mesh(p), ParameterError);
}

TEST_CASE("solid cell mesh arithmetic") {
    WeaveParams p;
    p.kappa = 0.1;
    const CellMesh m = build_solid_cell_mesh(p, 8, 8, 4);
    CHECK(m.num_elements() == 256);
    CHECK(m.volume() == doctest::Approx(1.6));
    int per_axis[2] = {0, 0};
    for (const auto &pp : m.periodic_pairs) ++per_axis[pp.axis];
    // one face of (ny+1)(nz+1) nodes per direction
    CHECK(per_axis[0] == 9 * 5);
    CHECK(per_axis[1] == 9 * 5);
    CHECK(check_cell_mesh(m).ok());
}

TEST_CASE("textile mesh tiling") {
    WeaveParams p;
    p.kappa = 0.1;
    p.resolution = {4, 2, 1};
    p.n_periods = 1;
    p.epsilon = 0.5;
    const CellMesh cell = build_cell_mesh(p);
    const CellMesh t1 = build_textile_mesh(p);
    CHECK(t1.num_elements() == cell.num_elements());
    for (std::size_t n = 0; n < t1.num_nodes(); ++n) {
        CHECK((t1.nodes[n] - p.epsilon * cell.nodes[n]).norm() < 1e-12);
    }
    p.n_periods = 2;
    p.epsilon = 0.25;
    const CellMesh t2 = build_textile_mesh(p);
    CHECK(t2.num_elements() == 4 * t1.num_elements());
    CHECK(!t2.periodic());
    CHECK(!t2.clamped_nodes.empty());
    for (int n : t2.clamped_nodes) CHECK(std::abs(t2.nodes[n][1]) < 1e-12);
    // no duplicate nodes
    std::set<std::tuple<long, long, long>> keys;
    for (const auto &x : t2.nodes) {
        keys.insert({std::lround(x[0] * 1e7), std::lround(x[1] * 1e7), std::lround(x[2] * 1e7)});
    }
    CHECK(keys.size() == t2.num_nodes());
    CHECK(t2.contact_faces.size() == 25);
}

TEST_CASE("symmetry maps leave the cell mesh invariant") {
    WeaveParams p;
    const CellMesh mesh = build_cell_mesh(p);
    for (auto s : {CellSymmetry::MirrorY1, CellSymmetry::MirrorY2, CellSymmetry::SwapFlip, CellSymmetry::QuarterTurn}) {
        const auto map = symmetry_node_map(mesh, s);
        REQUIRE(map.size() == mesh.num_nodes());
    }
    const CellMesh bent = warped(mesh, [](const Vec3 &y) { return Vec3(y[0], y[1], y[2] + 0.2 * y[2] * y[2]); });
    CHECK(symmetry_node_map(bent, CellSymmetry::SwapFlip).empty());
    CHECK(!symmetry_node_map(bent, CellSymmetry::MirrorY1).empty());
}

TEST_CASE("vtk round trip") {
    WeaveParams p;
    p.resolution = {4, 2, 1};
    const CellMesh mesh = build_cell_mesh(p);
    const auto dir = std::filesystem::temp_directory_path() / "weavehom_vtk_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "cell.vtk").string();
    std::vector<Vec3> f(mesh.num_nodes());
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = mesh.nodes[n] * 0.5;
    export_vtk(mesh, {{"chi_m_11", f}}, path);
    const VtkGrid g = read_vtk(path);
    REQUIRE(g.points.size() == mesh.num_nodes());
    CHECK(g.cells.size() == mesh.num_elements());
    double err = 0.0;
    for (std::size_t n = 0; n < g.points.size(); ++n) err = std::max(err, (g.points[n] - mesh.nodes[n]).norm());
    CHECK(err <= 1e-12);
    REQUIRE(g.fields.size() == 1);
    CHECK(g.fields[0].name == "chi_m_11");

    export_vtk(mesh, {}, path);
    CHECK(read_vtk(path).fields.empty());
    CHECK_THROWS_AS(export_vtk(mesh, {}, "/nonexistent_dir/x.vtk"), IoError);
    std::filesystem::remove_all(dir);
}
