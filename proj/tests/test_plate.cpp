#include <cmath>
#include <random>

#include <doctest.h>

#include "weavehom/errors.hpp"
#include "weavehom/plate.hpp"

using namespace weavehom;

namespace {

PlateTensors iso_tensors(double bscale = 0.0) {
    PlateTensors t;
    const double nu = 0.3, q = 1.0 / (1 - nu * nu);
    t.a_hom << q, nu * q, 0, nu * q, q, 0, 0, 0, 0.5 * (1 - nu) * q;
    t.c_hom = 0.01 * t.a_hom;
    t.b_hom << 0.1, 0.02, 0.03, -0.01, 0.05, 0.0, 0.04, 0.01, 0.02;
    t.b_hom *= bscale;
    return t;
}

Eigen::VectorXd random_state(Eigen::Index n, unsigned seed, double scale) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = d(gen);
    return x;
}

} // namespace

TEST_CASE("plate energy basics") {
    const PlateMesh mesh = PlateMesh::build(4, 4, 1.0);
    const PlateProblem p(mesh, iso_tensors(), LoadSpec{});
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.size());
    CHECK(p.energy(zero) == 0.0);
    CHECK(p.gradient(zero).norm() == 0.0);
    CHECK(p.quadrature_points_per_element() == 16);

    const double es = 0.01;
    const PlateState lift = lift_displacement(mesh, es);
    CHECK(lift.at(mesh.node(0, 2), kU1) == doctest::Approx(0.005));
    CHECK(lift.at(mesh.node(4, 2), kU1) == doctest::Approx(-0.005));
    CHECK(p.energy(lift.dofs) == doctest::Approx(0.5 * p.tensors().a_hom(0, 0) * es * es).epsilon(1e-12));
    for (const auto &e : p.membrane_strains(lift.dofs)) {
        CHECK(e[0] == doctest::Approx(-es));
        CHECK(std::abs(e[1]) < 1e-15);
        CHECK(std::abs(e[2]) < 1e-15);
    }
    CHECK(lift_displacement(mesh, 0.0).dofs.norm() == 0.0);

    // E(t x) is a quartic in t
    const Eigen::VectorXd x = random_state(p.size(), 7, 0.3);
    std::array<double, 6> e{};
    for (int t = 0; t < 6; ++t) e[t] = p.energy(t * x);
    // fifth finite difference of a quartic vanishes
    const double d5 = e[5] - 5 * e[4] + 10 * e[3] - 10 * e[2] + 5 * e[1] - e[0];
    CHECK(std::abs(d5) < 1e-9 * std::abs(e[5]));
    const double d4 = e[4] - 4 * e[3] + 6 * e[2] - 4 * e[1] + e[0];
    CHECK(std::abs(d4) > 1e-6 * std::abs(e[4]));

    PlateTensors bad = iso_tensors();
    bad.a_hom(0, 0) = std::nan("");
    CHECK_THROWS_AS(PlateProblem(mesh, bad, LoadSpec{}), ContractError);
    LoadSpec asym;
    asym.prestrain(0, 1) = 1.0;
    CHECK_THROWS_AS(PlateProblem(mesh, iso_tensors(), asym), ParameterError);
    CHECK_THROWS_AS(PlateMesh::build(0, 3, 1.0), ParameterError);
    CHECK_THROWS_AS(p.energy(Eigen::VectorXd::Zero(3)), ContractError);
}

TEST_CASE("plate gradient and Hessian match finite differences") {
    const PlateMesh mesh = PlateMesh::build(3, 3, 2.0);
    LoadSpec load;
    load.f << 0.1, -0.2, 0.3;
    load.prestrain << 0.01, 0.002, 0.002, -0.005;
    const PlateProblem p(mesh, iso_tensors(1.0), load);
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const Eigen::VectorXd x = random_state(p.size(), seed, 0.2);
        const Eigen::VectorXd v = random_state(p.size(), seed + 100, 1.0);
        const Eigen::VectorXd g = p.gradient(x);
        const double h = 1e-5;
        const double fd = (p.energy(x + h * v) - p.energy(x - h * v)) / (2 * h);
        CHECK(std::abs(fd - g.dot(v)) <= 1e-6 * std::abs(g.dot(v)));
        const Eigen::SparseMatrix<double> H = p.hessian(x);
        const Eigen::VectorXd Hv = H * v;
        const Eigen::VectorXd fdH = (p.gradient(x + h * v) - p.gradient(x - h * v)) / (2 * h);
        CHECK((fdH - Hv).norm() <= 1e-5 * Hv.norm());
        const Eigen::VectorXd w = random_state(p.size(), seed + 200, 1.0);
        CHECK(std::abs(w.dot(H * v) - v.dot(H * w)) <= 1e-12 * (1 + std::abs(w.dot(H * v))));
    }
    // load gradient does not depend on the state
    const PlateProblem unloaded(mesh, iso_tensors(1.0), LoadSpec{});
    LoadSpec fonly;
    fonly.f = load.f;
    const PlateProblem loaded(mesh, iso_tensors(1.0), fonly);
    const Eigen::VectorXd a = random_state(p.size(), 3, 0.2), b = random_state(p.size(), 4, 0.2);
    const Eigen::VectorXd da = loaded.gradient(a) - unloaded.gradient(a);
    const Eigen::VectorXd db = loaded.gradient(b) - unloaded.gradient(b);
    CHECK((da - db).norm() < 1e-12 * da.norm());
}

TEST_CASE("flat-state Hessian is linear stiffness plus geometric term") {
    const PlateMesh mesh = PlateMesh::build(4, 4, 1.0);
    LoadSpec load;
    load.prestrain << 0.02, 0.0, 0.0, 0.01;
    const PlateProblem vk(mesh, iso_tensors(), load);
    const PlateProblem lin(mesh, iso_tensors(), load, PlateModel::Linear);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(vk.size());
    const Eigen::SparseMatrix<double> diff = vk.hessian(zero) - lin.hessian(zero);
    // the difference acts on U3 only: -A e* through the geometric term
    const Eigen::VectorXd v = random_state(vk.size(), 9, 1.0);
    Eigen::VectorXd vu = v, vw = v;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        vw[kPlateDofs * n + kU1] = vw[kPlateDofs * n + kU2] = 0.0;
        for (int k = kW; k < kPlateDofs; ++k) vu[kPlateDofs * n + k] = 0.0;
    }
    CHECK((diff * vu).norm() == 0.0);
    // second derivative of the energy difference along a pure U3 direction
    // the difference is even and quartic in s, so Richardson removes the s^4 term
    const auto delta = [&](double s) { return vk.energy(s * vw) - lin.energy(s * vw); };
    const auto second = [&](double s) { return (delta(s) + delta(-s) - 2 * delta(0.0)) / (s * s); };
    const double fd = (4 * second(1e-2) - second(2e-2)) / 3;
    const double q = vw.dot(diff * vw);
    CHECK(q != 0.0);
    CHECK(std::abs(fd - q) <= 1e-5 * std::abs(q));
    // symmetric difference matrix
    CHECK((Eigen::MatrixXd(diff) - Eigen::MatrixXd(diff).transpose()).norm() < 1e-12);
}

TEST_CASE("linear plate solves") {
    const PlateMesh mesh = PlateMesh::build(8, 8, 1.0);
    const PlateProblem zero(mesh, iso_tensors(), LoadSpec{}, PlateModel::Linear);
    CHECK(solve_linear(zero, boundary_data(mesh, PlateBC::Gamma)).dofs.norm() == 0.0);

    LoadSpec load;
    load.f << 0, 0, 1;
    const PlateProblem p(mesh, iso_tensors(), load, PlateModel::Linear);
    const BoundaryData bc = boundary_data(mesh, PlateBC::Gamma);
    const PlateState s = solve_linear(p, bc);
    CHECK(p.energy(s.dofs) < 0.0);
    // clamped edge stays clamped, deflection grows away from it
    for (int i = 0; i <= mesh.nx; ++i)
        for (int k = 0; k < kPlateDofs; ++k) CHECK(s.at(mesh.node(i, 0), k) == 0.0);
    CHECK(s.at(mesh.node(4, 8), kW) > s.at(mesh.node(4, 4), kW));
    CHECK(s.at(mesh.node(4, 4), kW) > 0.0);

    // b = 0 decouples in-plane and bending blocks
    const Eigen::SparseMatrix<double> H = p.hessian(s.dofs);
    double cross = 0.0;
    for (int k = 0; k < H.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(H, k); it; ++it) {
            const bool ru = it.row() % kPlateDofs < kW, cu = it.col() % kPlateDofs < kW;
            if (ru != cu) cross = std::max(cross, std::abs(it.value()));
        }
    CHECK(cross <= 1e-12);

    CHECK_THROWS_AS(solve_linear(PlateProblem(mesh, iso_tensors(), load), bc), ContractError);
}

TEST_CASE("free in-plane translations only change the load term") {
    const PlateMesh mesh = PlateMesh::build(3, 3, 1.0);
    LoadSpec load;
    load.f << 0.5, -0.25, 0.0;
    const PlateProblem p(mesh, iso_tensors(1.0), load);
    const PlateProblem unloaded(mesh, iso_tensors(1.0), LoadSpec{});
    const Eigen::VectorXd x = random_state(p.size(), 5, 0.1);
    Eigen::VectorXd y = x;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        y[kPlateDofs * n + kU1] += 0.3;
        y[kPlateDofs * n + kU2] -= 0.7;
    }
    CHECK(unloaded.energy(y) == doctest::Approx(unloaded.energy(x)).epsilon(1e-12));
    const double area = mesh.L * mesh.L;
    CHECK(p.energy(y) - p.energy(x) == doctest::Approx(-(0.5 * 0.3 + 0.25 * 0.7) * area).epsilon(1e-10));
}

TEST_CASE("von Karman minimization") {
    const PlateMesh mesh = PlateMesh::build(6, 6, 1.0);
    const PlateProblem flat(mesh, iso_tensors(), LoadSpec{});
    const MinimizeResult r0 = minimize_vk(flat, PlateBC::Gamma);
    CHECK(r0.energy == 0.0);
    CHECK(r0.state.max_abs_u3() < 1e-12);

    // small loads agree with the linear plate to second order
    const BoundaryData bc = boundary_data(mesh, PlateBC::Gamma);
    double dev[2];
    const double fs[2] = {1e-4, 1e-3};
    for (int k = 0; k < 2; ++k) {
        LoadSpec load;
        load.f << 0, 0, fs[k];
        const PlateProblem vk(mesh, iso_tensors(), load);
        const PlateProblem lin(mesh, iso_tensors(), load, PlateModel::Linear);
        const MinimizeResult r = minimize_vk(vk, PlateBC::Gamma);
        const PlateState s = solve_linear(lin, bc);
        dev[k] = (r.state.dofs - s.dofs).norm();
        for (std::size_t i = 1; i < r.energy_trace.size(); ++i) CHECK(r.energy_trace[i] <= r.energy_trace[i - 1]);
    }
    // deviation grows like |f|^2
    CHECK(dev[1] / dev[0] > 50.0);
    CHECK(dev[1] / dev[0] < 200.0);
}

TEST_CASE("manufactured solution converges at second order") {
    const double L = 1.0, k = M_PI / L;
    // clamped on x2 = 0: w = y^2 sin(k x) cos-type, in-plane zero
    const PlateProblem::ExactFn u = [k](const Eigen::Vector2d &p) {
        PlateProblem::ExactField f{};
        const double sx = std::sin(k * p[0]), cx = std::cos(k * p[0]);
        const double y = p[1], y2 = y * y;
        f.w = y2 * sx;
        f.w_x = k * y2 * cx;
        f.w_y = 2 * y * sx;
        f.w_xx = -k * k * y2 * sx;
        f.w_yy = 2 * sx;
        f.w_xy = 2 * k * y * cx;
        return f;
    };
    double err[3];
    const int grids[3] = {8, 16, 32};
    for (int g = 0; g < 3; ++g) {
        const PlateMesh mesh = PlateMesh::build(grids[g], grids[g], L);
        const PlateProblem p(mesh, iso_tensors(), LoadSpec{}, PlateModel::Linear);
        err[g] = manufactured_error(p, boundary_data(mesh, PlateBC::Gamma), u);
    }
    const double rate = std::log(err[0] / err[2]) / std::log(4.0);
    INFO("errors " << err[0] << " " << err[1] << " " << err[2]);
    // bicubic Hermite bending converges at order two; the slope approaches it from below
    CHECK(rate >= 1.95);
    CHECK(rate <= 2.1);
    CHECK(err[2] < err[1]);
}

TEST_CASE("compression buckles above threshold") {
    const PlateMesh mesh = PlateMesh::build(8, 8, M_PI);
    PlateTensors t = iso_tensors();
    const PlateProblem p(mesh, t, LoadSpec{});
    const MinimizeResult low = minimize_vk(p, PlateBC::Compression, 0.001);
    CHECK(low.state.max_abs_u3() <= 1e-9 * M_PI);
    const MinimizeResult high = minimize_vk(p, PlateBC::Compression, 0.2);
    const double flat = p.energy(lift_displacement(mesh, 0.2).dofs);
    CHECK(high.energy < flat);
    CHECK(high.state.max_abs_u3() > 1e-3);
    REQUIRE(high.start_energies.size() >= 1);
}
