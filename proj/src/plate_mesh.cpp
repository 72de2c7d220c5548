#include <cmath>
#include <sstream>

#include "weavehom/errors.hpp"
#include "weavehom/plate.hpp"
#include "weavehom/vtk.hpp"

namespace weavehom {

PlateMesh PlateMesh::build(int nx, int ny, double L) {
    if (nx < 1 || ny < 1) throw ParameterError("plate grid needs nx, ny >= 1");
    if (!(L > 0.0)) throw ParameterError("plate side length L must be positive");
    PlateMesh m;
    m.nx = nx;
    m.ny = ny;
    m.L = L;
    m.hx = L / nx;
    m.hy = L / ny;
    return m;
}

Eigen::Vector2d PlateMesh::coord(int n) const {
    const int i = n % (nx + 1), j = n / (nx + 1);
    // exact end points keep boundary data symmetric
    const double x = i == nx ? L : i * hx;
    const double y = j == ny ? L : j * hy;
    return {x, y};
}

PlateState PlateState::zero(const PlateMesh &mesh) {
    PlateState s;
    s.dofs = Eigen::VectorXd::Zero(kPlateDofs * mesh.num_nodes());
    return s;
}

double PlateState::max_abs_u3() const {
    double m = 0.0;
    for (Eigen::Index n = 0; n < dofs.size() / kPlateDofs; ++n) m = std::max(m, std::abs(dofs[kPlateDofs * n + kW]));
    return m;
}

void LoadSpec::validate(const PlateMesh &mesh) const {
    if (!f.allFinite()) throw ParameterError("plate.f must be finite");
    if (!prestrain.allFinite() || std::abs(prestrain(0, 1) - prestrain(1, 0)) > 1e-14 * (1 + prestrain.norm()))
        throw ParameterError("plate pre-strain must be finite and symmetric");
    const auto n = static_cast<std::size_t>(mesh.num_nodes());
    if (!f_nodal.empty() && f_nodal.size() != n) throw ParameterError("nodal force samples do not match the plate grid");
    if (!prestrain_nodal.empty() && prestrain_nodal.size() != n)
        throw ParameterError("nodal pre-strain samples do not match the plate grid");
    for (const auto &v : f_nodal)
        if (!v.allFinite()) throw ParameterError("nodal force samples must be finite");
    for (const auto &e : prestrain_nodal)
        if (!e.allFinite() || std::abs(e(0, 1) - e(1, 0)) > 1e-14 * (1 + e.norm()))
            throw ParameterError("nodal pre-strain samples must be finite and symmetric");
}

int BoundaryData::num_free() const {
    int n = 0;
    for (char f : fixed) n += !f;
    return n;
}

BoundaryData boundary_data(const PlateMesh &mesh, PlateBC bc, double e_star) {
    BoundaryData b;
    const int nd = kPlateDofs * mesh.num_nodes();
    b.fixed.assign(nd, 0);
    b.values = Eigen::VectorXd::Zero(nd);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        bool clamp = false;
        if (bc == PlateBC::Gamma) clamp = mesh.on_gamma(n);
        if (bc == PlateBC::Compression) clamp = mesh.on_gamma_d(n);
        if (!clamp) continue;
        for (int k = 0; k < kPlateDofs; ++k) b.fixed[kPlateDofs * n + k] = 1;
        if (bc == PlateBC::Compression) b.values[kPlateDofs * n + kU1] = e_star * (0.5 * mesh.L - mesh.coord(n)[0]);
    }
    return b;
}

PlateState lift_displacement(const PlateMesh &mesh, double e_star) {
    PlateState s = PlateState::zero(mesh);
    for (int n = 0; n < mesh.num_nodes(); ++n) s.at(n, kU1) = e_star * (0.5 * mesh.L - mesh.coord(n)[0]);
    return s;
}

void export_plate_vtk(const PlateProblem &problem, const PlateState &state, const std::string &path) {
    const PlateMesh &m = problem.mesh();
    std::vector<Vec3> pts(m.num_nodes());
    std::vector<Vec3> disp(m.num_nodes());
    for (int n = 0; n < m.num_nodes(); ++n) {
        const auto c = m.coord(n);
        pts[n] = Vec3(c[0], c[1], 0.0);
        disp[n] = Vec3(state.at(n, kU1), state.at(n, kU2), state.at(n, kW));
    }
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            cells.push_back({m.node(i, j), m.node(i + 1, j), m.node(i + 1, j + 1), m.node(i, j + 1)});
    write_vtk(path, pts, cells, 9, {{"U", disp}});
}

std::vector<std::pair<double, double>> centre_profile(const PlateProblem &problem, const PlateState &state, int n) {
    if (n < 2) throw ParameterError("profile needs at least two samples");
    std::vector<std::pair<double, double>> out;
    const double L = problem.mesh().L;
    for (int k = 0; k < n; ++k) {
        const double x = L * k / (n - 1);
        out.emplace_back(x, problem.evaluate(state.dofs, Eigen::Vector2d(x, 0.5 * L))[2]);
    }
    return out;
}

} // namespace weavehom
