#include <numeric>
#include <sstream>

#include "weavehom/elasticity.hpp"
#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

int find_root(std::vector<int> &parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

} // namespace

ConstraintMap ConstraintMap::free(std::size_t n_nodes) {
    ConstraintMap c;
    c.master.resize(n_nodes);
    std::iota(c.master.begin(), c.master.end(), 0);
    c.fixed.assign(3 * n_nodes, 0);
    c.fixed_value.assign(3 * n_nodes, 0.0);
    return c;
}

ConstraintMap ConstraintMap::periodic(const CellMesh &mesh, bool mean_zero) {
    if (!mesh.periodic()) throw ContractError("periodic constraints need a periodic mesh");
    ConstraintMap c = free(mesh.num_nodes());
    std::vector<int> parent(c.master);
    for (const auto &p : mesh.periodic_pairs) {
        const int a = find_root(parent, p.slave);
        const int b = find_root(parent, p.master);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) c.master[n] = find_root(parent, static_cast<int>(n));
    if (mean_zero) {
        c.mean_weights.assign(mesh.num_nodes(), 0.0);
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            for (const auto &q : element_quadrature(mesh, e, ElementKind::Trilinear)) {
                for (int a = 0; a < 8; ++a) c.mean_weights[mesh.hexes[e][a]] += q.N[a] * q.dv;
            }
        }
    }
    return c;
}

void ConstraintMap::fix(int node, int component, double value) {
    if (node < 0 || 3 * static_cast<std::size_t>(node) >= fixed.size() || component < 0 || component > 2)
        throw ContractError("fix: dof out of range");
    fixed[3 * node + component] = 1;
    fixed_value[3 * node + component] = value;
}

bool ConstraintMap::has_fixed() const {
    return std::any_of(fixed.begin(), fixed.end(), [](char f) { return f != 0; });
}

void ConstraintMap::validate() const {
    if (fixed.size() != 3 * master.size() || fixed_value.size() != fixed.size())
        throw ContractError("constraint arrays have inconsistent sizes");
    for (std::size_t n = 0; n < master.size(); ++n) {
        const int m = master[n];
        if (m < 0 || static_cast<std::size_t>(m) >= master.size() || master[m] != m)
            throw ContractError("node " + std::to_string(n) + " has an unresolved periodic master");
        if (m != static_cast<int>(n)) {
            for (int c = 0; c < 3; ++c) {
                if (fixed[3 * n + c])
                    throw ContractError("dof of node " + std::to_string(n) + " is both periodic slave and fixed");
            }
        }
    }
    if (mean_zero() && has_fixed()) throw ContractError("zero-mean constraint combined with Dirichlet data");
    if (mean_zero() && mean_weights.size() != master.size())
        throw ContractError("mean weights do not match node count");
}

LoadFunctional strain_load(const CellMesh &mesh, const ElasticTensor &tensor,
                           std::function<Matrix3d(std::size_t, const Vec3 &)> strain, double scale) {
    LoadFunctional f;
    const CellMesh *m = &mesh;
    const ElasticTensor *t = &tensor;
    f.stress = [m, t, strain = std::move(strain), scale](std::size_t e, const Vec3 &y) -> Matrix3d {
        return scale * t->stress(strain(e, y), m->material_tag[e]);
    };
    return f;
}

SparseSystem assemble(const CellMesh &mesh, const ElasticTensor &tensor, const ConstraintMap &constraints,
                      const std::vector<LoadFunctional> &loads, ElementKind kind) {
    constraints.validate();
    if (constraints.master.size() != mesh.num_nodes()) throw ContractError("constraints do not match mesh");

    SparseSystem sys;
    sys.constraints = constraints;
    sys.element = kind;
    sys.n_nodes = mesh.num_nodes();
    sys.hexes = mesh.hexes;

    const std::size_t ndof = 3 * mesh.num_nodes();
    sys.reduced.assign(ndof, -1);
    int nred = 0;
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        if (constraints.master[n] != static_cast<int>(n)) continue;
        for (int c = 0; c < 3; ++c) {
            if (!constraints.fixed[3 * n + c]) {
                sys.reduced[3 * n + c] = nred++;
                sys.reduced_component.push_back(c);
            }
        }
    }
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        const int m = constraints.master[n];
        if (m == static_cast<int>(n)) continue;
        for (int c = 0; c < 3; ++c) sys.reduced[3 * n + c] = sys.reduced[3 * m + c];
    }

    const int nl = static_cast<int>(loads.size());
    const int ncol = std::max(nl, 1);
    sys.rhs = Eigen::MatrixXd::Zero(nred, ncol);
    const bool enhanced = kind == ElementKind::IncompatibleModes;
    if (enhanced) {
        sys.kaa_inv.resize(mesh.num_elements());
        sys.kau.resize(mesh.num_elements());
        sys.ra.resize(mesh.num_elements());
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_elements() * 576);

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto qd = element_quadrature(mesh, e, kind);
        const Matrix6d &C = tensor.voigt(mesh.material_tag[e]);
        Eigen::Matrix<double, 24, 24> Kuu = Eigen::Matrix<double, 24, 24>::Zero();
        Eigen::Matrix<double, 24, 9> Kua = Eigen::Matrix<double, 24, 9>::Zero();
        Eigen::Matrix<double, 9, 9> Kaa = Eigen::Matrix<double, 9, 9>::Zero();
        Eigen::MatrixXd fu = Eigen::MatrixXd::Zero(24, nl);
        Eigen::MatrixXd fa = Eigen::MatrixXd::Zero(9, nl);
        for (const auto &q : qd) {
            const Eigen::Matrix<double, 6, 24> CB = C * q.B;
            Kuu.noalias() += q.dv * q.B.transpose() * CB;
            if (enhanced) {
                Kua.noalias() += q.dv * CB.transpose() * q.G;
                Kaa.noalias() += q.dv * q.G.transpose() * C * q.G;
            }
            for (int l = 0; l < nl; ++l) {
                if (loads[l].stress) {
                    const Vector6d tau = to_voigt_stress(loads[l].stress(e, q.y));
                    fu.col(l).noalias() += q.dv * q.B.transpose() * tau;
                    if (enhanced) fa.col(l).noalias() += q.dv * q.G.transpose() * tau;
                }
                if (loads[l].body_force) {
                    const Vec3 f = loads[l].body_force(e, q.y);
                    for (int a = 0; a < 8; ++a) fu.col(l).segment<3>(3 * a) += q.dv * q.N[a] * f;
                }
            }
        }
        Eigen::Matrix<double, 24, 24> Ke = Kuu;
        Eigen::MatrixXd fe = fu;
        if (enhanced) {
            const Eigen::Matrix<double, 9, 9> Kinv = Kaa.ldlt().solve(Eigen::Matrix<double, 9, 9>::Identity());
            Ke.noalias() -= Kua * Kinv * Kua.transpose();
            if (nl > 0) fe.noalias() -= Kua * (Kinv * fa);
            sys.kaa_inv[e] = Kinv;
            sys.kau[e] = Kua.transpose();
            sys.ra[e] = fa;
        }

        int gdof[24];
        for (int a = 0; a < 8; ++a) {
            for (int c = 0; c < 3; ++c) gdof[3 * a + c] = 3 * mesh.hexes[e][a] + c;
        }
        for (int i = 0; i < 24; ++i) {
            const int ri = sys.reduced[gdof[i]];
            if (ri < 0) continue;
            for (int l = 0; l < nl; ++l) sys.rhs(ri, l) += fe(i, l);
            for (int j = 0; j < 24; ++j) {
                const int rj = sys.reduced[gdof[j]];
                if (rj >= 0) {
                    trip.emplace_back(ri, rj, Ke(i, j));
                } else {
                    const int mj = 3 * constraints.master[gdof[j] / 3] + gdof[j] % 3;
                    const double v = constraints.fixed_value[mj];
                    if (v != 0.0) {
                        for (int l = 0; l < ncol; ++l) sys.rhs(ri, l) -= Ke(i, j) * v;
                    }
                }
            }
        }
    }
    sys.K.resize(nred, nred);
    sys.K.setFromTriplets(trip.begin(), trip.end());
    sys.K.makeCompressed();
    return sys;
}

} // namespace weavehom
