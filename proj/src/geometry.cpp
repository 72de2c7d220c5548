#include "weavehom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <unordered_map>

#include "weavehom/errors.hpp"
#include "weavehom/hex_shape.hpp"

namespace weavehom {

namespace {

void check_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 0.25)) {
        std::ostringstream os;
        os << "kappa must lie in (0, 1/4), got " << kappa;
        throw ParameterError(os.str());
    }
}

// Reduces z to [0,1] using period 2 and the mirror rule; `sign` receives the
// derivative factor of the reduction.
double reduce(double z, double &sign) {
    z = z - 2.0 * std::floor(z / 2.0);
    sign = 1.0;
    if (z > 1.0) {
        z = 2.0 - z;
        sign = -1.0;
    }
    return z;
}

// Quantized-coordinate hash used to merge coincident nodes.
class PointIndex {
public:
    explicit PointIndex(double tol) : tol_(tol), cell_(4.0 * tol) {}

    int find(const Vec3 &p) const {
        const auto k = key(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = buckets_.find(pack(k[0] + dx, k[1] + dy, k[2] + dz));
                    if (it == buckets_.end()) continue;
                    for (const auto &[id, q] : it->second)
                        if ((q - p).cwiseAbs().maxCoeff() <= tol_) return id;
                }
        return -1;
    }

    void insert(int id, const Vec3 &p) {
        const auto k = key(p);
        buckets_[pack(k[0], k[1], k[2])].emplace_back(id, p);
    }

private:
    std::array<std::int64_t, 3> key(const Vec3 &p) const {
        return {static_cast<std::int64_t>(std::floor(p[0] / cell_)),
                static_cast<std::int64_t>(std::floor(p[1] / cell_)),
                static_cast<std::int64_t>(std::floor(p[2] / cell_))};
    }
    static std::uint64_t pack(std::int64_t a, std::int64_t b, std::int64_t c) {
        const auto m = [](std::int64_t v) { return static_cast<std::uint64_t>(v) & 0x1FFFFFull; };
        return (m(a) << 42) | (m(b) << 21) | m(c);
    }

    double tol_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::pair<int, Vec3>>> buckets_;
};

std::vector<double> uniform(double a, double b, int n) {
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
    v[n] = b;
    return v;
}

// Axial node coordinates (unit period) of a yarn spanning [0, 2N]. Flat
// pieces around every integer carry `cross` elements, curved pieces `axial`.
std::vector<double> axial_grid(int n_half_periods, double kappa, const Resolution &res) {
    std::vector<double> g{0.0};
    const auto append = [&g](double a, double b, int n) {
        auto v = uniform(a, b, n);
        g.insert(g.end(), v.begin() + 1, v.end());
    };
    for (int k = 0; k <= n_half_periods; ++k) {
        const double lo = std::max(0.0, k - kappa);
        const double hi = std::min<double>(n_half_periods, k + kappa);
        const bool full = (k > 0 && k < n_half_periods);
        append(k == 0 ? 0.0 : lo, hi, full ? res.cross : res.cross / 2);
        if (k < n_half_periods) append(k + kappa, k + 1 - kappa, res.axial);
    }
    return g;
}

// Cross-section offsets of yarn `index`, clipped to the patch [0, 2N].
std::vector<double> cross_offsets(int index, int n_half_periods, double kappa, const Resolution &res) {
    if (index == 0) return uniform(0.0, kappa, res.cross / 2);
    if (index == n_half_periods) return uniform(-kappa, 0.0, res.cross / 2);
    return uniform(-kappa, kappa, res.cross);
}

struct MeshBuilder {
    CellMesh mesh;
    PointIndex index;
    std::vector<unsigned> owners; // bit 0: direction 1, bit 1: direction 2

    explicit MeshBuilder(double tol) : index(tol) {}

    int add_node(const Vec3 &p, int direction) {
        int id = index.find(p);
        if (id < 0) {
            id = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(p);
            owners.push_back(0u);
            index.insert(id, p);
        }
        owners[id] |= (direction == 1 ? 1u : 2u);
        return id;
    }
};

// Unit-cell yarn map (epsilon = 1) with the direction-1 frame.
Vec3 beam_point_unit(double axial, double cross, double thick, double sign, double kappa) {
    const double h = sign * profile(axial, kappa);
    const double dh = sign * profile_derivative(axial, kappa);
    const double s = std::sqrt(1.0 + dh * dh);
    return {axial - thick * dh / s, cross, h + thick / s};
}

void add_yarn_block(MeshBuilder &b, int direction, int index, int n_half, double kappa, double eps,
                    const Resolution &res) {
    const auto ax = axial_grid(n_half, kappa, res);
    const auto cr = cross_offsets(index, n_half, kappa, res);
    const auto th = uniform(-kappa, kappa, res.thick);
    // direction 1: sign (-1)^(q+1); direction 2: (-1)^p
    const double sign = (direction == 1) ? ((index % 2 == 0) ? -1.0 : 1.0) : ((index % 2 == 0) ? 1.0 : -1.0);

    // lattice axes follow x1, x2, x3 so the hexes are right-handed
    const std::size_t n1 = direction == 1 ? ax.size() : cr.size();
    const std::size_t n2 = direction == 1 ? cr.size() : ax.size();
    const std::size_t n3 = th.size();
    std::vector<int> ids(n1 * n2 * n3);
    const auto lid = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * n2 + j) * n1 + i; };
    for (std::size_t k = 0; k < n3; ++k)
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t i = 0; i < n1; ++i) {
                Vec3 p;
                if (direction == 1) {
                    p = beam_point_unit(ax[i], index + cr[j], th[k], sign, kappa);
                } else {
                    const Vec3 q = beam_point_unit(ax[j], index + cr[i], th[k], sign, kappa);
                    p = Vec3(q[1], q[0], q[2]);
                }
                ids[lid(i, j, k)] = b.add_node(eps * p, direction);
            }
    for (std::size_t k = 0; k + 1 < n3; ++k)
        for (std::size_t j = 0; j + 1 < n2; ++j)
            for (std::size_t i = 0; i + 1 < n1; ++i) {
                b.mesh.hexes.push_back({ids[lid(i, j, k)], ids[lid(i + 1, j, k)], ids[lid(i + 1, j + 1, k)],
                                        ids[lid(i, j + 1, k)], ids[lid(i, j, k + 1)], ids[lid(i + 1, j, k + 1)],
                                        ids[lid(i + 1, j + 1, k + 1)], ids[lid(i, j + 1, k + 1)]});
                b.mesh.material_tag.push_back(direction);
            }
}

void pair_periodic_faces(CellMesh &mesh) {
    const double tol = 1e-8 * mesh.epsilon;
    PointIndex idx(tol);
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) idx.insert(static_cast<int>(n), mesh.nodes[n]);
    for (int axis = 0; axis < 2; ++axis) {
        const double P = mesh.period[axis];
        for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
            if (std::abs(mesh.nodes[n][axis] - P) > tol) continue;
            Vec3 q = mesh.nodes[n];
            q[axis] -= P;
            const int m = idx.find(q);
            if (m < 0) {
                std::ostringstream os;
                os << "periodic face node " << n << " has no partner on the opposite face (axis " << axis + 1 << ")";
                throw GeometryError(os.str());
            }
            mesh.periodic_pairs.push_back({static_cast<int>(n), m, axis});
        }
    }
}

void check_positive_jacobians(const CellMesh &mesh) {
    const auto gp = hex::gauss2();
    for (std::size_t e = 0; e < mesh.hexes.size(); ++e)
        for (const auto &g : gp)
            if (hex_jacobian(mesh, e, g.xi) <= 0.0) {
                std::ostringstream os;
                os << "non-positive Jacobian in element " << e;
                throw GeometryError(os.str());
            }
}

CellMesh build_weave(double eps, int n_periods, const WeaveParams &params) {
    const double kappa = params.kappa;
    const auto &res = params.resolution;
    const int n_half = 2 * n_periods;
    MeshBuilder b(1e-8 * eps);
    b.mesh.kappa = kappa;
    b.mesh.epsilon = eps;
    for (int q = 0; q <= n_half; ++q) add_yarn_block(b, 1, q, n_half, kappa, eps, res);
    for (int p = 0; p <= n_half; ++p) add_yarn_block(b, 2, p, n_half, kappa, eps, res);

    // contact nodes grouped by crossing, crossings ordered by (p, q)
    std::map<std::pair<long, long>, std::vector<int>> crossings;
    for (std::size_t n = 0; n < b.mesh.nodes.size(); ++n) {
        if (b.owners[n] != 3u) continue;
        const auto &x = b.mesh.nodes[n];
        crossings[{std::lround(x[0] / eps), std::lround(x[1] / eps)}].push_back(static_cast<int>(n));
    }
    for (auto &[key, nodes] : crossings) b.mesh.contact_faces.push_back(std::move(nodes));
    return std::move(b.mesh);
}

} // namespace

void WeaveParams::validate() const {
    check_kappa(kappa);
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(L > 0.0)) throw ParameterError("L must be positive");
    if (n_periods < 1) throw ParameterError("n_periods must be >= 1");
    if (resolution.axial < 1 || resolution.cross < 1 || resolution.thick < 1)
        throw ParameterError("resolution entries must be >= 1");
    if (resolution.cross % 2 != 0) throw ParameterError("resolution.cross must be even");
}

double profile(double z, double kappa) {
    check_kappa(kappa);
    double sign;
    z = reduce(z, sign);
    if (z <= kappa) return -kappa;
    if (z >= 1.0 - kappa) return kappa;
    const double w = 1.0 - 2.0 * kappa;
    const double t = (z - kappa) / w;
    return kappa * (6.0 * t * t - 4.0 * t * t * t - 1.0);
}

double profile_derivative(double z, double kappa) {
    check_kappa(kappa);
    double sign;
    z = reduce(z, sign);
    if (z <= kappa || z >= 1.0 - kappa) return 0.0;
    const double w = 1.0 - 2.0 * kappa;
    const double t = (z - kappa) / w;
    return sign * kappa * (12.0 * t - 12.0 * t * t) / w;
}

Vec3 middle_line(int direction, int index, double s, const WeaveParams &params) {
    check_kappa(params.kappa);
    if (direction != 1 && direction != 2) throw ParameterError("direction must be 1 or 2");
    if (index < 0 || index > 2 * params.n_periods) throw ParameterError("yarn index out of range");
    const double eps = params.epsilon;
    const double phi = eps * profile(s / eps, params.kappa);
    if (direction == 1) return {s, index * eps, (index % 2 == 0 ? -1.0 : 1.0) * phi};
    return {index * eps, s, (index % 2 == 0 ? 1.0 : -1.0) * phi};
}

Vec3 yarn_map(int direction, int index, const Vec3 &z, const WeaveParams &params) {
    const double eps = params.epsilon;
    const double half = params.kappa * eps * (1.0 + 1e-12);
    const double cross = direction == 1 ? z[1] : z[0];
    if (std::abs(cross) > half || std::abs(z[2]) > half)
        throw ContractError("yarn_map: point outside the reference beam section");
    const double axial = direction == 1 ? z[0] : z[1];
    const Vec3 m = middle_line(direction, index, axial, params);
    const double sign = direction == 1 ? (index % 2 == 0 ? -1.0 : 1.0) : (index % 2 == 0 ? 1.0 : -1.0);
    const double dh = sign * profile_derivative(axial / eps, params.kappa);
    const double s = std::sqrt(1.0 + dh * dh);
    if (direction == 1) return m + Vec3(0.0, cross, 0.0) + z[2] * Vec3(-dh / s, 0.0, 1.0 / s);
    return m + Vec3(cross, 0.0, 0.0) + z[2] * Vec3(0.0, -dh / s, 1.0 / s);
}

double CellMesh::volume() const {
    const auto gp = hex::gauss2();
    double v = 0.0;
    for (std::size_t e = 0; e < hexes.size(); ++e)
        for (const auto &g : gp) v += g.weight * hex_jacobian(*this, e, g.xi);
    return v;
}

double hex_jacobian(const CellMesh &mesh, std::size_t e, const Vec3 &xi) {
    Eigen::Matrix<double, 3, 8> X;
    for (int a = 0; a < 8; ++a) X.col(a) = mesh.nodes[mesh.hexes[e][a]];
    return hex::jacobian(X, xi).determinant();
}

CellMesh build_cell_mesh(const WeaveParams &params) {
    params.validate();
    if (params.resolution.cross / 2 < 1 || params.resolution.axial < 1)
        throw RefinementError("resolution too coarse to represent a contact square");
    WeaveParams unit = params;
    unit.epsilon = 1.0;
    CellMesh mesh = build_weave(1.0, 1, unit);
    mesh.period = {2.0, 2.0};
    check_positive_jacobians(mesh);
    pair_periodic_faces(mesh);
    return mesh;
}

CellMesh build_solid_cell_mesh(const WeaveParams &params, int nx, int ny, int nz) {
    check_kappa(params.kappa);
    if (nx < 1 || ny < 1 || nz < 1) throw ParameterError("solid cell grid counts must be >= 1");
    CellMesh mesh;
    mesh.kappa = params.kappa;
    mesh.period = {2.0, 2.0};
    const auto xs = uniform(0.0, 2.0, nx);
    const auto ys = uniform(0.0, 2.0, ny);
    const auto zs = uniform(-2.0 * params.kappa, 2.0 * params.kappa, nz);
    const auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) mesh.nodes.emplace_back(xs[i], ys[j], zs[k]);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                mesh.hexes.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                                      id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                                      id(i, j + 1, k + 1)});
                mesh.material_tag.push_back(0);
            }
    pair_periodic_faces(mesh);
    return mesh;
}

CellMesh build_textile_mesh(const WeaveParams &params) {
    params.validate();
    if (params.resolution.cross / 2 < 1 || params.resolution.axial < 1)
        throw RefinementError("resolution too coarse to represent a contact square");
    CellMesh mesh = build_weave(params.epsilon, params.n_periods, params);
    check_positive_jacobians(mesh);
    const double tol = 1e-8 * params.epsilon;
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
        if (std::abs(mesh.nodes[n][1]) <= tol) mesh.clamped_nodes.push_back(static_cast<int>(n));
    return mesh;
}

CellMesh warped(const CellMesh &mesh, const std::function<Vec3(const Vec3 &)> &warp) {
    CellMesh out = mesh;
    for (auto &x : out.nodes) x = warp(x);
    return out;
}

std::size_t predicted_cell_node_count(const Resolution &res) {
    const std::size_t half = res.cross / 2;
    // axial nodes of a yarn spanning one cell: 2 half flats, 1 full flat, 2 curved
    const std::size_t axial_elems = 2 * half + res.cross + 2 * res.axial;
    const std::size_t na = axial_elems + 1;
    const std::size_t nt = res.thick + 1;
    const std::size_t full = res.cross + 1;
    const std::size_t part = half + 1;
    const std::size_t per_direction = na * nt * (full + 2 * part);
    // merged nodes: one full square, four half squares, four quarter squares
    const std::size_t merged = full * full + 4 * full * part + 4 * part * part;
    return 2 * per_direction - merged;
}

Vec3 apply_symmetry(CellSymmetry s, const Vec3 &y) {
    switch (s) {
    case CellSymmetry::MirrorY1: return {2.0 - y[0], y[1], y[2]};
    case CellSymmetry::MirrorY2: return {y[0], 2.0 - y[1], y[2]};
    case CellSymmetry::SwapFlip: return {y[1], y[0], -y[2]};
    case CellSymmetry::QuarterTurn: return {1.0 - y[1], y[0], y[2]};
    }
    return y;
}

std::string to_string(CellSymmetry s) {
    switch (s) {
    case CellSymmetry::MirrorY1: return "mirror_y1";
    case CellSymmetry::MirrorY2: return "mirror_y2";
    case CellSymmetry::SwapFlip: return "swap_flip";
    case CellSymmetry::QuarterTurn: return "quarter_turn";
    }
    return "?";
}

std::vector<int> symmetry_node_map(const CellMesh &mesh, CellSymmetry s, double tol) {
    const auto wrap = [&mesh](Vec3 p) {
        for (int a = 0; a < 2; ++a) {
            const double P = mesh.period[a];
            if (P <= 0.0) continue;
            p[a] -= P * std::floor(p[a] / P);
            if (p[a] > P - 1e-9) p[a] = 0.0;
        }
        return p;
    };
    PointIndex idx(tol);
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
        const Vec3 w = wrap(mesh.nodes[n]);
        if (idx.find(w) < 0) idx.insert(static_cast<int>(n), w);
    }
    std::vector<int> map(mesh.nodes.size());
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
        const int m = idx.find(wrap(apply_symmetry(s, mesh.nodes[n])));
        if (m < 0) return {};
        map[n] = m;
    }
    return map;
}

MeshCheck check_cell_mesh(const CellMesh &mesh, bool check_symmetry) {
    MeshCheck r;
    const auto gp = hex::gauss2();
    r.min_jacobian = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.hexes.size(); ++e)
        for (const auto &g : gp) r.min_jacobian = std::min(r.min_jacobian, hex_jacobian(mesh, e, g.xi));
    if (!(r.min_jacobian > 0.0)) {
        r.positive_jacobian = false;
        r.messages.push_back("non-positive Jacobian at a quadrature point");
    }

    if (mesh.periodic()) {
        const double tol = 1e-10 * mesh.epsilon;
        for (int axis = 0; axis < 2; ++axis) {
            std::vector<int> lo, hi;
            for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
                if (std::abs(mesh.nodes[n][axis]) <= tol) lo.push_back(static_cast<int>(n));
                if (std::abs(mesh.nodes[n][axis] - mesh.period[axis]) <= tol) hi.push_back(static_cast<int>(n));
            }
            std::vector<int> masters, slaves;
            for (const auto &p : mesh.periodic_pairs) {
                if (p.axis != axis) continue;
                masters.push_back(p.master);
                slaves.push_back(p.slave);
                Vec3 d = mesh.nodes[p.slave] - mesh.nodes[p.master];
                d[axis] -= mesh.period[axis];
                if (d.cwiseAbs().maxCoeff() > tol) {
                    r.periodic_bijection = false;
                    r.messages.push_back("periodic pair offset differs from the period");
                    break;
                }
            }
            std::sort(masters.begin(), masters.end());
            std::sort(slaves.begin(), slaves.end());
            if (masters != lo || slaves != hi) {
                r.periodic_bijection = false;
                r.messages.push_back("periodic pairing is not a bijection between opposite faces (axis " +
                                     std::to_string(axis + 1) + ")");
            }
        }
    }

    if (check_symmetry && mesh.periodic()) {
        for (auto s : {CellSymmetry::MirrorY1, CellSymmetry::MirrorY2, CellSymmetry::SwapFlip,
                       CellSymmetry::QuarterTurn}) {
            if (symmetry_node_map(mesh, s).empty()) {
                r.symmetric = false;
                r.messages.push_back("mesh not invariant under " + to_string(s));
            }
        }
    }

    // merged contact nodes lie on the plane x3 = 0 and no duplicates remain
    const double ptol = 1e-10 * mesh.epsilon;
    for (const auto &face : mesh.contact_faces)
        for (int n : face)
            if (std::abs(mesh.nodes[n][2]) > ptol) {
                r.contact_conforming = false;
                r.messages.push_back("contact node off the contact plane");
                break;
            }
    PointIndex idx(1e-8 * mesh.epsilon);
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
        if (idx.find(mesh.nodes[n]) >= 0) {
            r.contact_conforming = false;
            r.messages.push_back("duplicate node " + std::to_string(n));
            break;
        }
        idx.insert(static_cast<int>(n), mesh.nodes[n]);
    }
    return r;
}

} // namespace weavehom
