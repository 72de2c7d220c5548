#include <cmath>

#include "weavehom/errors.hpp"
#include "weavehom/homogenizer.hpp"

namespace weavehom {

namespace {

// Linear part Q of each cell map y -> Q y + c.
Matrix3d linear_part(CellSymmetry s) {
    Matrix3d Q = Matrix3d::Zero();
    switch (s) {
    case CellSymmetry::MirrorY1:
        Q.diagonal() << -1, 1, 1;
        break;
    case CellSymmetry::MirrorY2:
        Q.diagonal() << 1, -1, 1;
        break;
    case CellSymmetry::SwapFlip:
        Q(0, 1) = Q(1, 0) = 1;
        Q(2, 2) = -1;
        break;
    case CellSymmetry::QuarterTurn:
        Q(0, 1) = -1;
        Q(1, 0) = 1;
        Q(2, 2) = 1;
        break;
    }
    return Q;
}

// Q' M^J Q = sign * M^{J'}.
std::pair<int, double> transformed_index(const Matrix3d &Q, int J) {
    const Matrix3d T = Q.transpose() * unit_strain(J) * Q;
    for (int K = 0; K < 3; ++K) {
        const Matrix3d M = unit_strain(K);
        if ((T - M).norm() < 1e-12) return {K, 1.0};
        if ((T + M).norm() < 1e-12) return {K, -1.0};
    }
    throw ContractError("cell map does not permute the in-plane unit strains");
}

const char *pair_name(int J) {
    static const char *names[3] = {"11", "22", "12"};
    return names[J];
}

IdentityCheck relative(const std::string &name, double num, double den, double tol) {
    IdentityCheck c;
    c.name = name;
    c.value = den > 0 ? std::abs(num) / den : std::abs(num);
    c.pass = c.value <= tol;
    return c;
}

} // namespace

bool OrthotropyReport::all_pass() const {
    for (const auto &c : checks)
        if (!c.pass) return false;
    return true;
}

OrthotropyReport check_orthotropy(const PlateTensors &t, double tol) {
    OrthotropyReport r;
    const double na = t.a_hom.norm();
    const double nc = t.c_hom.norm();
    r.checks.push_back(relative("b_zero", t.b_hom.cwiseAbs().maxCoeff(), na, tol));
    r.checks.push_back(relative("a1111_eq_a2222", t.a_hom(0, 0) - t.a_hom(1, 1), na, tol));
    r.checks.push_back(relative("a1112_zero", t.a_hom(0, 2), na, tol));
    r.checks.push_back(relative("a2212_zero", t.a_hom(1, 2), na, tol));
    r.checks.push_back(relative("c1111_eq_c2222", t.c_hom(0, 0) - t.c_hom(1, 1), nc, tol));
    r.checks.push_back(relative("c1112_zero", t.c_hom(0, 2), nc, tol));
    r.checks.push_back(relative("c2212_zero", t.c_hom(1, 2), nc, tol));
    return r;
}

OrthotropyReport check_isotropy(const PlateTensors &t, double tol) {
    OrthotropyReport r;
    const double na = t.a_hom.norm();
    const double nc = t.c_hom.norm();
    r.checks.push_back(relative("a1111_eq_a2222", t.a_hom(0, 0) - t.a_hom(1, 1), na, tol));
    r.checks.push_back(relative("a_isotropic_shear", t.a_hom(0, 0) - t.a_hom(0, 1) - 2 * t.a_hom(2, 2), na, tol));
    r.checks.push_back(relative("c1111_eq_c2222", t.c_hom(0, 0) - t.c_hom(1, 1), nc, tol));
    r.checks.push_back(relative("c_isotropic_shear", t.c_hom(0, 0) - t.c_hom(0, 1) - 2 * t.c_hom(2, 2), nc, tol));
    return r;
}

OrthotropyReport corrector_symmetry_report(const CellMesh &mesh, const CorrectorSet &cs, double tol) {
    OrthotropyReport r;
    for (auto s : {CellSymmetry::MirrorY1, CellSymmetry::MirrorY2, CellSymmetry::SwapFlip, CellSymmetry::QuarterTurn}) {
        const std::vector<int> map = symmetry_node_map(mesh, s);
        if (map.empty()) throw ContractError("mesh is not invariant under " + to_string(s));
        const Matrix3d Q = linear_part(s);
        for (int family = 0; family < 2; ++family) {
            const auto &fields = family == 0 ? cs.chi_m : cs.chi_b;
            // bending loads carry y3, which picks up the sign Q33
            const double y3_sign = family == 0 ? 1.0 : Q(2, 2);
            for (int J = 0; J < 3; ++J) {
                const auto [K, sign] = transformed_index(Q, J);
                const double sgn = sign * y3_sign;
                const auto &src = fields[J].nodal;
                const auto &dst = fields[K].nodal;
                double res = 0.0, scale = 0.0;
                for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
                    const Vec3 mapped = Q.transpose() * src[map[n]];
                    res = std::max(res, (mapped - sgn * dst[n]).cwiseAbs().maxCoeff());
                    scale = std::max(scale, dst[n].cwiseAbs().maxCoeff());
                }
                std::string name = to_string(s) + ": chi_" + (family == 0 ? "m_" : "b_") + pair_name(J) + " -> " +
                                   (sgn < 0 ? "-" : "") + "chi_" + (family == 0 ? "m_" : "b_") + pair_name(K);
                r.checks.push_back(relative(name, res, scale, tol));
            }
        }
    }
    return r;
}

} // namespace weavehom
