#include <sstream>

#include "weavehom/elasticity.hpp"
#include "weavehom/errors.hpp"
#include "weavehom/hex_shape.hpp"

namespace weavehom {

namespace {

// Engineering strain columns of the displacement g_scalar * e_c.
void strain_columns(const Eigen::RowVector3d &g, int c, Eigen::Ref<Vector6d> col) {
    col.setZero();
    switch (c) {
    case 0:
        col[0] = g[0];
        col[4] = g[2];
        col[5] = g[1];
        break;
    case 1:
        col[1] = g[1];
        col[3] = g[2];
        col[5] = g[0];
        break;
    default:
        col[2] = g[2];
        col[3] = g[1];
        col[4] = g[0];
        break;
    }
}

} // namespace

std::array<QuadratureData, 8> element_quadrature(const CellMesh &mesh, std::size_t e, ElementKind kind) {
    Eigen::Matrix<double, 3, 8> X;
    for (int a = 0; a < 8; ++a) X.col(a) = mesh.nodes[mesh.hexes[e][a]];

    const Eigen::Matrix3d J0 = hex::jacobian(X, Vec3::Zero());
    const double det0 = J0.determinant();
    const Eigen::Matrix3d J0inv = J0.inverse();

    std::array<QuadratureData, 8> out;
    const auto gp = hex::gauss2();
    for (int q = 0; q < 8; ++q) {
        const Vec3 &xi = gp[q].xi;
        const Eigen::Matrix<double, 8, 3> dN = hex::shape_gradient(xi);
        const Eigen::Matrix3d J = X * dN;
        const double det = J.determinant();
        if (!(det > 0.0)) {
            std::ostringstream os;
            os << "element " << e << " has non-positive Jacobian " << det;
            throw GeometryError(os.str());
        }
        const Eigen::Matrix<double, 8, 3> dNdx = dN * J.inverse();
        auto &d = out[q];
        d.N = hex::shape(xi);
        d.y = X * d.N;
        d.dv = gp[q].weight * det;
        for (int a = 0; a < 8; ++a) {
            for (int c = 0; c < 3; ++c) strain_columns(dNdx.row(a), c, d.B.col(3 * a + c));
        }
        d.G.setZero();
        if (kind == ElementKind::IncompatibleModes) {
            for (int i = 0; i < 3; ++i) {
                Eigen::RowVector3d gxi = Eigen::RowVector3d::Zero();
                gxi[i] = -2.0 * xi[i];
                const Eigen::RowVector3d gx = (det0 / det) * gxi * J0inv;
                for (int c = 0; c < 3; ++c) strain_columns(gx, c, d.G.col(3 * i + c));
            }
        }
    }
    return out;
}

Vector6d strain_at(const CellMesh &mesh, std::size_t e, const QuadratureData &q, const DisplacementField &field) {
    Eigen::Matrix<double, 24, 1> u;
    for (int a = 0; a < 8; ++a) u.segment<3>(3 * a) = field.nodal[mesh.hexes[e][a]];
    Vector6d s = q.B * u;
    if (!field.enhanced.empty()) s += q.G * field.enhanced[e];
    return s;
}

DisplacementField zero_field(const CellMesh &mesh, ElementKind kind) {
    DisplacementField f;
    f.nodal.assign(mesh.num_nodes(), Vec3::Zero());
    if (kind == ElementKind::IncompatibleModes)
        f.enhanced.assign(mesh.num_elements(), Eigen::Matrix<double, 9, 1>::Zero());
    return f;
}

std::vector<PointState> strain_and_stress(const CellMesh &mesh, const ElasticTensor &tensor,
                                          const DisplacementField &field, ElementKind kind) {
    if (field.nodal.size() != mesh.num_nodes()) throw ContractError("field does not match mesh");
    std::vector<PointState> out;
    out.reserve(8 * mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto qd = element_quadrature(mesh, e, kind);
        const int tag = mesh.material_tag[e];
        for (const auto &q : qd) {
            const Vector6d s = strain_at(mesh, e, q, field);
            PointState p;
            p.y = q.y;
            p.weight = q.dv;
            p.tag = tag;
            p.strain = from_voigt_strain(s);
            p.stress = from_voigt_stress(tensor.voigt(tag) * s);
            out.push_back(p);
        }
    }
    return out;
}

double strain_energy(const CellMesh &mesh, const ElasticTensor &tensor, const DisplacementField &field,
                     ElementKind kind) {
    double w = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto qd = element_quadrature(mesh, e, kind);
        const Matrix6d &C = tensor.voigt(mesh.material_tag[e]);
        for (const auto &q : qd) {
            const Vector6d s = strain_at(mesh, e, q, field);
            w += 0.5 * q.dv * s.dot(C * s);
        }
    }
    return w;
}

} // namespace weavehom
