#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "weavehom/elasticity.hpp"
#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

constexpr int kVoigt[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};

double mandel_min_eigenvalue(const Matrix6d &C) {
    // Voigt stiffness -> Mandel form (orthonormal basis of symmetric matrices)
    Vector6d s;
    s << 1, 1, 1, std::sqrt(2.0), std::sqrt(2.0), std::sqrt(2.0);
    const Matrix6d M = s.asDiagonal() * C * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix6d> es(M);
    return es.eigenvalues().minCoeff();
}

} // namespace

Vector6d to_voigt_strain(const Matrix3d &s) {
    Vector6d v;
    v << s(0, 0), s(1, 1), s(2, 2), s(1, 2) + s(2, 1), s(0, 2) + s(2, 0), s(0, 1) + s(1, 0);
    return v;
}

Matrix3d from_voigt_strain(const Vector6d &v) {
    Matrix3d s;
    s << v[0], 0.5 * v[5], 0.5 * v[4], 0.5 * v[5], v[1], 0.5 * v[3], 0.5 * v[4], 0.5 * v[3], v[2];
    return s;
}

Vector6d to_voigt_stress(const Matrix3d &s) {
    Vector6d v;
    v << s(0, 0), s(1, 1), s(2, 2), 0.5 * (s(1, 2) + s(2, 1)), 0.5 * (s(0, 2) + s(2, 0)), 0.5 * (s(0, 1) + s(1, 0));
    return v;
}

Matrix3d from_voigt_stress(const Vector6d &v) {
    Matrix3d s;
    s << v[0], v[5], v[4], v[5], v[1], v[3], v[4], v[3], v[2];
    return s;
}

ElasticTensor ElasticTensor::isotropic(double lambda, double mu) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0)) {
        std::ostringstream os;
        os << "isotropic tensor not coercive: lambda=" << lambda << ", mu=" << mu;
        throw ParameterError(os.str());
    }
    ElasticTensor t;
    t.kind_ = Kind::Isotropic;
    t.lambda_ = lambda;
    t.mu_ = mu;
    Matrix6d C = Matrix6d::Zero();
    C.topLeftCorner<3, 3>().setConstant(lambda);
    for (int i = 0; i < 3; ++i) {
        C(i, i) += 2.0 * mu;
        C(3 + i, 3 + i) = mu;
    }
    t.tables_[-1] = C;
    t.c0_ = std::min(2.0 * mu, 3.0 * lambda + 2.0 * mu);
    return t;
}

ElasticTensor ElasticTensor::from_young_poisson(double E, double nu) {
    if (!(E > 0.0)) throw ParameterError("Young's modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5)) throw ParameterError("Poisson ratio must lie in (-1, 1/2)");
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = E / (2.0 * (1.0 + nu));
    return isotropic(lambda, mu);
}

ElasticTensor ElasticTensor::general(std::map<int, Matrix6d> by_tag) {
    if (by_tag.empty()) throw ParameterError("general tensor needs at least one table");
    ElasticTensor t;
    t.kind_ = Kind::General;
    t.c0_ = std::numeric_limits<double>::infinity();
    for (auto &[tag, C] : by_tag) {
        const double scale = C.cwiseAbs().maxCoeff();
        if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw ParameterError("elastic table for tag " + std::to_string(tag) + " violates a_ijkl = a_klij");
        }
        C = 0.5 * (C + C.transpose()).eval();
        const double c0 = mandel_min_eigenvalue(C);
        if (!(c0 > 0.0))
            throw ParameterError("elastic table for tag " + std::to_string(tag) + " is not positive definite");
        t.c0_ = std::min(t.c0_, c0);
    }
    t.tables_ = std::move(by_tag);
    return t;
}

const Matrix6d &ElasticTensor::voigt(int tag) const {
    auto it = tables_.find(tag);
    if (it != tables_.end()) return it->second;
    it = tables_.find(-1);
    if (it != tables_.end()) return it->second;
    throw ContractError("no elastic table for material tag " + std::to_string(tag));
}

double ElasticTensor::component(int tag, int i, int j, int k, int l) const {
    return voigt(tag)(kVoigt[i][j], kVoigt[k][l]);
}

Matrix3d ElasticTensor::stress(const Matrix3d &strain, int tag) const {
    return from_voigt_stress(voigt(tag) * to_voigt_strain(strain));
}

double quadratic_form(const ElasticTensor &tensor, const Matrix3d &S, int tag) {
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractError("quadratic_form: argument is not symmetric");
    const Vector6d v = to_voigt_strain(S);
    return 0.5 * v.dot(tensor.voigt(tag) * v);
}

} // namespace weavehom
