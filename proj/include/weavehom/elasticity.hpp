#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "weavehom/geometry.hpp"

namespace weavehom {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;

// Voigt ordering [11, 22, 33, 23, 13, 12]; strains carry engineering shear
// (doubled off-diagonals), stresses do not.
Vector6d to_voigt_strain(const Matrix3d &s);
Matrix3d from_voigt_strain(const Vector6d &v);
Vector6d to_voigt_stress(const Matrix3d &s);
Matrix3d from_voigt_stress(const Vector6d &v);

/// Fourth-order elasticity tensor, constant per material tag. Stored as the
/// 6x6 Voigt matrix of tensor components, which makes the minor symmetries
/// hold by construction; the major symmetry is checked on construction.
class ElasticTensor {
public:
    enum class Kind { Isotropic, General };

    static ElasticTensor isotropic(double lambda, double mu);
    static ElasticTensor from_young_poisson(double E, double nu);
    /// Per-tag Voigt tables; tag -1 acts as the fallback for unlisted tags.
    static ElasticTensor general(std::map<int, Matrix6d> by_tag);

    Kind kind() const { return kind_; }
    bool is_isotropic() const { return kind_ == Kind::Isotropic; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }

    const Matrix6d &voigt(int tag) const;
    /// a_ijkl for the given tag.
    double component(int tag, int i, int j, int k, int l) const;
    Matrix3d stress(const Matrix3d &strain, int tag) const;
    /// Coercivity constant: smallest eigenvalue over tags of the tensor
    /// acting on symmetric matrices with the Frobenius inner product.
    double c0() const { return c0_; }
    const std::map<int, Matrix6d> &tables() const { return tables_; }

private:
    Kind kind_ = Kind::Isotropic;
    double lambda_ = 0.0, mu_ = 0.0;
    std::map<int, Matrix6d> tables_;
    double c0_ = 0.0;
};

/// Stored-energy density W(S) = 1/2 a S:S. Throws ContractError for
/// non-symmetric S.
double quadratic_form(const ElasticTensor &tensor, const Matrix3d &S, int tag = 0);

enum class ElementKind {
    Trilinear,         // 8-node, 2x2x2 Gauss
    IncompatibleModes, // same nodes plus condensed (1 - xi_i^2) modes
};

/// Nodal displacements plus, for IncompatibleModes, the condensed internal
/// amplitudes of every element (index 3*mode + component).
struct DisplacementField {
    std::vector<Vec3> nodal;
    std::vector<Eigen::Matrix<double, 9, 1>> enhanced;
};

/// Per-quadrature-point kinematics of a hex element.
struct QuadratureData {
    Vec3 y;
    double dv; // weight * det J
    Eigen::Matrix<double, 6, 24> B;
    Eigen::Matrix<double, 6, 9> G; // enhanced strain modes (zero for Trilinear)
    Eigen::Matrix<double, 8, 1> N;
};

std::array<QuadratureData, 8> element_quadrature(const CellMesh &mesh, std::size_t e, ElementKind kind);

/// Engineering Voigt strain of `field` at one quadrature point of element e.
Vector6d strain_at(const CellMesh &mesh, std::size_t e, const QuadratureData &q, const DisplacementField &field);

/// Linear functional w -> int tau(y) : e(w) dy + int f(y) . w dy.
struct LoadFunctional {
    std::function<Matrix3d(std::size_t elem, const Vec3 &y)> stress;
    std::function<Vec3(std::size_t elem, const Vec3 &y)> body_force;
};

/// Load w -> scale * int a S(y) : e(w) dy for a prescribed strain field S.
LoadFunctional strain_load(const CellMesh &mesh, const ElasticTensor &tensor,
                           std::function<Matrix3d(std::size_t elem, const Vec3 &y)> strain, double scale);

struct ConstraintMap {
    std::vector<int> master;          // representative node of every node
    std::vector<char> fixed;          // per dof 3*node + c
    std::vector<double> fixed_value;
    std::vector<double> mean_weights; // int N_n dy per node; empty without mean-zero rows

    static ConstraintMap free(std::size_t n_nodes);
    /// Periodic identification of opposite faces, optionally with zero mean.
    static ConstraintMap periodic(const CellMesh &mesh, bool mean_zero = true);

    void fix(int node, int component, double value);
    bool mean_zero() const { return !mean_weights.empty(); }
    bool has_fixed() const;
    /// Throws ContractError on a fixed slave, a master chain or mean-zero
    /// combined with Dirichlet data.
    void validate() const;
};

struct SparseSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> K;
    Eigen::MatrixXd rhs; // one column per load functional
    std::vector<int> reduced;          // per global dof, -1 when fixed
    std::vector<int> reduced_component;
    ConstraintMap constraints;
    ElementKind element = ElementKind::Trilinear;
    std::size_t n_nodes = 0;
    // static condensation data (IncompatibleModes only)
    std::vector<Eigen::Matrix<double, 9, 9>> kaa_inv;
    std::vector<Eigen::Matrix<double, 9, 24>> kau;
    std::vector<Eigen::MatrixXd> ra;
    std::vector<std::array<int, 8>> hexes;

    Eigen::Index size() const { return K.rows(); }
    /// Translations lie in the kernel (no Dirichlet data).
    bool translation_kernel() const { return !constraints.has_fixed(); }
};

/// Galerkin assembly with 2x2x2 Gauss quadrature; periodic slaves are
/// eliminated, Dirichlet values moved to the right-hand side.
SparseSystem assemble(const CellMesh &mesh, const ElasticTensor &tensor, const ConstraintMap &constraints,
                      const std::vector<LoadFunctional> &loads, ElementKind kind = ElementKind::IncompatibleModes);

enum class SolverKind { ConjugateGradient, Direct };

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 0; // 0: 20 * system size
    SolverKind kind = SolverKind::ConjugateGradient;
    bool track_energy = false;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> energy_trace; // 1/2 x'Kx - b'x after every iteration
};

/// Solves for load column `column`, expands to all nodes, recovers the
/// condensed amplitudes and enforces the zero mean when requested.
DisplacementField solve(const SparseSystem &system, int column = 0, const SolveOptions &options = {},
                        SolveReport *report = nullptr);

/// Jacobi-preconditioned conjugate gradients on a symmetric positive
/// (semi-)definite matrix with consistent right-hand side.
Eigen::VectorXd pcg(const Eigen::SparseMatrix<double, Eigen::RowMajor> &K, const Eigen::VectorXd &b,
                    const SolveOptions &options, SolveReport *report = nullptr);

/// Recomputes the condensed amplitudes of `field` for the given load column
/// (pass -1 for zero internal load).
void recover_enhanced(const SparseSystem &system, DisplacementField &field, int column);

struct PointState {
    Vec3 y;
    double weight; // dv
    int tag;
    Matrix3d strain;
    Matrix3d stress;
};

/// Symmetric gradient and stress at every quadrature point (element-major).
std::vector<PointState> strain_and_stress(const CellMesh &mesh, const ElasticTensor &tensor,
                                          const DisplacementField &field, ElementKind kind);

/// int W(e(u)) over the mesh.
double strain_energy(const CellMesh &mesh, const ElasticTensor &tensor, const DisplacementField &field,
                     ElementKind kind);

/// Zero field of the right shape for `mesh`.
DisplacementField zero_field(const CellMesh &mesh, ElementKind kind);

} // namespace weavehom
