#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weavehom/elasticity.hpp"
#include "weavehom/geometry.hpp"

namespace weavehom {

// In-plane index pairs are numbered J = 0, 1, 2 for (11), (22), (12).
inline constexpr std::array<std::array<int, 2>, 3> kPlanePairs{{{0, 0}, {1, 1}, {0, 1}}};
// Number of (alpha, beta) orderings represented by each J.
inline constexpr std::array<double, 3> kMultiplicity{1.0, 1.0, 2.0};

int plane_index(int alpha, int beta);

/// Unit strain M^J: diag(1,0,0), diag(0,1,0), or ones in both (1,2) slots.
Matrix3d unit_strain(int J);

struct CorrectorSet {
    std::array<DisplacementField, 3> chi_m;
    std::array<DisplacementField, 3> chi_b;
    std::array<SolveReport, 6> reports;
    ElementKind element = ElementKind::IncompatibleModes;
    double cell_volume = 0.0;
};

struct HomogenizationOptions {
    SolveOptions solve;
    ElementKind element = ElementKind::IncompatibleModes;
    double load_scale = 1.0; // 0 replaces every M^J by zero (debug)
};

/// Six periodic zero-mean cell problems with loads from M^J and -y3 M^J.
CorrectorSet solve_cell_problems(const CellMesh &mesh, const ElasticTensor &tensor,
                                 const HomogenizationOptions &options = {});

/// Plate tensors as 3x3 matrices over J in [11, 22, 12], holding tensor
/// components (no shear doubling). For a symmetric 2x2 strain z, the membrane
/// density is 1/2 v' a_hom v with v = (z11, z22, 2 z12).
struct PlateTensors {
    Matrix3d a_hom = Matrix3d::Zero();
    Matrix3d b_hom = Matrix3d::Zero();
    Matrix3d c_hom = Matrix3d::Zero();
    double cell_volume = 1.0;

    double a(int al, int be, int alp, int bep) const { return a_hom(plane_index(al, be), plane_index(alp, bep)); }
    double b(int al, int be, int alp, int bep) const { return b_hom(plane_index(al, be), plane_index(alp, bep)); }
    double c(int al, int be, int alp, int bep) const { return c_hom(plane_index(al, be), plane_index(alp, bep)); }
};

/// Linear-form evaluations of the same coefficients.
struct PlateTensorDiagnostics {
    Matrix3d a_linear = Matrix3d::Zero();    // <a (M + e chi_m) : M'>
    Matrix3d c_linear = Matrix3d::Zero();    // <a (-y3 M + e chi_b) : (-y3 M')>
    Matrix3d b_printed = Matrix3d::Zero();   // <a (y3 M + e chi_b) : M'>
    Matrix3d c_printed = Matrix3d::Zero();   // <a (y3 M + e chi_b) : y3 M'>
    double galerkin_a = 0.0;                 // max |A - a_linear| / ||A||
    double galerkin_c = 0.0;
    double printed_discrepancy = 0.0;        // max(|B - b_printed|, |C - c_printed|) / ||A||
};

PlateTensors compute_plate_tensors(const CellMesh &mesh, const CorrectorSet &correctors, const ElasticTensor &tensor,
                                   PlateTensorDiagnostics *diagnostics = nullptr);

struct IdentityCheck {
    std::string name;
    double value = 0.0; // normalized residual
    bool pass = false;
};

struct OrthotropyReport {
    std::vector<IdentityCheck> checks;
    bool all_pass() const;
};

/// b = 0, a1111 = a2222, a1112 = a2212 = 0 and the same for c, each relative
/// to the Frobenius norm of a_hom (resp. c_hom).
OrthotropyReport check_orthotropy(const PlateTensors &tensors, double tol);

/// Isotropy relations of a homogeneous solid plate: a1111 = a2222 and
/// a1111 - a1122 = 2 a1212 (same for c).
OrthotropyReport check_isotropy(const PlateTensors &tensors, double tol);

/// Corrector identities under the cell symmetries, with the component sign
/// rules of each map. Throws ContractError when the mesh is not invariant.
OrthotropyReport corrector_symmetry_report(const CellMesh &mesh, const CorrectorSet &correctors, double tol);

/// Eigenstrain e*(y) on the cell, symmetric.
struct PreStrainField {
    enum class Kind { Constant, PerTag, Sampled };
    Kind kind = Kind::Constant;
    Matrix3d constant = Matrix3d::Zero();
    std::map<int, Matrix3d> per_tag;
    std::function<Matrix3d(int tag, const Vec3 &y)> sampled; // evaluated at quadrature points

    static PreStrainField uniform(const Matrix3d &e);
    static PreStrainField by_tag(std::map<int, Matrix3d> table);
    static PreStrainField from_function(std::function<Matrix3d(int, const Vec3 &)> f);

    Matrix3d at(int tag, const Vec3 &y) const;
    /// Throws ParameterError for asymmetric or non-finite data.
    void validate() const;
};

struct PrestressResult {
    DisplacementField chi_p;
    Eigen::Matrix2d effective = Eigen::Matrix2d::Zero();  // consistent formula
    Eigen::Matrix2d printed = Eigen::Matrix2d::Zero();    // chi_p in the weighting bracket
    Eigen::Vector3d moment = Eigen::Vector3d::Zero();     // <a e* : (-y3 M^J + e chi_b_J)> / w_J
    SolveReport report;
};

PrestressResult solve_prestress(const CellMesh &mesh, const ElasticTensor &tensor, const PreStrainField &e_star,
                                const CorrectorSet &correctors, const PlateTensors &tensors,
                                const HomogenizationOptions &options = {});

/// One cell solve per macroscopic sample point; `field(x)` gives e* at x.
std::vector<PrestressResult> solve_prestress_samples(const CellMesh &mesh, const ElasticTensor &tensor,
                                                     const std::vector<Eigen::Vector2d> &samples,
                                                     const std::function<PreStrainField(const Eigen::Vector2d &)> &field,
                                                     const CorrectorSet &correctors, const PlateTensors &tensors,
                                                     const HomogenizationOptions &options = {});

} // namespace weavehom
