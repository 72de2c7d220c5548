#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "weavehom/homogenizer.hpp"

namespace weavehom {

/// Structured nx x ny rectangle grid on (0,L)^2. Node (i, j) has index
/// j*(nx+1) + i and sits at (i*hx, j*hy).
struct PlateMesh {
    int nx = 0, ny = 0;
    double L = 1.0;
    double hx = 0.0, hy = 0.0;

    static PlateMesh build(int nx, int ny, double L);

    int num_nodes() const { return (nx + 1) * (ny + 1); }
    int num_elements() const { return nx * ny; }
    int node(int i, int j) const { return j * (nx + 1) + i; }
    Eigen::Vector2d coord(int n) const;
    /// gamma = {x2 = 0}
    bool on_gamma(int n) const { return n / (nx + 1) == 0; }
    /// Gamma_D = {x1 in {0, L}}
    bool on_gamma_d(int n) const {
        const int i = n % (nx + 1);
        return i == 0 || i == nx;
    }
};

// Per-node dof layout: U1, U2, then the Hermite data of U3 (w, w_x, w_y, w_xy).
inline constexpr int kPlateDofs = 6;
enum PlateDof { kU1 = 0, kU2 = 1, kW = 2, kWx = 3, kWy = 4, kWxy = 5 };

struct PlateState {
    Eigen::VectorXd dofs;

    static PlateState zero(const PlateMesh &mesh);
    double at(int node, int dof) const { return dofs[kPlateDofs * node + dof]; }
    double &at(int node, int dof) { return dofs[kPlateDofs * node + dof]; }
    /// max over nodes of |U3|
    double max_abs_u3() const;
};

struct LoadSpec {
    Eigen::Vector3d f = Eigen::Vector3d::Zero();   // constant areal force
    std::vector<Eigen::Vector3d> f_nodal;           // optional per-node samples (bilinear)
    Eigen::Matrix2d prestrain = Eigen::Matrix2d::Zero();
    std::vector<Eigen::Matrix2d> prestrain_nodal;  // optional per-node samples (bilinear)

    /// Throws ParameterError for non-finite or asymmetric data.
    void validate(const PlateMesh &mesh) const;
};

enum class PlateBC { Free, Gamma, Compression };
enum class PlateModel { VonKarman, Linear };

struct BoundaryData {
    std::vector<char> fixed;
    Eigen::VectorXd values;
    int num_free() const;
};

/// Fixed dofs and their values. Compression prescribes U1 = e*(L/2 - x1) on
/// Gamma_D with zero U2 and zero Hermite data.
BoundaryData boundary_data(const PlateMesh &mesh, PlateBC bc, double e_star = 0.0);

/// Energy, gradient and Hessian of the discrete plate energy
///   1/2 int (z'Az + z'Bk + k'Ck) - int f.U
/// with z = (Z11, Z22, 2 Z12) - e*_hom and k = (w_11, w_22, 2 w_12).
class PlateProblem {
public:
    PlateProblem(PlateMesh mesh, PlateTensors tensors, LoadSpec load, PlateModel model = PlateModel::VonKarman);

    const PlateMesh &mesh() const { return mesh_; }
    const PlateTensors &tensors() const { return tensors_; }
    const LoadSpec &load() const { return load_; }
    PlateModel model() const { return model_; }
    Eigen::Index size() const { return kPlateDofs * mesh_.num_nodes(); }

    double energy(const Eigen::VectorXd &x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd &x) const;
    Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd &x) const;

    /// Point evaluation of U1, U2, U3 at (x1, x2).
    Eigen::Vector3d evaluate(const Eigen::VectorXd &x, const Eigen::Vector2d &p) const;
    /// Membrane strain (e11, e22, 2 e12) at every quadrature point.
    std::vector<Eigen::Vector3d> membrane_strains(const Eigen::VectorXd &x) const;

    /// Exact plate fields used by manufactured-solution checks.
    struct ExactField {
        double u1, u2, u1_x, u1_y, u2_x, u2_y;
        double w, w_x, w_y, w_xx, w_yy, w_xy;
    };
    using ExactFn = std::function<ExactField(const Eigen::Vector2d &)>;
    /// Linear-model bilinear form a(U_exact, phi_i) for every basis function.
    Eigen::VectorXd linear_form_of(const ExactFn &u) const;
    /// Linear-model a(U_exact, U_exact).
    double linear_energy_of(const ExactFn &u) const;

    int quadrature_points_per_element() const { return static_cast<int>(qp_.size()); }

private:
    struct QP {
        double weight;
        Eigen::Vector2d xi; // offset inside the element
        Eigen::Matrix<double, 4, 1> N;      // bilinear values
        Eigen::Matrix<double, 2, 4> dN;     // bilinear gradients
        Eigen::Matrix<double, 16, 1> H;     // Hermite values
        Eigen::Matrix<double, 2, 16> dH;    // Hermite gradients
        Eigen::Matrix<double, 3, 16> d2H;   // (xx, yy, 2 xy)
    };
    void element_dofs(int e, int *u_dofs, int *w_dofs) const;
    Eigen::Vector3d force_at(int e, const QP &q) const;
    Eigen::Vector3d prestrain_at(int e, const QP &q) const;

    PlateMesh mesh_;
    PlateTensors tensors_;
    LoadSpec load_;
    PlateModel model_;
    std::vector<QP> qp_;
};

struct NewtonOptions {
    double tol = 1e-9;       // on ||g|| / (1 + |E|)
    int max_iterations = 200;
    double perturbation = 1e-3; // times L, for the second start
};

struct MinimizeResult {
    PlateState state;
    double energy = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    std::string start;                     // "flat" or "perturbed"
    std::vector<double> energy_trace;      // accepted energies of the returned start
    std::vector<double> start_energies;    // one per converged start
    std::vector<double> start_u3_max;
};

/// Damped Newton with Armijo backtracking from `initial` (boundary data are
/// overwritten). Throws SolverError when no iteration converges.
MinimizeResult newton_minimize(const PlateProblem &problem, const BoundaryData &bc, const Eigen::VectorXd &initial,
                               const NewtonOptions &options = {});

/// Multi-start from the flat lift and a perturbed lift; returns the lowest
/// converged energy. The perturbation mode is sin^2(pi x1/L) for
/// compression and (x2/L)^2 otherwise.
MinimizeResult minimize_vk(const PlateProblem &problem, PlateBC bc, double e_star = 0.0,
                           const NewtonOptions &options = {});

/// Linear plate: one exact Newton step on the quadratic energy.
PlateState solve_linear(const PlateProblem &problem, const BoundaryData &bc);

/// Galerkin solution of a(U, phi) = a(U_exact, phi) on the free dofs of
/// `bc` (fixed dofs zero) and its energy-norm error
///   sqrt(a(U_exact, U_exact) - 2 F.x + x.K x).
double manufactured_error(const PlateProblem &problem, const BoundaryData &bc, const PlateProblem::ExactFn &exact,
                          PlateState *solution = nullptr);

/// Affine compression lift U1 = e*(L/2 - x1).
PlateState lift_displacement(const PlateMesh &mesh, double e_star);

/// Legacy VTK of (U1, U2, U3) on the grid (quad cells, U3 lifted as z).
void export_plate_vtk(const PlateProblem &problem, const PlateState &state, const std::string &path);

/// (x1, U3(x1, L/2)) samples at `n` equispaced points.
std::vector<std::pair<double, double>> centre_profile(const PlateProblem &problem, const PlateState &state, int n);

} // namespace weavehom
