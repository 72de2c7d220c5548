#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "weavehom/errors.hpp"
#include "weavehom/plate.hpp"

namespace weavehom {

namespace {

// Rows of the identity picking the free dofs.
Eigen::SparseMatrix<double> selector(const BoundaryData &bc) {
    std::vector<Eigen::Triplet<double>> t;
    int r = 0;
    for (std::size_t i = 0; i < bc.fixed.size(); ++i)
        if (!bc.fixed[i]) t.emplace_back(r++, static_cast<int>(i), 1.0);
    Eigen::SparseMatrix<double> P(r, static_cast<Eigen::Index>(bc.fixed.size()));
    P.setFromTriplets(t.begin(), t.end());
    return P;
}

// Solves (H + tau I) d = -g with the smallest tau that gives a positive
// definite factorization.
Eigen::VectorXd descent_direction(const Eigen::SparseMatrix<double> &H, const Eigen::VectorXd &g) {
    double scale = 0.0;
    for (Eigen::Index i = 0; i < H.rows(); ++i) scale = std::max(scale, std::abs(H.coeff(i, i)));
    if (scale == 0.0) scale = 1.0;
    Eigen::SparseMatrix<double> I(H.rows(), H.cols());
    I.setIdentity();
    double tau = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        ldlt.compute(tau == 0.0 ? H : Eigen::SparseMatrix<double>(H + tau * I));
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
            Eigen::VectorXd d = ldlt.solve(-g);
            if (d.allFinite()) return d;
        }
        tau = tau == 0.0 ? 1e-10 * scale : 4.0 * tau;
    }
    throw SolverError("could not regularize the plate Hessian");
}

Eigen::VectorXd perturbation_mode(const PlateMesh &mesh, PlateBC bc) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kPlateDofs * mesh.num_nodes());
    const double L = mesh.L, k = M_PI / L;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        const auto x = mesh.coord(n);
        if (bc == PlateBC::Compression) {
            const double s = std::sin(k * x[0]), c = std::cos(k * x[0]);
            v[kPlateDofs * n + kW] = s * s;
            v[kPlateDofs * n + kWx] = 2 * k * s * c;
        } else {
            const double t = x[1] / L;
            v[kPlateDofs * n + kW] = t * t;
            v[kPlateDofs * n + kWy] = 2 * t / L;
        }
    }
    return v;
}

} // namespace

MinimizeResult newton_minimize(const PlateProblem &problem, const BoundaryData &bc, const Eigen::VectorXd &initial,
                               const NewtonOptions &options) {
    if (initial.size() != problem.size() || static_cast<Eigen::Index>(bc.fixed.size()) != problem.size())
        throw ContractError("initial state or boundary data do not match the plate");
    Eigen::VectorXd x = initial;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (bc.fixed[i]) x[i] = bc.values[i];
    const Eigen::SparseMatrix<double> P = selector(bc);

    MinimizeResult res;
    double E = problem.energy(x);
    res.energy_trace.push_back(E);
    for (int it = 0; it <= options.max_iterations; ++it) {
        const Eigen::VectorXd g = P * problem.gradient(x);
        res.gradient_norm = g.norm();
        res.iterations = it;
        if (!std::isfinite(E) || !std::isfinite(res.gradient_norm))
            throw SolverError("plate energy became non-finite", res.gradient_norm);
        if (res.gradient_norm <= options.tol * (1.0 + std::abs(E))) {
            res.state.dofs = x;
            res.energy = E;
            return res;
        }
        if (it == options.max_iterations) break;
        const Eigen::SparseMatrix<double> H = P * problem.hessian(x) * P.transpose();
        const Eigen::VectorXd d = descent_direction(H, g);
        const Eigen::VectorXd step = P.transpose() * d;
        const double slope = g.dot(d);
        double t = 1.0;
        for (;;) {
            const Eigen::VectorXd trial = x + t * step;
            const double Et = problem.energy(trial);
            // round-off floor for energies near a minimizer
            const double noise = 1e-14 * (1.0 + std::abs(E));
            if (std::isfinite(Et) && Et <= E + 1e-4 * t * slope + noise) {
                x = trial;
                E = Et;
                break;
            }
            t *= 0.5;
            if (t < 1e-12) throw SolverError("line search failed in the plate solver", res.gradient_norm);
        }
        res.energy_trace.push_back(E);
    }
    throw SolverError("plate Newton iteration did not converge", res.gradient_norm);
}

MinimizeResult minimize_vk(const PlateProblem &problem, PlateBC bc, double e_star, const NewtonOptions &options) {
    const PlateMesh &mesh = problem.mesh();
    const BoundaryData data = boundary_data(mesh, bc, e_star);
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(problem.size());
    if (bc == PlateBC::Compression) flat = lift_displacement(mesh, e_star).dofs;
    const Eigen::VectorXd perturbed = flat + options.perturbation * mesh.L * perturbation_mode(mesh, bc);

    MinimizeResult best;
    bool have = false;
    std::vector<double> energies, u3;
    std::string last_error;
    double last_residual = -1.0;
    for (int s = 0; s < 2; ++s) {
        try {
            MinimizeResult r = newton_minimize(problem, data, s == 0 ? flat : perturbed, options);
            r.start = s == 0 ? "flat" : "perturbed";
            energies.push_back(r.energy);
            u3.push_back(r.state.max_abs_u3());
            // ties keep the first start
            if (!have || r.energy < best.energy - 1e-12 * (1.0 + std::abs(best.energy))) {
                best = std::move(r);
                have = true;
            }
        } catch (const SolverError &e) {
            last_error = e.what();
            last_residual = e.final_residual();
        }
    }
    if (!have) throw SolverError("no start converged: " + last_error, last_residual);
    best.start_energies = energies;
    best.start_u3_max = u3;
    return best;
}

PlateState solve_linear(const PlateProblem &problem, const BoundaryData &bc) {
    if (problem.model() != PlateModel::Linear) throw ContractError("solve_linear needs the linear plate model");
    if (static_cast<Eigen::Index>(bc.fixed.size()) != problem.size())
        throw ContractError("boundary data do not match the plate");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (bc.fixed[i]) x[i] = bc.values[i];
    const Eigen::SparseMatrix<double> P = selector(bc);
    const Eigen::SparseMatrix<double> H = P * problem.hessian(x) * P.transpose();
    const Eigen::VectorXd g = P * problem.gradient(x);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    if (ldlt.info() != Eigen::Success) throw SolverError("linear plate system is singular");
    const Eigen::VectorXd d = ldlt.solve(-g);
    if (!d.allFinite()) throw SolverError("linear plate system is singular");
    PlateState s;
    s.dofs = x + P.transpose() * d;
    return s;
}

double manufactured_error(const PlateProblem &problem, const BoundaryData &bc, const PlateProblem::ExactFn &exact,
                          PlateState *solution) {
    if (problem.model() != PlateModel::Linear) throw ContractError("manufactured solutions need the linear plate model");
    const Eigen::SparseMatrix<double> P = selector(bc);
    const Eigen::SparseMatrix<double> K = problem.hessian(Eigen::VectorXd::Zero(problem.size()));
    const Eigen::VectorXd F = problem.linear_form_of(exact);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(P * K * P.transpose());
    if (ldlt.info() != Eigen::Success) throw SolverError("linear plate system is singular");
    const Eigen::VectorXd x = P.transpose() * ldlt.solve(P * F);
    if (solution) solution->dofs = x;
    // stationary in x, so solver round-off enters only quadratically
    const double e2 = problem.linear_energy_of(exact) - 2.0 * F.dot(x) + x.dot(K * x);
    return std::sqrt(std::max(0.0, e2));
}

} // namespace weavehom
