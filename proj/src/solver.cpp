#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "weavehom/elasticity.hpp"
#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Removes the per-component mean over reduced dofs so the rhs is orthogonal
// to the translation kernel.
void project_translations(const SparseSystem &sys, Eigen::VectorXd &v) {
    double sum[3] = {0, 0, 0};
    int count[3] = {0, 0, 0};
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        sum[sys.reduced_component[i]] += v[i];
        ++count[sys.reduced_component[i]];
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const int c = sys.reduced_component[i];
        v[i] -= sum[c] / count[c];
    }
}

Eigen::VectorXd direct_solve(const SparseSystem &sys, const Eigen::VectorXd &b) {
    SpMat K = sys.K;
    Eigen::VectorXd rhs = b;
    if (sys.translation_kernel() && K.rows() > 0) {
        // pin one dof per component; the mean shift happens afterwards
        std::vector<char> pinned(K.rows(), 0);
        for (int c = 0; c < 3; ++c) {
            for (Eigen::Index i = 0; i < K.rows(); ++i) {
                if (sys.reduced_component[i] == c) {
                    pinned[i] = 1;
                    break;
                }
            }
        }
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(K.nonZeros());
        for (Eigen::Index r = 0; r < K.outerSize(); ++r) {
            for (SpMat::InnerIterator it(K, r); it; ++it) {
                if (pinned[it.row()] || pinned[it.col()]) continue;
                trip.emplace_back(it.row(), it.col(), it.value());
            }
        }
        for (Eigen::Index i = 0; i < K.rows(); ++i) {
            if (pinned[i]) {
                trip.emplace_back(i, i, 1.0);
                rhs[i] = 0.0;
            }
        }
        K.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SparseMatrix<double> Kc = K;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kc);
    if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed", 0.0);
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SolverError("sparse LDLT solve failed", 0.0);
    return x;
}

} // namespace

Eigen::VectorXd pcg(const SpMat &K, const Eigen::VectorXd &b, const SolveOptions &options, SolveReport *report) {
    const Eigen::Index n = K.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (report) *report = SolveReport{};
    const double bnorm = b.norm();
    if (n == 0 || bnorm == 0.0) return x;

    Eigen::VectorXd dinv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = K.coeff(i, i);
        dinv[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = dinv.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd Ap(n);
    double rz = r.dot(z);
    const int max_it = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(20 * n + 100);
    double rel = 1.0;
    int it = 0;
    while (it < max_it) {
        Ap.noalias() = K * p;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        ++it;
        rel = r.norm() / bnorm;
        if (report && options.track_energy) report->energy_trace.push_back(-0.5 * x.dot(b + r));
        if (rel <= options.tol) break;
        z = dinv.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (report) {
        report->iterations = it;
        report->relative_residual = rel;
    }
    if (!(rel <= options.tol)) {
        std::ostringstream os;
        os << "conjugate gradients stopped after " << it << " iterations at relative residual " << rel;
        throw SolverError(os.str(), rel);
    }
    return x;
}

void recover_enhanced(const SparseSystem &sys, DisplacementField &field, int column) {
    if (sys.element != ElementKind::IncompatibleModes) {
        field.enhanced.clear();
        return;
    }
    field.enhanced.resize(sys.hexes.size());
    for (std::size_t e = 0; e < sys.hexes.size(); ++e) {
        Eigen::Matrix<double, 24, 1> u;
        for (int a = 0; a < 8; ++a) u.segment<3>(3 * a) = field.nodal[sys.hexes[e][a]];
        Eigen::Matrix<double, 9, 1> r = -sys.kau[e] * u;
        if (column >= 0 && column < sys.ra[e].cols()) r += sys.ra[e].col(column);
        field.enhanced[e] = sys.kaa_inv[e] * r;
    }
}

DisplacementField solve(const SparseSystem &sys, int column, const SolveOptions &options, SolveReport *report) {
    if (column < 0 || column >= sys.rhs.cols()) throw ContractError("solve: load column out of range");
    Eigen::VectorXd b = sys.rhs.col(column);
    if (sys.translation_kernel()) project_translations(sys, b);

    SolveReport local;
    SolveReport *rep = report ? report : &local;
    Eigen::VectorXd x;
    if (options.kind == SolverKind::Direct) {
        x = direct_solve(sys, b);
        const double bn = b.norm();
        rep->iterations = 1;
        rep->relative_residual = bn > 0 ? (sys.K * x - b).norm() / bn : 0.0;
    } else {
        x = pcg(sys.K, b, options, rep);
    }

    const auto &con = sys.constraints;
    DisplacementField field;
    field.nodal.assign(sys.n_nodes, Vec3::Zero());
    for (std::size_t n = 0; n < sys.n_nodes; ++n) {
        const int m = con.master[n];
        for (int c = 0; c < 3; ++c) {
            const int r = sys.reduced[3 * n + c];
            field.nodal[n][c] = r >= 0 ? x[r] : con.fixed_value[3 * m + c];
        }
    }
    if (con.mean_zero()) {
        Vec3 mean = Vec3::Zero();
        double vol = 0.0;
        for (std::size_t n = 0; n < sys.n_nodes; ++n) {
            mean += con.mean_weights[n] * field.nodal[n];
            vol += con.mean_weights[n];
        }
        mean /= vol;
        for (auto &u : field.nodal) u -= mean;
    }
    recover_enhanced(sys, field, column);
    return field;
}

} // namespace weavehom
