#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "weavehom/buckling.hpp"
#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

constexpr double kPi = M_PI;

constexpr double kGauss5X[5] = {0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155,
                                0.95308992296933200};
constexpr double kGauss5W[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                0.23931433524968324, 0.11846344252809454};

// Cubic Hermite shape data on an element of length h, order (V0, S0, V1, S1).
struct Shape1D {
    Eigen::Vector4d v, d, dd;
};

Shape1D shape_1d(double t, double h) {
    const double t2 = t * t, t3 = t2 * t;
    Shape1D s;
    s.v << 1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (-t2 + t3);
    s.d << (-6 * t + 6 * t2) / h, 1 - 4 * t + 3 * t2, (6 * t - 6 * t2) / h, -2 * t + 3 * t2;
    s.dd << (-6 + 12 * t) / (h * h), (-4 + 6 * t) / h, (6 - 12 * t) / (h * h), (-2 + 6 * t) / h;
    return s;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void CompressionCase::validate() const {
    if (!(e_star >= 0.0) || !std::isfinite(e_star)) throw ParameterError("e_star must be finite and >= 0");
    if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("L must be positive");
    if (!(a11 > 0.0) || !std::isfinite(a11)) throw ParameterError("a11 must be positive");
    if (!(c11 > 0.0) || !std::isfinite(c11)) throw ParameterError("c11 must be positive");
}

BucklingThresholds analytic_thresholds(const CompressionCase &c) {
    c.validate();
    BucklingThresholds t;
    t.necessary = kPi * kPi * c.c11 / (2.0 * c.L * c.L * c.a11);
    t.test_mode = kPi * kPi / (c.L * c.L) * (3.0 * c.a11 + 16.0 * c.c11) / (8.0 * c.a11);
    return t;
}

double flat_energy(const CompressionCase &c) { return 0.5 * c.a11 * c.e_star * c.e_star * c.L * c.L; }

double test_mode_energy(const CompressionCase &c) {
    c.validate();
    const double L = c.L, p2 = kPi * kPi, p4 = p2 * p2;
    const double i2 = p2 / (2 * L), i4 = 3 * p4 / (8 * L * L * L), idd = 2 * p4 / (L * L * L);
    return 0.5 * L * (c.a11 * (c.e_star * c.e_star * L - 2 * c.e_star * i2 + i4) + c.c11 * idd);
}

Eigen::Vector3d profile_integrals(const std::function<double(double)> &dv, const std::function<double(double)> &ddv,
                                  double L, int n_panels) {
    if (n_panels < 1 || !(L > 0.0)) throw ParameterError("quadrature needs L > 0 and at least one panel");
    const double h = L / n_panels;
    Eigen::Vector3d I = Eigen::Vector3d::Zero();
    for (int e = 0; e < n_panels; ++e)
        for (int q = 0; q < 5; ++q) {
            const double x = (e + kGauss5X[q]) * h, d = dv(x), dd = ddv(x);
            I += kGauss5W[q] * h * Eigen::Vector3d(d * d, d * d * d * d, dd * dd);
        }
    return I;
}

double reduced_energy(const CompressionCase &c, const Eigen::Vector3d &I) {
    return 0.5 * c.L * (c.a11 * (c.e_star * c.e_star * c.L - 2 * c.e_star * I[0] + I[1]) + c.c11 * I[2]);
}

double test_mode_energy_quadrature(const CompressionCase &c, int n_panels) {
    c.validate();
    const double k = kPi / c.L;
    return reduced_energy(c, profile_integrals([k](double x) { return k * std::sin(2 * k * x); },
                                               [k](double x) { return 2 * k * k * std::cos(2 * k * x); }, c.L,
                                               n_panels));
}

ReducedBeam::ReducedBeam(const CompressionCase &c, int n_elements) : case_(c), n_(n_elements) {
    c.validate();
    if (n_elements < 1) throw ParameterError("reduced beam needs at least one element");
}

double ReducedBeam::energy(const Eigen::VectorXd &v) const {
    return reduced_energy(case_, integrals(v));
}

Eigen::Vector3d ReducedBeam::integrals(const Eigen::VectorXd &v) const {
    if (v.size() != size()) throw ContractError("beam state has the wrong size");
    const double h = case_.L / n_;
    Eigen::Vector3d I = Eigen::Vector3d::Zero();
    for (int e = 0; e < n_; ++e) {
        const Eigen::Vector4d ve = v.segment<4>(2 * e);
        for (int q = 0; q < 5; ++q) {
            const Shape1D s = shape_1d(kGauss5X[q], h);
            const double w = kGauss5W[q] * h, d = s.d.dot(ve), dd = s.dd.dot(ve);
            I += w * Eigen::Vector3d(d * d, d * d * d * d, dd * dd);
        }
    }
    return I;
}

Eigen::VectorXd ReducedBeam::gradient(const Eigen::VectorXd &v) const {
    if (v.size() != size()) throw ContractError("beam state has the wrong size");
    const auto &c = case_;
    const double h = c.L / n_;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
    for (int e = 0; e < n_; ++e) {
        const Eigen::Vector4d ve = v.segment<4>(2 * e);
        for (int q = 0; q < 5; ++q) {
            const Shape1D s = shape_1d(kGauss5X[q], h);
            const double w = kGauss5W[q] * h, d = s.d.dot(ve), dd = s.dd.dot(ve);
            g.segment<4>(2 * e) += 0.5 * c.L * w * (c.a11 * (4 * d * d * d - 4 * c.e_star * d) * s.d + 2 * c.c11 * dd * s.dd);
        }
    }
    return g;
}

Eigen::MatrixXd ReducedBeam::hessian(const Eigen::VectorXd &v) const {
    if (v.size() != size()) throw ContractError("beam state has the wrong size");
    const auto &c = case_;
    const double h = c.L / n_;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(size(), size());
    for (int e = 0; e < n_; ++e) {
        const Eigen::Vector4d ve = v.segment<4>(2 * e);
        for (int q = 0; q < 5; ++q) {
            const Shape1D s = shape_1d(kGauss5X[q], h);
            const double w = kGauss5W[q] * h, d = s.d.dot(ve);
            H.block<4, 4>(2 * e, 2 * e) += 0.5 * c.L * w *
                                           (c.a11 * (12 * d * d - 4 * c.e_star) * s.d * s.d.transpose() +
                                            2 * c.c11 * s.dd * s.dd.transpose());
        }
    }
    return H;
}

double ReducedBeam::value(const Eigen::VectorXd &v, double x) const {
    const double h = case_.L / n_;
    const int e = std::clamp(static_cast<int>(x / h), 0, n_ - 1);
    return shape_1d(x / h - e, h).v.dot(v.segment<4>(2 * e));
}

Eigen::VectorXd ReducedBeam::interpolate(const std::function<double(double)> &f,
                                         const std::function<double(double)> &df) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i <= n_; ++i) {
        const double x = i == n_ ? case_.L : i * case_.L / n_;
        v[2 * i] = f(x);
        v[2 * i + 1] = df(x);
    }
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (is_clamped(k)) v[k] = 0.0;
    return v;
}

namespace {

// Damped Newton on the free dofs of the beam with a diagonal shift for
// indefinite Hessians.
Reduced1DResult newton_1d(const ReducedBeam &beam, Eigen::VectorXd x, const NewtonOptions &opt) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < beam.size(); ++k)
        if (!beam.is_clamped(k)) free.push_back(k);
    const auto n = static_cast<Eigen::Index>(free.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (beam.is_clamped(k)) x[k] = 0.0;
    double E = beam.energy(x);
    Reduced1DResult r;
    for (int it = 0; it <= opt.max_iterations; ++it) {
        const Eigen::VectorXd gf = beam.gradient(x);
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i) g[i] = gf[free[i]];
        r.iterations = it;
        if (g.norm() <= opt.tol * (1.0 + std::abs(E))) {
            r.dofs = x;
            r.energy = E;
            return r;
        }
        if (it == opt.max_iterations) break;
        const Eigen::MatrixXd Hf = beam.hessian(x);
        Eigen::MatrixXd H(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) H(i, j) = Hf(free[i], free[j]);
        const double scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        Eigen::VectorXd d;
        for (double tau = 0.0;; tau = tau == 0.0 ? 1e-10 * scale : 4 * tau) {
            Eigen::LLT<Eigen::MatrixXd> llt(H + tau * Eigen::MatrixXd::Identity(n, n));
            if (llt.info() == Eigen::Success) {
                d = llt.solve(-g);
                break;
            }
            if (tau > 1e10 * scale) throw SolverError("could not regularize the beam Hessian");
        }
        const double slope = g.dot(d);
        Eigen::VectorXd step = Eigen::VectorXd::Zero(x.size());
        for (Eigen::Index i = 0; i < n; ++i) step[free[i]] = d[i];
        double t = 1.0;
        for (;;) {
            const double Et = beam.energy(x + t * step);
            if (Et <= E + 1e-4 * t * slope + 1e-14 * (1.0 + std::abs(E))) {
                x += t * step;
                E = Et;
                break;
            }
            t *= 0.5;
            if (t < 1e-12) throw SolverError("line search failed in the beam solver", g.norm());
        }
    }
    throw SolverError("beam Newton iteration did not converge");
}

} // namespace

Reduced1DResult reduced_1d_solve(const CompressionCase &c, int n_elements, const NewtonOptions &options) {
    if (n_elements < 8) throw ParameterError("reduced_1d_solve needs at least 8 elements");
    const ReducedBeam beam(c, n_elements);
    const double L = c.L, k = kPi / L;
    // amplitude with V' of order sqrt(e*)
    const double A = L * std::sqrt(std::max(c.e_star, 1e-12)) / kPi;
    const Eigen::VectorXd seed = beam.interpolate([&](double x) { return A * std::pow(std::sin(k * x), 2); },
                                                  [&](double x) { return A * k * std::sin(2 * k * x); });
    Reduced1DResult best;
    bool have = false;
    std::string error;
    for (int s = 0; s < 2; ++s) {
        try {
            Reduced1DResult r = newton_1d(beam, s == 0 ? Eigen::VectorXd::Zero(beam.size()) : seed, options);
            r.start = s == 0 ? "flat" : "sin2";
            if (!have || r.energy < best.energy) {
                best = std::move(r);
                have = true;
            }
        } catch (const SolverError &e) {
            error = e.what();
        }
    }
    if (!have) throw SolverError("reduced beam: no start converged: " + error);
    best.flat_energy = flat_energy(c);
    best.is_buckled = best.energy < best.flat_energy - 1e-12;
    return best;
}

double critical_strain_1d(double a11, double c11, double L, int n_elements, double rel_tol) {
    CompressionCase c{0.0, L, a11, c11};
    c.validate();
    const auto buckled = [&](double e) {
        c.e_star = e;
        return reduced_1d_solve(c, n_elements).is_buckled;
    };
    double lo = 0.0, hi = c11 / (a11 * L * L);
    for (int k = 0; !buckled(hi); ++k) {
        if (k > 60) throw SolverError("no buckling found for any compression");
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (buckled(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

SweepResult sweep_buckling_2d(const PlateTensors &tensors, double L, const SweepOptions &opt) {
    if (opt.n_points < 2) throw ParameterError("buckling.n_points must be >= 2");
    if (!(opt.e_star_min >= 0.0) || !(opt.e_star_max > opt.e_star_min))
        throw ParameterError("buckling range needs 0 <= e_star_min < e_star_max");
    const PlateMesh mesh = PlateMesh::build(opt.nx, opt.nx, L);
    const CompressionCase cc{0.0, L, tensors.a_hom(0, 0), tensors.c_hom(0, 0)};
    SweepResult res;
    const BucklingThresholds th = analytic_thresholds(cc);
    res.necessary_bound = th.necessary;
    res.test_mode_bound = th.test_mode;

    const PlateProblem vk(mesh, tensors, LoadSpec{});
    const PlateProblem lin(mesh, tensors, LoadSpec{}, PlateModel::Linear);
    // the linear energy is exactly quadratic in e*
    res.C_star = lin.energy(solve_linear(lin, boundary_data(mesh, PlateBC::Compression, 1.0)).dofs);
    const double threshold = 1e-6 * L;
    const auto solve = [&](double e) {
        SweepRow row;
        row.e_star = e;
        row.energy_flat = res.C_star * e * e;
        const MinimizeResult m = minimize_vk(vk, PlateBC::Compression, e, opt.newton);
        row.energy_best = m.energy;
        row.u3_max = m.state.max_abs_u3();
        row.branch = row.u3_max > threshold ? "buckled" : "flat";
        return row;
    };
    for (int i = 0; i < opt.n_points; ++i) {
        const double e = opt.e_star_min + (opt.e_star_max - opt.e_star_min) * i / (opt.n_points - 1);
        res.rows.push_back(solve(e));
    }
    res.e_star_critical = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        if (res.rows[i].branch != "buckled") continue;
        if (i == 0) {
            res.e_star_critical = res.rows[0].e_star;
            break;
        }
        double lo = res.rows[i - 1].e_star, hi = res.rows[i].e_star;
        while (hi - lo > opt.rel_tol * hi) {
            const double mid = 0.5 * (lo + hi);
            (solve(mid).branch == "buckled" ? hi : lo) = mid;
            ++res.bisection_steps;
        }
        res.e_star_critical = 0.5 * (lo + hi);
        break;
    }
    res.bracket_holds = std::isfinite(res.e_star_critical) && res.necessary_bound <= res.e_star_critical &&
                        res.e_star_critical <= res.test_mode_bound;
    return res;
}

std::string sweep_csv(const SweepResult &r) {
    std::string s = "e_star,energy_flat,energy_best,u3_max,branch\n";
    for (const auto &row : r.rows)
        s += fmt(row.e_star) + "," + fmt(row.energy_flat) + "," + fmt(row.energy_best) + "," + fmt(row.u3_max) + "," +
             row.branch + "\n";
    return s;
}

} // namespace weavehom
