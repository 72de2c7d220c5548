#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weavehom/plate.hpp"

namespace weavehom {

/// Uniaxial compression of the square plate (0,L)^2 clamped on x1 in {0, L}.
struct CompressionCase {
    double e_star = 0.0;
    double L = 1.0;
    double a11 = 1.0; // a_hom_1111
    double c11 = 1.0; // c_hom_1111

    /// Throws ParameterError unless e_star >= 0 and L, a11, c11 > 0.
    void validate() const;
};

struct BucklingThresholds {
    double necessary = 0.0; // pi^2 c / (2 L^2 a)
    double test_mode = 0.0; // pi^2 (3a + 16c) / (8 a L^2)
};

BucklingThresholds analytic_thresholds(const CompressionCase &c);

/// Energy of the flat lift, a e*^2 L^2 / 2.
double flat_energy(const CompressionCase &c);

/// Reduced energy of V3 = sin^2(pi x1/L) from the closed-form integrals.
double test_mode_energy(const CompressionCase &c);

/// (int V'^2, int V'^4, int V''^2) of a smooth profile on (0, L) by composite
/// 5-point Gauss quadrature over `n_panels` panels.
Eigen::Vector3d profile_integrals(const std::function<double(double)> &dv, const std::function<double(double)> &ddv,
                                  double L, int n_panels = 64);

/// Reduced functional from its three integrals.
double reduced_energy(const CompressionCase &c, const Eigen::Vector3d &integrals);

/// Reduced energy of sin^2(pi x1/L) by quadrature.
double test_mode_energy_quadrature(const CompressionCase &c, int n_panels = 64);

/// Reduced functional
///   L/2 int_0^L a (e*^2 - 2 e* V'^2 + V'^4) + c V''^2 dx1
/// on clamped cubic Hermite elements. Dofs per node: (V, V'), node i at i*L/n.
class ReducedBeam {
public:
    ReducedBeam(const CompressionCase &c, int n_elements);

    const CompressionCase &compression() const { return case_; }
    int n_elements() const { return n_; }
    Eigen::Index size() const { return 2 * (n_ + 1); }

    double energy(const Eigen::VectorXd &v) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd &v) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd &v) const;

    /// (int V'^2, int V'^4, int V''^2) by 5-point Gauss quadrature.
    Eigen::Vector3d integrals(const Eigen::VectorXd &v) const;
    double value(const Eigen::VectorXd &v, double x) const;
    /// Nodal interpolant of a smooth profile given V and V'.
    Eigen::VectorXd interpolate(const std::function<double(double)> &f, const std::function<double(double)> &df) const;
    /// Dofs fixed by the clamped ends.
    bool is_clamped(Eigen::Index dof) const { return dof < 2 || dof >= 2 * n_; }

private:
    CompressionCase case_;
    int n_;
};

struct Reduced1DResult {
    Eigen::VectorXd dofs;
    double energy = 0.0;
    double flat_energy = 0.0;
    bool is_buckled = false;
    int iterations = 0;
    std::string start; // "flat" or "sin2"
};

/// Newton with multi-start (flat, sin^2 seed). Requires n_elements >= 8.
Reduced1DResult reduced_1d_solve(const CompressionCase &c, int n_elements, const NewtonOptions &options = {});

/// Bisection on e* over is_buckled. The upper end starts at c/(a L^2) and
/// doubles until buckling occurs.
double critical_strain_1d(double a11, double c11, double L, int n_elements = 32, double rel_tol = 1e-4);

struct SweepRow {
    double e_star = 0.0;
    double energy_flat = 0.0;
    double energy_best = 0.0;
    double u3_max = 0.0;
    std::string branch; // "flat" or "buckled"
};

struct SweepOptions {
    double e_star_min = 0.0;
    double e_star_max = 1.0;
    int n_points = 11;
    int nx = 16;
    double rel_tol = 1e-3; // bisection width relative to e*_c
    NewtonOptions newton;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double e_star_critical = 0.0; // NaN when no row buckles
    double necessary_bound = 0.0;
    double test_mode_bound = 0.0;
    double C_star = 0.0;          // J_lin(U_lin + lift) / e*^2
    bool bracket_holds = false;   // necessary <= e*_c <= test-mode
    int bisection_steps = 0;
};

/// Full von Karman sweep with compression boundary conditions. A row is
/// buckled when max|U3| > 1e-6 L; the flat branch energy is the linear
/// plate energy C* e*^2.
SweepResult sweep_buckling_2d(const PlateTensors &tensors, double L, const SweepOptions &options);

/// CSV with header e_star,energy_flat,energy_best,u3_max,branch.
std::string sweep_csv(const SweepResult &r);

} // namespace weavehom
