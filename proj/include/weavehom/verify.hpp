#pragma once

#include <vector>

#include "weavehom/homogenizer.hpp"
#include "weavehom/plate.hpp"

namespace weavehom {

struct VerifyOptions {
    std::vector<int> n_periods{2, 4};
    Eigen::Vector3d f{0.0, 0.0, 1.0}; // macroscopic areal force
    int plate_nx = 16;
    SolveOptions solve{1e-10, 0, SolverKind::Direct, false};
};

struct VerifyRow {
    int n_periods = 0;
    double epsilon = 0.0;
    std::size_t n_dofs = 0;
    double m_eps = 0.0;          // minimal fine-scale energy
    double m_scaled = 0.0;       // m_eps / eps^5
    double ratio = 0.0;          // m_scaled / (|Y*| / |Y'| min J_lin)
    double ratio_literal = 0.0;  // m_scaled / (|Y*| min J_lin)
    double distance = 0.0;       // |ratio - 1|
};

struct VerifyResult {
    std::vector<VerifyRow> rows;
    double j_lin_min = 0.0;
    double cell_volume = 0.0;
    bool distance_decreases = false;
};

/// Solves the linear elasticity problem on the glued textile over (0, L)^2
/// (period 2 eps = L / n_periods), clamped on x2 = 0, with body forces
/// (eps^2 f1, eps^2 f2, eps^3 f3), and compares the minimal energy with the
/// linear homogenized plate on the same square.
VerifyResult verify_homogenization_limit(const WeaveParams &params, const ElasticTensor &tensor,
                                         const PlateTensors &tensors, const VerifyOptions &options = {});

} // namespace weavehom
