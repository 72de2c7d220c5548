#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weavehom/elasticity.hpp"
#include "weavehom/geometry.hpp"

namespace weavehom {

/// Parsed run configuration. Text form: one `section.key = value` per line,
/// `#` starts a comment, lists are written `[a, b, c]`.
struct RunConfig {
    WeaveParams geometry;

    std::string material_model = "isotropic"; // isotropic | lame | general
    double E = 1.0, nu = 0.3;
    double lambda = 0.0, mu = 0.0;
    std::string material_table; // CSV: tag followed by 36 Voigt entries (row-major)

    int plate_nx = 16, plate_ny = 16;
    std::string plate_bc = "gamma";   // gamma | compression
    std::string plate_model = "vk";   // vk | linear
    Eigen::Vector3d plate_f{0.0, 0.0, 1.0};
    double plate_e_star = 0.0;        // compression strain
    std::string tensors_file;         // optional tensors.json to reuse

    std::optional<Matrix3d> prestrain; // cell eigenstrain, row-major 9 entries

    double buckle_e_min = 0.0, buckle_e_max = 0.0; // 0,0: bracket the analytic bounds
    int buckle_points = 11;
    int buckle_nx = 16;

    std::vector<int> verify_n_periods{2, 4};
    int verify_plate_nx = 16;

    double cg_tol = 1e-10;
    double newton_tol = 1e-9;
    int max_iters = 0;

    std::string output_dir = "out";

    /// Throws ConfigError naming the offending field.
    void validate() const;
    ElasticTensor material() const;
};

/// Parses configuration text. Unknown keys and malformed values raise
/// ConfigError with the line number and key.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

} // namespace weavehom
