#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace weavehom::hex {

// Reference corners of the 8-node hexahedron in VTK order.
inline constexpr std::array<std::array<double, 3>, 8> kCorners{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

inline Eigen::Matrix<double, 8, 1> shape(const Eigen::Vector3d &xi) {
    Eigen::Matrix<double, 8, 1> n;
    for (int a = 0; a < 8; ++a) {
        n[a] = 0.125 * (1 + kCorners[a][0] * xi[0]) * (1 + kCorners[a][1] * xi[1]) *
               (1 + kCorners[a][2] * xi[2]);
    }
    return n;
}

/// Row a holds dN_a/dxi.
inline Eigen::Matrix<double, 8, 3> shape_gradient(const Eigen::Vector3d &xi) {
    Eigen::Matrix<double, 8, 3> g;
    for (int a = 0; a < 8; ++a) {
        const auto &c = kCorners[a];
        const double f0 = 1 + c[0] * xi[0];
        const double f1 = 1 + c[1] * xi[1];
        const double f2 = 1 + c[2] * xi[2];
        g(a, 0) = 0.125 * c[0] * f1 * f2;
        g(a, 1) = 0.125 * f0 * c[1] * f2;
        g(a, 2) = 0.125 * f0 * f1 * c[2];
    }
    return g;
}

struct GaussPoint {
    Eigen::Vector3d xi;
    double weight;
};

/// 2x2x2 Gauss rule.
inline std::array<GaussPoint, 8> gauss2() {
    const double g = 1.0 / std::sqrt(3.0);
    std::array<GaussPoint, 8> pts;
    for (int a = 0; a < 8; ++a) {
        pts[a].xi = Eigen::Vector3d(kCorners[a][0] * g, kCorners[a][1] * g, kCorners[a][2] * g);
        pts[a].weight = 1.0;
    }
    return pts;
}

/// J(i,j) = dx_i / dxi_j for corner coordinates stored as columns of X.
inline Eigen::Matrix3d jacobian(const Eigen::Matrix<double, 3, 8> &X, const Eigen::Vector3d &xi) {
    return X * shape_gradient(xi);
}

} // namespace weavehom::hex
