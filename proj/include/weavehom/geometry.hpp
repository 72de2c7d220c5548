#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace weavehom {

using Vec3 = Eigen::Vector3d;

/// Element counts per beam piece. `axial` counts elements on each curved
/// segment of a yarn, `cross` the elements across the square section (also
/// used along flat segments so contact squares stay conforming), `thick`
/// the elements through the section height.
struct Resolution {
    int axial = 8;
    int cross = 2;
    int thick = 2;
};

struct WeaveParams {
    double kappa = 0.1;   // half-thickness ratio
    double epsilon = 1.0; // period length
    double L = 1.0;       // plate side length
    int n_periods = 1;    // periodicity cells per side in full-structure meshes
    Resolution resolution;

    /// Throws ParameterError naming the offending field.
    void validate() const;
};

/// Yarn mid-line profile on [0,2], extended with period 2.
double profile(double z, double kappa);
/// Derivative of `profile`.
double profile_derivative(double z, double kappa);

/// Point on the mid-line of yarn `index` running along `direction` (1 or 2),
/// at arclength parameter `s` (physical units).
Vec3 middle_line(int direction, int index, double s, const WeaveParams &params);

/// Maps reference-beam coordinates z to physical space. For direction 1,
/// z = (axial, cross offset, thickness offset); for direction 2 the first two
/// entries swap roles. The cross-section is framed by the unit normal of the
/// mid-line in its vertical plane.
Vec3 yarn_map(int direction, int index, const Vec3 &z, const WeaveParams &params);

/// Node `slave` sits on the face y_axis = period and equals `master` shifted
/// by the period along `axis` (0 or 1).
struct PeriodicPair {
    int slave;
    int master;
    int axis;
};

/// Conforming 8-node hexahedral mesh. Hex corner ordering follows VTK
/// (bottom face counter-clockwise, then top face).
struct CellMesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 8>> hexes;
    std::vector<int> material_tag; // 0 solid, 1/2 yarn direction
    std::vector<PeriodicPair> periodic_pairs;
    std::vector<std::vector<int>> contact_faces; // merged nodes per crossing
    std::vector<int> clamped_nodes;              // nodes on x2 = 0 (textile patches)
    std::array<double, 2> period{0.0, 0.0};      // in-plane period, 0 if not periodic
    double kappa = 0.0;
    double epsilon = 1.0;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return hexes.size(); }
    bool periodic() const { return period[0] > 0.0; }
    double volume() const;
};

/// Mesh of the periodic reference cell Y* in cell coordinates (epsilon = 1).
CellMesh build_cell_mesh(const WeaveParams &params);

/// Structured grid of the solid cell (0,2)^2 x (-2k,2k) with periodic pairing.
CellMesh build_solid_cell_mesh(const WeaveParams &params, int nx, int ny, int nz);

/// Glued textile patch over (0, 2*n_periods*epsilon)^2 in physical units,
/// with the nodes of x2 = 0 collected in `clamped_nodes`.
CellMesh build_textile_mesh(const WeaveParams &params);

/// Same nodes and connectivity, coordinates moved by `warp`. Used to build
/// controlled symmetry-breaking variants.
CellMesh warped(const CellMesh &mesh, const std::function<Vec3(const Vec3 &)> &warp);

/// Number of nodes predicted by grid arithmetic for `build_cell_mesh`.
std::size_t predicted_cell_node_count(const Resolution &res);

/// Point maps used by the orthotropy argument, in cell coordinates.
enum class CellSymmetry {
    MirrorY1,     // (2-y1, y2, y3)
    MirrorY2,     // (y1, 2-y2, y3)
    SwapFlip,     // (y2, y1, -y3)
    QuarterTurn,  // (1-y2, y1, y3), periodic wrap
};

Vec3 apply_symmetry(CellSymmetry s, const Vec3 &y);
std::string to_string(CellSymmetry s);

/// For every node, the index of the node at the mapped position (periodic
/// wrap applied). Empty if some mapped position has no node.
std::vector<int> symmetry_node_map(const CellMesh &mesh, CellSymmetry s, double tol = 1e-8);

struct MeshCheck {
    bool positive_jacobian = true;
    bool periodic_bijection = true;
    bool symmetric = true;
    bool contact_conforming = true;
    double min_jacobian = 0.0;
    std::vector<std::string> messages;

    bool ok() const { return positive_jacobian && periodic_bijection && symmetric && contact_conforming; }
};

/// Runs every CellMesh invariant (Jacobians at 2x2x2 Gauss points, periodic
/// bijection, symmetry invariance, contact conformity).
MeshCheck check_cell_mesh(const CellMesh &mesh, bool check_symmetry = true);

/// Jacobian determinant of the trilinear map of hex `e` at reference point xi.
double hex_jacobian(const CellMesh &mesh, std::size_t e, const Vec3 &xi);

} // namespace weavehom
