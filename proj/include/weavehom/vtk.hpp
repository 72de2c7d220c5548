#pragma once

#include <string>
#include <vector>

#include "weavehom/geometry.hpp"

namespace weavehom {

struct NamedField {
    std::string name;
    std::vector<Vec3> values; // one per node
};

/// Legacy ASCII VTK unstructured grid with hexahedral cells (type 12),
/// cell data "material_tag" and one POINT_DATA VECTORS block per field.
void export_vtk(const CellMesh &mesh, const std::vector<NamedField> &fields, const std::string &path);

/// Generic writer for the same format with arbitrary cell connectivity.
void write_vtk(const std::string &path, const std::vector<Vec3> &points,
               const std::vector<std::vector<int>> &cells, int cell_type,
               const std::vector<NamedField> &fields);

struct VtkGrid {
    std::vector<Vec3> points;
    std::vector<std::vector<int>> cells;
    std::vector<int> cell_types;
    std::vector<NamedField> fields;
};

/// Reads back files produced by `write_vtk` / `export_vtk`.
VtkGrid read_vtk(const std::string &path);

} // namespace weavehom
