#include "weavehom/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_vtk(const std::string &path, const std::vector<Vec3> &points, const std::vector<std::vector<int>> &cells,
               int cell_type, const std::vector<NamedField> &fields) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "# vtk DataFile Version 3.0\nweavehom\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << points.size() << " double\n";
    for (const auto &p : points) out << fmt(p[0]) << ' ' << fmt(p[1]) << ' ' << fmt(p[2]) << '\n';
    std::size_t size = 0;
    for (const auto &c : cells) size += c.size() + 1;
    out << "CELLS " << cells.size() << ' ' << size << '\n';
    for (const auto &c : cells) {
        out << c.size();
        for (int n : c) out << ' ' << n;
        out << '\n';
    }
    out << "CELL_TYPES " << cells.size() << '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) out << cell_type << '\n';
    if (!fields.empty()) {
        out << "POINT_DATA " << points.size() << '\n';
        for (const auto &f : fields) {
            if (f.values.size() != points.size()) throw ContractError("field " + f.name + " has wrong length");
            out << "VECTORS " << f.name << " double\n";
            for (const auto &v : f.values) out << fmt(v[0]) << ' ' << fmt(v[1]) << ' ' << fmt(v[2]) << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void export_vtk(const CellMesh &mesh, const std::vector<NamedField> &fields, const std::string &path) {
    std::vector<std::vector<int>> cells;
    cells.reserve(mesh.hexes.size());
    for (const auto &h : mesh.hexes) cells.emplace_back(h.begin(), h.end());
    write_vtk(path, mesh.nodes, cells, 12, fields);
    std::ofstream out(path, std::ios::app);
    out << "CELL_DATA " << mesh.hexes.size() << "\nSCALARS material_tag int 1\nLOOKUP_TABLE default\n";
    for (int t : mesh.material_tag) out << t << '\n';
    if (!out) throw IoError("write failed: " + path);
}

VtkGrid read_vtk(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    VtkGrid g;
    std::string tok;
    while (in >> tok) {
        if (tok == "POINTS") {
            std::size_t n;
            std::string type;
            in >> n >> type;
            g.points.resize(n);
            for (auto &p : g.points) in >> p[0] >> p[1] >> p[2];
        } else if (tok == "CELLS") {
            std::size_t n, size;
            in >> n >> size;
            g.cells.resize(n);
            for (auto &c : g.cells) {
                std::size_t k;
                in >> k;
                c.resize(k);
                for (auto &v : c) in >> v;
            }
        } else if (tok == "CELL_TYPES") {
            std::size_t n;
            in >> n;
            g.cell_types.resize(n);
            for (auto &t : g.cell_types) in >> t;
        } else if (tok == "VECTORS") {
            NamedField f;
            std::string type;
            in >> f.name >> type;
            f.values.resize(g.points.size());
            for (auto &v : f.values) in >> v[0] >> v[1] >> v[2];
            g.fields.push_back(std::move(f));
        }
        if (!in && !in.eof()) throw IoError("malformed VTK file " + path);
    }
    return g;
}

} // namespace weavehom
