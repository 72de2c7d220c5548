#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "weavehom/config.hpp"
#include "weavehom/homogenizer.hpp"

namespace weavehom {

struct CliFlags {
    std::string out_dir;     // overrides output.dir when set
    bool solid_cell = false; // homogenize the solid box instead of the textile
    bool full = false;       // geom: also export the tiled textile
    double tol = 1e-6;       // symmetry and orthotropy tolerance
};

/// Exit codes of the command line tool.
enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitGeometry = 3, kExitSolver = 4, kExitCheck = 5 };

struct HomogRun {
    CellMesh mesh;
    CorrectorSet correctors;
    PlateTensors tensors;
    PlateTensorDiagnostics diagnostics;
    OrthotropyReport orthotropy;
    OrthotropyReport correctors_symmetry;
    std::string symmetry_status; // "pass", "fail" or "not applicable: ..."
    std::optional<PrestressResult> prestress;
};

/// Solid grid used by --solid-cell: 2(axial + cross) cells per side and
/// 2 thick layers.
CellMesh solid_cell_for(const WeaveParams &params);

HomogRun run_homogenization(const RunConfig &config, bool solid_cell, double tol);

/// Tensors as written to tensors.json.
PlateTensors read_tensors_json(const std::string &path);

int cmd_geom(const RunConfig &config, const CliFlags &flags, std::ostream &log);
int cmd_homog(const RunConfig &config, const CliFlags &flags, std::ostream &log);
int cmd_plate(const RunConfig &config, const CliFlags &flags, std::ostream &log);
int cmd_buckle(const RunConfig &config, const CliFlags &flags, std::ostream &log);
int cmd_verify(const RunConfig &config, const CliFlags &flags, std::ostream &log);

} // namespace weavehom
