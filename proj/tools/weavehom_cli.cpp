#include <iostream>

#include <CLI11.hpp>

#include "weavehom/errors.hpp"
#include "weavehom/pipeline.hpp"

using namespace weavehom;

int main(int argc, char **argv) {
    CLI::App app{"Homogenized von Karman plates for woven textiles"};
    app.require_subcommand(1);
    std::string config_path;
    CliFlags flags;
    app.add_option("--config", config_path, "configuration file (section.key = value)");
    app.add_option("--out", flags.out_dir, "output directory (overrides output.dir)");
    app.add_flag("--solid-cell", flags.solid_cell, "use the solid box cell");
    app.add_flag("--full", flags.full, "geom: also export the tiled textile");
    app.add_option("--tol", flags.tol, "symmetry and orthotropy tolerance")->check(CLI::PositiveNumber);

    using Cmd = int (*)(const RunConfig &, const CliFlags &, std::ostream &);
    const std::pair<const char *, Cmd> commands[] = {
        {"geom", cmd_geom}, {"homog", cmd_homog}, {"plate", cmd_plate}, {"buckle", cmd_buckle}, {"verify", cmd_verify}};
    const char *help[] = {"build and check the cell mesh", "homogenize the cell", "solve the macroscopic plate",
                          "compression buckling sweep", "fine-scale versus homogenized energy"};
    std::vector<std::pair<CLI::App *, Cmd>> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i)
        subs.emplace_back(app.add_subcommand(commands[i].first, help[i]), commands[i].second);
    for (auto &[sub, cmd] : subs) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    try {
        const RunConfig config = config_path.empty() ? parse_config("") : load_config(config_path);
        for (auto &[sub, cmd] : subs)
            if (sub->parsed()) return cmd(config, flags, std::cout);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParameterError &e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GeometryError &e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitGeometry;
    } catch (const SolverError &e) {
        std::cerr << "solver error: " << e.what();
        if (e.final_residual() >= 0) std::cerr << " (final residual " << e.final_residual() << ")";
        std::cerr << "\n";
        return kExitSolver;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitConfig;
}
