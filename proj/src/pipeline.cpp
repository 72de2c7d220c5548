#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "weavehom/buckling.hpp"
#include "weavehom/errors.hpp"
#include "weavehom/pipeline.hpp"
#include "weavehom/plate.hpp"
#include "weavehom/verify.hpp"
#include "weavehom/vtk.hpp"

namespace weavehom {

namespace {

using json = nlohmann::ordered_json;

std::string out_dir(const RunConfig &c, const CliFlags &f) {
    const std::string dir = f.out_dir.empty() ? c.output_dir : f.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << text;
    if (!f) throw IoError("write failed for '" + path + "'");
}

void write_json(const std::string &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

json matrix_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(r);
    }
    return rows;
}

Matrix3d matrix3_from_json(const json &j, const std::string &name) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(name + " must be a 3x3 array");
    Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_array() || j[i].size() != 3) throw ConfigError(name + " must be a 3x3 array");
        for (int k = 0; k < 3; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json checks_json(const OrthotropyReport &r) {
    json a = json::array();
    for (const auto &c : r.checks) a.push_back({{"name", c.name}, {"value", c.value}, {"pass", c.pass}});
    return a;
}

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

PlateTensors tensors_for(const RunConfig &config, double tol, std::ostream &log) {
    if (!config.tensors_file.empty()) {
        log << "reading tensors from " << config.tensors_file << "\n";
        return read_tensors_json(config.tensors_file);
    }
    return run_homogenization(config, false, tol).tensors;
}

NewtonOptions newton_options(const RunConfig &c) {
    NewtonOptions o;
    o.tol = c.newton_tol;
    if (c.max_iters > 0) o.max_iterations = c.max_iters;
    return o;
}

} // namespace

CellMesh solid_cell_for(const WeaveParams &params) {
    const int n = 2 * (params.resolution.axial + params.resolution.cross);
    return build_solid_cell_mesh(params, n, n, 2 * params.resolution.thick);
}

HomogRun run_homogenization(const RunConfig &config, bool solid_cell, double tol) {
    HomogRun run;
    const ElasticTensor tensor = config.material();
    run.mesh = solid_cell ? solid_cell_for(config.geometry) : build_cell_mesh(config.geometry);
    HomogenizationOptions opt;
    opt.solve.tol = config.cg_tol;
    opt.solve.max_iterations = config.max_iters;
    run.correctors = solve_cell_problems(run.mesh, tensor, opt);
    run.tensors = compute_plate_tensors(run.mesh, run.correctors, tensor, &run.diagnostics);
    if (!tensor.is_isotropic()) {
        run.symmetry_status = "not applicable: material is not isotropic and homogeneous";
    } else {
        run.orthotropy = check_orthotropy(run.tensors, tol);
        try {
            run.correctors_symmetry = corrector_symmetry_report(run.mesh, run.correctors, tol);
            run.symmetry_status = run.orthotropy.all_pass() && run.correctors_symmetry.all_pass() ? "pass" : "fail";
        } catch (const ContractError &) {
            run.symmetry_status = run.orthotropy.all_pass() ? "pass" : "fail";
            run.correctors_symmetry.checks.clear();
        }
    }
    if (config.prestrain)
        run.prestress = solve_prestress(run.mesh, tensor, PreStrainField::uniform(*config.prestrain), run.correctors,
                                        run.tensors, opt);
    return run;
}

PlateTensors read_tensors_json(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read tensors file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const std::exception &e) {
        throw ConfigError("tensors file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("voigt_convention") || j["voigt_convention"] != "tensor")
        throw ConfigError("tensors file '" + path + "' must use voigt_convention \"tensor\"");
    PlateTensors t;
    t.a_hom = matrix3_from_json(j.at("a_hom"), "a_hom");
    t.b_hom = matrix3_from_json(j.at("b_hom"), "b_hom");
    t.c_hom = matrix3_from_json(j.at("c_hom"), "c_hom");
    t.cell_volume = j.at("cell_volume").get<double>();
    return t;
}

int cmd_geom(const RunConfig &config, const CliFlags &flags, std::ostream &log) {
    const std::string dir = out_dir(config, flags);
    const CellMesh cell = flags.solid_cell ? solid_cell_for(config.geometry) : build_cell_mesh(config.geometry);
    const MeshCheck chk = check_cell_mesh(cell);
    export_vtk(cell, {}, dir + "/cell.vtk");
    json summary;
    summary["nodes"] = cell.num_nodes();
    summary["elements"] = cell.num_elements();
    summary["volume"] = cell.volume();
    summary["contact_faces"] = cell.contact_faces.size();
    summary["periodic_pairs"] = cell.periodic_pairs.size();
    summary["min_jacobian"] = chk.min_jacobian;
    summary["invariants"] = {{"positive_jacobian", chk.positive_jacobian},
                             {"periodic_bijection", chk.periodic_bijection},
                             {"symmetric", chk.symmetric},
                             {"contact_conforming", chk.contact_conforming}};
    log << "cell: " << cell.num_nodes() << " nodes, " << cell.num_elements() << " elements\n";
    log << "  positive_jacobian  " << pass_fail(chk.positive_jacobian) << "\n";
    log << "  periodic_bijection " << pass_fail(chk.periodic_bijection) << "\n";
    log << "  symmetric          " << pass_fail(chk.symmetric) << "\n";
    log << "  contact_conforming " << pass_fail(chk.contact_conforming) << "\n";
    for (const auto &m : chk.messages) log << "  " << m << "\n";
    if (flags.full) {
        const CellMesh tex = build_textile_mesh(config.geometry);
        export_vtk(tex, {}, dir + "/textile.vtk");
        summary["textile"] = {{"n_periods", config.geometry.n_periods},
                              {"nodes", tex.num_nodes()},
                              {"elements", tex.num_elements()},
                              {"clamped_nodes", tex.clamped_nodes.size()}};
        log << "textile: " << tex.num_nodes() << " nodes, " << tex.num_elements() << " elements\n";
    }
    write_json(dir + "/geom.json", summary);
    return chk.ok() ? kExitOk : kExitCheck;
}

int cmd_homog(const RunConfig &config, const CliFlags &flags, std::ostream &log) {
    const std::string dir = out_dir(config, flags);
    const HomogRun run = run_homogenization(config, flags.solid_cell, flags.tol);
    json j;
    j["voigt_convention"] = "tensor";
    j["index_order"] = {"11", "22", "12"};
    j["a_hom"] = matrix_json(run.tensors.a_hom);
    j["b_hom"] = matrix_json(run.tensors.b_hom);
    j["c_hom"] = matrix_json(run.tensors.c_hom);
    j["cell_volume"] = run.tensors.cell_volume;
    j["cell"] = flags.solid_cell ? "solid" : "textile";
    json sym;
    sym["status"] = run.symmetry_status;
    sym["tolerance"] = flags.tol;
    sym["orthotropy"] = checks_json(run.orthotropy);
    sym["correctors"] = checks_json(run.correctors_symmetry);
    j["symmetry_report"] = sym;
    j["diagnostics"] = {{"galerkin_a", run.diagnostics.galerkin_a},
                        {"galerkin_c", run.diagnostics.galerkin_c},
                        {"printed_discrepancy", run.diagnostics.printed_discrepancy},
                        {"a_linear", matrix_json(run.diagnostics.a_linear)},
                        {"c_linear", matrix_json(run.diagnostics.c_linear)}};
    json solves = json::array();
    for (const auto &r : run.correctors.reports)
        solves.push_back({{"iterations", r.iterations}, {"relative_residual", r.relative_residual}});
    j["cell_solves"] = solves;
    if (run.prestress) {
        j["prestress"] = {{"e_star_hom", matrix_json(run.prestress->effective)},
                          {"e_star_hom_printed", matrix_json(run.prestress->printed)},
                          {"moment", {run.prestress->moment[0], run.prestress->moment[1], run.prestress->moment[2]}}};
    }
    write_json(dir + "/tensors.json", j);

    std::vector<NamedField> fields;
    const char *names[3] = {"11", "22", "12"};
    for (int J = 0; J < 3; ++J) fields.push_back({std::string("chi_m_") + names[J], run.correctors.chi_m[J].nodal});
    for (int J = 0; J < 3; ++J) fields.push_back({std::string("chi_b_") + names[J], run.correctors.chi_b[J].nodal});
    if (run.prestress) fields.push_back({"chi_p", run.prestress->chi_p.nodal});
    export_vtk(run.mesh, fields, dir + "/correctors.vtk");

    log << std::setprecision(8);
    log << "a_hom =\n" << run.tensors.a_hom << "\nb_hom =\n" << run.tensors.b_hom << "\nc_hom =\n" << run.tensors.c_hom << "\n";
    log << "symmetry: " << run.symmetry_status << "\n";
    for (const auto &c : run.orthotropy.checks) log << "  " << pass_fail(c.pass) << " " << c.name << " " << c.value << "\n";
    for (const auto &c : run.correctors_symmetry.checks)
        log << "  " << pass_fail(c.pass) << " " << c.name << " " << c.value << "\n";
    return run.symmetry_status == "fail" ? kExitCheck : kExitOk;
}

int cmd_plate(const RunConfig &config, const CliFlags &flags, std::ostream &log) {
    const std::string dir = out_dir(config, flags);
    LoadSpec load;
    load.f = config.plate_f;
    PlateTensors tensors;
    if (config.prestrain) {
        const HomogRun run = run_homogenization(config, flags.solid_cell, flags.tol);
        tensors = run.tensors;
        load.prestrain = run.prestress->effective;
    } else {
        tensors = flags.solid_cell ? run_homogenization(config, true, flags.tol).tensors
                                   : tensors_for(config, flags.tol, log);
    }
    const PlateMesh mesh = PlateMesh::build(config.plate_nx, config.plate_ny, config.geometry.L);
    const bool linear = config.plate_model == "linear";
    const PlateProblem problem(mesh, tensors, load, linear ? PlateModel::Linear : PlateModel::VonKarman);
    const PlateBC bc = config.plate_bc == "compression" ? PlateBC::Compression : PlateBC::Gamma;
    const double e_star = bc == PlateBC::Compression ? config.plate_e_star : 0.0;

    json j;
    PlateState state;
    if (linear) {
        state = solve_linear(problem, boundary_data(mesh, bc, e_star));
        j["energy"] = problem.energy(state.dofs);
        j["solver"] = "linear";
    } else {
        const MinimizeResult r = minimize_vk(problem, bc, e_star, newton_options(config));
        state = r.state;
        j["energy"] = r.energy;
        j["solver"] = "newton";
        j["start"] = r.start;
        j["iterations"] = r.iterations;
        j["gradient_norm"] = r.gradient_norm;
        j["start_energies"] = r.start_energies;
        j["start_u3_max"] = r.start_u3_max;
        j["energy_trace"] = r.energy_trace;
    }
    double n1 = 0, n2 = 0, n3 = 0, best = -1;
    Eigen::Vector2d at = Eigen::Vector2d::Zero();
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        n1 += std::pow(state.at(n, kU1), 2);
        n2 += std::pow(state.at(n, kU2), 2);
        n3 += std::pow(state.at(n, kW), 2);
        if (std::abs(state.at(n, kW)) > best) {
            best = std::abs(state.at(n, kW));
            at = mesh.coord(n);
        }
    }
    j["model"] = config.plate_model;
    j["bc"] = config.plate_bc;
    j["e_star"] = e_star;
    j["f"] = {config.plate_f[0], config.plate_f[1], config.plate_f[2]};
    j["prestrain_hom"] = matrix_json(load.prestrain);
    j["grid"] = {mesh.nx, mesh.ny};
    j["dof_norms"] = {{"U1", std::sqrt(n1)}, {"U2", std::sqrt(n2)}, {"U3", std::sqrt(n3)}};
    j["u3_max"] = best;
    j["u3_max_at"] = {at[0], at[1]};
    write_json(dir + "/plate.json", j);
    export_plate_vtk(problem, state, dir + "/plate.vtk");
    std::ostringstream csv;
    csv << std::setprecision(17) << "x1,U3\n";
    for (const auto &[x, w] : centre_profile(problem, state, 2 * mesh.nx + 1)) csv << x << "," << w << "\n";
    write_text(dir + "/profile.csv", csv.str());
    log << std::setprecision(10) << "plate energy " << j["energy"].get<double>() << ", max|U3| " << best << " at ("
        << at[0] << ", " << at[1] << ")\n";
    return kExitOk;
}

int cmd_buckle(const RunConfig &config, const CliFlags &flags, std::ostream &log) {
    const std::string dir = out_dir(config, flags);
    const PlateTensors tensors =
        flags.solid_cell ? run_homogenization(config, true, flags.tol).tensors : tensors_for(config, flags.tol, log);
    const double L = config.geometry.L;
    const CompressionCase cc{0.0, L, tensors.a_hom(0, 0), tensors.c_hom(0, 0)};
    const BucklingThresholds th = analytic_thresholds(cc);
    SweepOptions opt;
    opt.e_star_min = config.buckle_e_max > 0.0 ? config.buckle_e_min : 0.5 * th.necessary;
    opt.e_star_max = config.buckle_e_max > 0.0 ? config.buckle_e_max : 1.5 * th.test_mode;
    opt.n_points = config.buckle_points;
    opt.nx = config.buckle_nx;
    opt.newton = newton_options(config);
    const SweepResult r = sweep_buckling_2d(tensors, L, opt);
    write_text(dir + "/buckle.csv", sweep_csv(r));
    const double e1d = critical_strain_1d(cc.a11, cc.c11, L);
    json j;
    j["e_star_critical"] = finite_or_null(r.e_star_critical);
    j["necessary_bound"] = r.necessary_bound;
    j["test_mode_bound"] = r.test_mode_bound;
    j["C_star"] = r.C_star;
    j["bracket_holds"] = r.bracket_holds;
    j["energy_convention"] = "plate energy with 1/2 dU3 dU3 in the membrane strain";
    j["a1111"] = cc.a11;
    j["c1111"] = cc.c11;
    j["L"] = L;
    j["grid"] = opt.nx;
    j["bisection_steps"] = r.bisection_steps;
    j["reduced_1d"] = {{"e_star_critical", e1d},
                       {"convention", "reduced functional a(e*^2 - 2 e* V'^2 + V'^4) + c V''^2"}};
    write_json(dir + "/buckle.json", j);
    log << std::setprecision(8) << "necessary " << r.necessary_bound << ", test-mode " << r.test_mode_bound
        << ", 2D e*_c " << r.e_star_critical << ", 1D e*_c " << e1d << "\n";
    if (!r.bracket_holds) log << "note: 2D critical strain lies outside the 1D bounds\n";
    return kExitOk;
}

int cmd_verify(const RunConfig &config, const CliFlags &flags, std::ostream &log) {
    const std::string dir = out_dir(config, flags);
    const ElasticTensor tensor = config.material();
    const PlateTensors tensors = tensors_for(config, flags.tol, log);
    VerifyOptions opt;
    opt.n_periods = config.verify_n_periods;
    opt.plate_nx = config.verify_plate_nx;
    opt.f = config.plate_f;
    const VerifyResult r = verify_homogenization_limit(config.geometry, tensor, tensors, opt);
    json rows = json::array();
    for (const auto &row : r.rows) {
        rows.push_back({{"n_periods", row.n_periods},
                        {"epsilon", row.epsilon},
                        {"dofs", row.n_dofs},
                        {"m_eps", row.m_eps},
                        {"m_eps_over_eps5", row.m_scaled},
                        {"ratio", row.ratio},
                        {"ratio_literal", row.ratio_literal},
                        {"distance", row.distance}});
        log << std::setprecision(8) << "n_periods " << row.n_periods << ": ratio " << row.ratio << "\n";
    }
    json j;
    j["j_lin_min"] = r.j_lin_min;
    j["cell_volume"] = r.cell_volume;
    j["normalization"] = "ratio = (m_eps / eps^5) / ((|Y*| / 4) min J_lin)";
    j["rows"] = rows;
    j["distance_decreases"] = r.distance_decreases;
    write_json(dir + "/verify.json", j);
    log << "trend " << (r.distance_decreases ? "decreasing" : "not decreasing") << "\n";
    return r.rows.size() >= 2 && !r.distance_decreases ? kExitCheck : kExitOk;
}

} // namespace weavehom
