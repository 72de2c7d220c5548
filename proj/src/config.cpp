#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "weavehom/config.hpp"
#include "weavehom/errors.hpp"

namespace weavehom {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception &) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    return x;
}

int to_int(const std::string &key, const std::string &v) {
    const double x = to_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

std::vector<std::string> to_list(const std::string &key, const std::string &v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw ConfigError(key + ": expected a list [a, b, ...]");
    std::vector<std::string> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list entry");
        out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string &key, const std::string &v, std::size_t n) {
    const auto items = to_list(key, v);
    if (n && items.size() != n) throw ConfigError(key + ": expected " + std::to_string(n) + " entries");
    std::vector<double> out;
    for (const auto &s : items) out.push_back(to_double(key, s));
    return out;
}

std::vector<int> to_ints(const std::string &key, const std::string &v, std::size_t n) {
    const auto items = to_list(key, v);
    if (n && items.size() != n) throw ConfigError(key + ": expected " + std::to_string(n) + " entries");
    std::vector<int> out;
    for (const auto &s : items) out.push_back(to_int(key, s));
    return out;
}

std::string unquote(const std::string &v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

void require(bool ok, const std::string &msg) {
    if (!ok) throw ConfigError(msg);
}

} // namespace

RunConfig parse_config(const std::string &text) {
    RunConfig c;
    using Setter = std::function<void(const std::string &, const std::string &)>;
    const std::map<std::string, Setter> setters{
        {"geometry.kappa", [&](auto &k, auto &v) { c.geometry.kappa = to_double(k, v); }},
        {"geometry.epsilon", [&](auto &k, auto &v) { c.geometry.epsilon = to_double(k, v); }},
        {"geometry.L", [&](auto &k, auto &v) { c.geometry.L = to_double(k, v); }},
        {"geometry.n_periods", [&](auto &k, auto &v) { c.geometry.n_periods = to_int(k, v); }},
        {"geometry.resolution",
         [&](auto &k, auto &v) {
             const auto r = to_ints(k, v, 3);
             c.geometry.resolution = {r[0], r[1], r[2]};
         }},
        {"material.model", [&](auto &, auto &v) { c.material_model = unquote(v); }},
        {"material.E", [&](auto &k, auto &v) { c.E = to_double(k, v); }},
        {"material.nu", [&](auto &k, auto &v) { c.nu = to_double(k, v); }},
        {"material.lambda", [&](auto &k, auto &v) { c.lambda = to_double(k, v); }},
        {"material.mu", [&](auto &k, auto &v) { c.mu = to_double(k, v); }},
        {"material.table", [&](auto &, auto &v) { c.material_table = unquote(v); }},
        {"plate.nx", [&](auto &k, auto &v) { c.plate_nx = to_int(k, v); }},
        {"plate.ny", [&](auto &k, auto &v) { c.plate_ny = to_int(k, v); }},
        {"plate.bc", [&](auto &, auto &v) { c.plate_bc = unquote(v); }},
        {"plate.model", [&](auto &, auto &v) { c.plate_model = unquote(v); }},
        {"plate.f",
         [&](auto &k, auto &v) {
             const auto f = to_doubles(k, v, 3);
             c.plate_f = Eigen::Vector3d(f[0], f[1], f[2]);
         }},
        {"plate.e_star", [&](auto &k, auto &v) { c.plate_e_star = to_double(k, v); }},
        {"plate.tensors", [&](auto &, auto &v) { c.tensors_file = unquote(v); }},
        {"prestress.e_star",
         [&](auto &k, auto &v) {
             if (v == "null") {
                 c.prestrain.reset();
                 return;
             }
             const auto e = to_doubles(k, v, 9);
             Matrix3d m;
             for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = e[i];
             c.prestrain = m;
         }},
        {"buckling.e_star_min", [&](auto &k, auto &v) { c.buckle_e_min = to_double(k, v); }},
        {"buckling.e_star_max", [&](auto &k, auto &v) { c.buckle_e_max = to_double(k, v); }},
        {"buckling.n_points", [&](auto &k, auto &v) { c.buckle_points = to_int(k, v); }},
        {"buckling.nx", [&](auto &k, auto &v) { c.buckle_nx = to_int(k, v); }},
        {"verify.n_periods", [&](auto &k, auto &v) { c.verify_n_periods = to_ints(k, v, 0); }},
        {"verify.plate_nx", [&](auto &k, auto &v) { c.verify_plate_nx = to_int(k, v); }},
        {"solver.cg_tol", [&](auto &k, auto &v) { c.cg_tol = to_double(k, v); }},
        {"solver.newton_tol", [&](auto &k, auto &v) { c.newton_tol = to_double(k, v); }},
        {"solver.max_iters", [&](auto &k, auto &v) { c.max_iters = to_int(k, v); }},
        {"output.dir", [&](auto &, auto &v) { c.output_dir = unquote(v); }},
    };
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (seen.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen[key] = lineno;
        if (value.empty()) throw ConfigError(key + ": missing value");
        it->second(key, value);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void RunConfig::validate() const {
    geometry.validate();
    require(material_model == "isotropic" || material_model == "lame" || material_model == "general",
            "material.model must be isotropic, lame or general");
    if (material_model == "isotropic") {
        require(E > 0.0, "material.E must be positive");
        require(nu > -1.0 && nu < 0.5, "material.nu must lie in (-1, 0.5)");
    } else if (material_model == "lame") {
        require(mu > 0.0, "material.mu must be positive");
        require(3.0 * lambda + 2.0 * mu > 0.0, "material.lambda must satisfy 3 lambda + 2 mu > 0");
    } else {
        require(!material_table.empty(), "material.table is required for the general model");
    }
    require(plate_nx >= 1 && plate_ny >= 1, "plate.nx and plate.ny must be >= 1");
    require(plate_bc == "gamma" || plate_bc == "compression", "plate.bc must be gamma or compression");
    require(plate_model == "vk" || plate_model == "linear", "plate.model must be vk or linear");
    require(plate_e_star >= 0.0, "plate.e_star must be >= 0");
    if (plate_bc == "compression") require(plate_f.norm() == 0.0, "plate.f must be zero with compression boundary conditions");
    if (prestrain) require((*prestrain - prestrain->transpose()).norm() == 0.0, "prestress.e_star must be symmetric");
    require(buckle_e_min >= 0.0 && buckle_e_max >= buckle_e_min, "buckling.e_star_min/max must satisfy 0 <= min <= max");
    require(buckle_points >= 2, "buckling.n_points must be >= 2");
    require(buckle_nx >= 2, "buckling.nx must be >= 2");
    require(!verify_n_periods.empty(), "verify.n_periods must not be empty");
    for (int n : verify_n_periods) require(n >= 1, "verify.n_periods entries must be >= 1");
    require(verify_plate_nx >= 1, "verify.plate_nx must be >= 1");
    require(cg_tol > 0.0 && cg_tol < 1.0, "solver.cg_tol must lie in (0, 1)");
    require(newton_tol > 0.0 && newton_tol < 1.0, "solver.newton_tol must lie in (0, 1)");
    require(max_iters >= 0, "solver.max_iters must be >= 0");
    require(!output_dir.empty(), "output.dir must not be empty");
}

ElasticTensor RunConfig::material() const {
    if (material_model == "isotropic") return ElasticTensor::from_young_poisson(E, nu);
    if (material_model == "lame") return ElasticTensor::isotropic(lambda, mu);
    std::ifstream f(material_table);
    if (!f) throw ConfigError("material.table: cannot read '" + material_table + "'");
    std::map<int, Matrix6d> table;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<double> v;
        while (std::getline(ss, item, ',')) v.push_back(to_double("material.table", trim(item)));
        require(v.size() == 37, "material.table: each row needs a tag and 36 entries");
        Matrix6d C;
        for (int i = 0; i < 36; ++i) C(i / 6, i % 6) = v[1 + i];
        table[static_cast<int>(v[0])] = C;
    }
    require(!table.empty(), "material.table: no rows");
    try {
        return ElasticTensor::general(table);
    } catch (const Error &e) {
        throw ConfigError(std::string("material.table: ") + e.what());
    }
}

} // namespace weavehom
