#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "weavehom/config.hpp"
#include "weavehom/errors.hpp"
#include "weavehom/pipeline.hpp"

using namespace weavehom;

TEST_CASE("config defaults and overrides") {
    const RunConfig d = parse_config("");
    CHECK(d.geometry.kappa == doctest::Approx(0.1));
    CHECK(d.plate_bc == "gamma");
    CHECK_FALSE(d.prestrain.has_value());

    const RunConfig c = parse_config("# comment\n"
                                     "geometry.kappa = 0.05   # trailing\n"
                                     "geometry.resolution = [4, 2, 1]\n"
                                     "plate.bc = \"compression\"\n"
                                     "plate.f = [0, 0, 0]\n"
                                     "plate.e_star = 0.2\n"
                                     "prestress.e_star = [0.01, 0, 0, 0, 0, 0, 0, 0, 0]\n"
                                     "verify.n_periods = [1, 2, 3]\n");
    CHECK(c.geometry.kappa == doctest::Approx(0.05));
    CHECK(c.geometry.resolution.axial == 4);
    CHECK(c.plate_bc == "compression");
    CHECK(c.plate_e_star == doctest::Approx(0.2));
    REQUIRE(c.prestrain.has_value());
    CHECK((*c.prestrain)(0, 0) == doctest::Approx(0.01));
    CHECK(c.verify_n_periods.size() == 3);
}

TEST_CASE("config errors name the field") {
    const auto message = [](const std::string &text) {
        try {
            parse_config(text);
        } catch (const ConfigError &e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("geometry.bogus = 1").find("geometry.bogus") != std::string::npos);
    CHECK(message("plate.nx = 4\nplate.nx = 5").find("duplicate") != std::string::npos);
    CHECK(message("plate.nx = abc").find("plate.nx") != std::string::npos);
    CHECK(message("plate.nx = 2.5").find("plate.nx") != std::string::npos);
    CHECK(message("plate.f = [1, 2]").find("plate.f") != std::string::npos);
    CHECK(message("plate.bc = clamped").find("plate.bc") != std::string::npos);
    CHECK(message("plate.bc = compression").find("plate.f") != std::string::npos);
    CHECK(message("material.nu = 0.5").find("material.nu") != std::string::npos);
    CHECK(message("prestress.e_star = [0, 1, 0, 0, 0, 0, 0, 0, 0]").find("symmetric") != std::string::npos);
    CHECK(message("no equals sign").find("line 1") != std::string::npos);
    CHECK_THROWS_AS(parse_config("geometry.kappa = 0.3"), ParameterError);
    CHECK_THROWS_AS(load_config("/nonexistent/weavehom.cfg"), ConfigError);
}

TEST_CASE("homog command round-trips tensors") {
    const auto dir = std::filesystem::temp_directory_path() / "weavehom_config_test";
    std::filesystem::remove_all(dir);
    const RunConfig cfg = parse_config("geometry.resolution = [4, 2, 1]\n");
    CliFlags flags;
    flags.out_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_homog(cfg, flags, log) == kExitOk);
    const HomogRun run = run_homogenization(cfg, false, flags.tol);
    const PlateTensors t = read_tensors_json((dir / "tensors.json").string());
    CHECK((t.a_hom - run.tensors.a_hom).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((t.b_hom - run.tensors.b_hom).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((t.c_hom - run.tensors.c_hom).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(run.symmetry_status == "pass");

    std::ofstream(dir / "bad.json") << "{\"voigt_convention\": \"engineering\"}";
    CHECK_THROWS(read_tensors_json((dir / "bad.json").string()));
    std::filesystem::remove_all(dir);
}
