#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmlab/runner.hpp"

using namespace hmlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kGeodesicConfig = R"json({
  "name": "geodesic-1d-test",
  "run": "minimize",
  "seed": 7,
  "grid": { "dim": 1, "h": 0.015625, "extent": 1.0 },
  "targets": { "kind": "circle", "radius": 1.0 },
  "interface": { "kind": "rotation", "beta": 0.5235987755982988 },
  "boundary": { "form": "angles", "theta_plus": 0.0, "theta_minus": 1.5707963267948966 },
  "minimize": { "gradient_tol": 1e-9, "max_iterations": 100000, "cascade_from_h": 0.0625 }
})json";

}  // namespace

TEST_CASE("scenario parsing and config errors") {
    SUBCASE("a full config round-trips through the parser") {
        const Scenario s = parse_scenario(kGeodesicConfig);
        CHECK(s.name == "geodesic-1d-test");
        CHECK(s.run == RunKind::Minimize);
        CHECK(s.dim == 1);
        CHECK(s.seed == 7);
        CHECK(s.beta == doctest::Approx(M_PI / 6));
    }
    SUBCASE("malformed JSON is a ConfigError") {
        CHECK_THROWS_AS(parse_scenario("{ not json"), ConfigError);
    }
    SUBCASE("unknown run kinds and bad tolerances are rejected with context") {
        CHECK_THROWS_AS(parse_scenario(R"({"run":"explode","grid":{"dim":1,"h":0.25}})"),
                        ConfigError);
        CHECK_THROWS_AS(
            parse_scenario(
                R"({"grid":{"dim":1,"h":0.25},"minimize":{"max_iterations":0}})"),
            ConfigError);
        CHECK_THROWS_AS(
            parse_scenario(R"({"grid":{"dim":1,"h":0.25},"picard":{"alpha":1.5}})"),
            ConfigError);
    }
    SUBCASE("h must divide the extent") {
        Scenario s = parse_scenario(R"({"grid":{"dim":2,"h":0.3}})");
        CHECK_THROWS_AS(build_problem(s), ConfigError);
    }
}

TEST_CASE("validation") {
    SUBCASE("compatible configs validate ok") {
        const Scenario s = parse_scenario(kGeodesicConfig);
        const ValidationReport rep = validate_scenario(s);
        CHECK(rep.ok);
        CHECK(rep.edge_compatibility <= 1e-12);
    }
    SUBCASE("an edge-compatibility violation is listed with node indices") {
        // constant data with Phi(g+) != g- at the corner ring
        Scenario s = parse_scenario(R"json({
          "run": "minimize",
          "grid": { "dim": 2, "h": 0.25 },
          "targets": { "kind": "circle" },
          "interface": { "kind": "rotation", "beta": 0.5 },
          "boundary": { "form": "angles", "theta_plus": 0.0, "theta_minus": 0.9 }
        })json");
        const ValidationReport rep = validate_scenario(s);
        CHECK(!rep.ok);
        CHECK(!rep.messages.empty());
        CHECK(rep.messages.front().find("node") != std::string::npos);
    }
    SUBCASE("flow runs with incompatible initial flux warn but stay valid") {
        Scenario s = parse_scenario(kGeodesicConfig);
        s.run = RunKind::Flow;
        s.flow_opts.t_end = 0.001;
        const ValidationReport rep = validate_scenario(s);
        CHECK(rep.ok);
        REQUIRE(!rep.messages.empty());
        CHECK(rep.messages.front().find("warning") != std::string::npos);
        CHECK(rep.initial_flux_compat > 0.0);
    }
}

TEST_CASE("run pipeline artifacts and determinism") {
    const fs::path base = fs::temp_directory_path() / "hmlab_cli_test";
    fs::remove_all(base);
    fs::create_directories(base);

    Scenario s = parse_scenario(kGeodesicConfig);
    const RunOutputs out1 = run_scenario(s, (base / "run1").string());
    const RunOutputs out2 = run_scenario(s, (base / "run2").string());

    SUBCASE("the expected artifacts exist and the manifest lists them") {
        for (const char* f : {"field.csv", "ledger.csv", "flux_residual.csv", "manifest.json"})
            CHECK(fs::exists(base / "run1" / f));
        CHECK(out1.measured.count("edge_energy") == 1);
        CHECK(out1.measured.count("flux_residual_max") == 1);
        const std::string manifest = slurp(base / "run1" / "manifest.json");
        CHECK(manifest.find("config_hash") != std::string::npos);
        CHECK(manifest.find("field.csv") != std::string::npos);
    }
    SUBCASE("identical config and seed give byte-identical outputs") {
        for (const char* f : {"field.csv", "ledger.csv", "flux_residual.csv", "manifest.json"}) {
            CHECK(slurp(base / "run1" / f) == slurp(base / "run2" / f));
        }
    }
    SUBCASE("post-hoc diagnostics on the saved field reproduce the energy") {
        Scenario d = s;
        d.run = RunKind::Diagnose;
        const RunOutputs diag =
            diagnose_field(d, (base / "run1" / "field.csv").string(),
                           (base / "diag").string());
        CHECK(diag.measured.at("edge_energy") ==
              doctest::Approx(out1.measured.at("edge_energy")).epsilon(1e-12));
    }
    fs::remove_all(base);
}

TEST_CASE("hedgehog diagnose pipeline emits curves and the detector map") {
    const fs::path base = fs::temp_directory_path() / "hmlab_cli_hh";
    fs::remove_all(base);
    Scenario s = parse_scenario(R"json({
      "name": "hedgehog-3d-small",
      "run": "diagnose",
      "init": "homogeneous",
      "grid": { "dim": 3, "h": 0.125 },
      "targets": { "kind": "sphere-equator" },
      "interface": { "kind": "identity" },
      "boundary": { "form": "radial-projection" },
      "diagnostics": {
        "monotonicity": { "center": [0, 0, 0], "radii": [0.3, 0.5, 0.7] },
        "detect": { "scale": 0.5, "eps0": 0.5 },
        "decay": { "center": [0, 0, 0], "r": 0.5, "factor": 0.5 }
      }
    })json");
    const RunOutputs out = run_scenario(s, (base / "out").string());
    CHECK(fs::exists(base / "out" / "monotonicity.csv"));
    CHECK(fs::exists(base / "out" / "detect.csv"));
    CHECK(out.measured.at("flagged_count") >= 1.0);
    // pipeline smoke check at a deliberately coarse 17^3 grid; the 33^3
    // accuracy gate lives in the acceptance suite
    CHECK(std::fabs(out.measured.at("decay_ratio") - 1.0) < 0.35);
    CHECK(out.measured.at("mono_theta_min") > 0.7 * 8 * M_PI);
    fs::remove_all(base);
}

TEST_CASE("constant scenario: zero-energy ledger and empty flagged set") {
    const fs::path base = fs::temp_directory_path() / "hmlab_cli_const";
    fs::remove_all(base);
    Scenario s = parse_scenario(R"json({
      "name": "constant",
      "run": "minimize",
      "grid": { "dim": 2, "h": 0.125 },
      "targets": { "kind": "circle" },
      "interface": { "kind": "rotation", "beta": 0.4 },
      "boundary": { "form": "constant", "theta_plus": 0.7 },
      "diagnostics": { "detect": { "scale": 0.5, "eps0": 0.5 } }
    })json");
    const RunOutputs out = run_scenario(s, (base / "out").string());
    CHECK(out.measured.at("edge_energy") <= 1e-20);
    CHECK(out.measured.at("flagged_count") == 0.0);
    for (double e : out.ledger->energy) CHECK(e <= 1e-20);
    fs::remove_all(base);
}

TEST_CASE("the installed binary runs, validates, and reports config errors") {
    const fs::path base = fs::temp_directory_path() / "hmlab_cli_bin";
    fs::remove_all(base);
    fs::create_directories(base);
    write_file(base / "scenario.json", kGeodesicConfig);
    write_file(base / "broken.json", "{ nope");

    const std::string bin = HMLAB_BINARY_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " > " + (base / "stdout.txt").string() +
                                " 2> " + (base / "stderr.txt").string();
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };

    CHECK(run("validate --config " + (base / "scenario.json").string()) == 0);
    CHECK(run("run --config " + (base / "scenario.json").string() + " --out " +
              (base / "out").string() + " --threads 2") == 0);
    CHECK(fs::exists(base / "out" / "manifest.json"));

    CHECK(run("run --config " + (base / "broken.json").string()) == 2);
    const std::string err = slurp(base / "stderr.txt");
    CHECK(err.find("\"error\"") != std::string::npos);
    CHECK(err.find("ConfigError") != std::string::npos);
    fs::remove_all(base);
}
