// Configuration IO, deterministic report serialization, and the pipeline
// stage contracts (exit codes, artifact gating, byte-level determinism).

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "qg/pipeline.hpp"
#include "qg/report.hpp"

using namespace qg;
namespace fs = std::filesystem;

namespace {

// toy1 with a three-sector parameter covering; solver sized down to keep the
// heavier stage tests fast.
const char* kMiniConfig = R"JSON({
  "schema_version": 1,
  "name": "mini",
  "variant": "eps",
  "problem": {
    "k": 1, "S": 1, "q": 1.2, "eps0": 0.1, "delta": 0.5, "k1": 1.0,
    "P": [[1, 0], [0, 0], [0, 0], [1, 0]],
    "terms": [
      {"l0": 2, "l1": 0, "l2": 0, "l3": 1, "delta_l": 2,
       "c": [{"h": 1, "coeffs": [[1, 0]]}]}
    ],
    "cauchy": [{"j": 0, "data": [{"h": 1, "coeffs": [[1, 0]]}]}]
  },
  "geometry": {
    "covering": [
      {"direction_deg": 0, "half_opening_deg": 70, "radius": 0.1},
      {"direction_deg": 120, "half_opening_deg": 70, "radius": 0.1},
      {"direction_deg": 240, "half_opening_deg": 70, "radius": 0.1}
    ],
    "punctured_radius": 0.1,
    "companion": {"direction_deg": 0, "half_opening_deg": 15, "radius": 0.8},
    "borel": [
      {"direction_deg": 0, "half_opening_deg": 55},
      {"direction_deg": 120, "half_opening_deg": 55},
      {"direction_deg": 240, "half_opening_deg": 55}
    ],
    "probe_offsets_deg": [-85, 0, 85]
  },
  "solver": {"N": 5, "r_out": 30},
  "assemble": {"R1": 0.5},
  "probe_grid": {"r_min": 0.03, "r_max": 0.1, "count": 5, "open_upper": true},
  "norm": {"variant": "q-relative", "R1": 0.5, "levels": 4, "arc_nodes": 4,
           "radial_nodes": 1},
  "ch_n_max": 8,
  "rs": {"n_range": [0, 1, 2], "radii": [0.03, 0.05, 0.07, 0.09], "n_z_levels": 2,
         "circle_nodes": 32}
})JSON";

std::string fresh_dir(const std::string& leaf) {
    const fs::path root = fs::temp_directory_path() / "qglab_test_pipeline" / leaf;
    fs::remove_all(root);
    fs::create_directories(root);
    return root.string();
}

std::string replace_once(std::string text, const std::string& from,
                         const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("config parsing: values, defaults, and diagnostics") {
    const LabConfig cfg = parse_config(kMiniConfig, "mini.json");
    CHECK(cfg.name == "mini");
    CHECK(cfg.variant == Variant::eps_family);
    CHECK(cfg.problem.k == 1);
    CHECK(cfg.problem.S == 1);
    CHECK(cfg.problem.q == doctest::Approx(1.2));
    CHECK(cfg.problem.terms.size() == 1);
    CHECK(cfg.problem.terms[0].Delta_l == 2);
    CHECK(cfg.covering.sectors.size() == 3);
    CHECK(cfg.covering.sectors[1].direction == doctest::Approx(deg2rad(120.0)));
    CHECK(cfg.borel.size() == 3);
    CHECK(!cfg.borel[0].bounded());
    CHECK(cfg.companion.radius == doctest::Approx(0.8));
    CHECK(cfg.solver.N == 5);
    CHECK(cfg.solver.r_out == doctest::Approx(30.0));
    CHECK(cfg.probe_grid.count == 5);
    CHECK(cfg.probe_grid.open_upper);
    CHECK(cfg.norm.variant == NormSpec::Variant::q_relative);
    CHECK(cfg.norm.q == doctest::Approx(1.2));          // inherited from problem
    CHECK(cfg.norm.base.radius == doctest::Approx(0.8));  // companion
    CHECK(cfg.norm.arc_nodes == 4);
    CHECK(cfg.ch_n_max == 8);
    CHECK(cfg.rs.N_range == std::vector<int>{0, 1, 2});
    CHECK(cfg.rs.radii.size() == 4);
    CHECK(cfg.rs.circle_nodes == 32);

    // Probe phases: one row per covering sector, direction plus offsets.
    const auto phases = cfg.probe_phases();
    REQUIRE(phases.size() == 3);
    REQUIRE(phases[0].size() == 3);
    CHECK(phases[1][0] == doctest::Approx(deg2rad(120.0 - 85.0)));
    CHECK(phases[1][2] == doctest::Approx(deg2rad(120.0 + 85.0)));

    SUBCASE("malformed JSON reports line and column") {
        try {
            parse_config("{\n  \"name\": \"x\",\n  broken\n}", "bad.json");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("bad.json") != std::string::npos);
            CHECK(msg.find("line 3") != std::string::npos);
        }
    }

    SUBCASE("missing required field names its dotted path") {
        const std::string text = replace_once(kMiniConfig, "\"k\": 1,", "");
        try {
            parse_config(text, "mini.json");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("problem.k") != std::string::npos);
        }
    }

    SUBCASE("unsupported schema version is rejected") {
        const std::string text =
            replace_once(kMiniConfig, "\"schema_version\": 1", "\"schema_version\": 2");
        CHECK_THROWS_AS(parse_config(text, "mini.json"), ConfigError);
    }

    SUBCASE("bad variant string is rejected") {
        const std::string text =
            replace_once(kMiniConfig, "\"variant\": \"eps\"", "\"variant\": \"both\"");
        CHECK_THROWS_AS(parse_config(text, "mini.json"), ConfigError);
    }

    SUBCASE("truncation below the Cauchy order is rejected at parse time") {
        const std::string text = replace_once(kMiniConfig, "\"N\": 5", "\"N\": 0");
        try {
            parse_config(text, "mini.json");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("solver.N") != std::string::npos);
        }
    }

    SUBCASE("zero z-power in a coefficient map is rejected") {
        const std::string text =
            replace_once(kMiniConfig, "\"c\": [{\"h\": 1,", "\"c\": [{\"h\": 0,");
        CHECK_THROWS_AS(parse_config(text, "mini.json"), ConfigError);
    }

    SUBCASE("borel sector count must match the covering") {
        const std::string text = replace_once(
            kMiniConfig, ",\n      {\"direction_deg\": 240, \"half_opening_deg\": 55}\n    ],",
            "\n    ],");
        try {
            parse_config(text, "mini.json");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("geometry.borel") != std::string::npos);
        }
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_config("/nonexistent/nowhere.json"), ConfigError);
    }
}

TEST_CASE("report serialization is deterministic and valid") {
    JsonValue root = JsonValue::object();
    root.set("b", JsonValue::number(0.1));
    root.set("a", JsonValue::integer(42));
    root.set("b", JsonValue::number(0.25));  // replace keeps position
    JsonValue arr = JsonValue::array();
    arr.push(JsonValue::string("x\"y\nz\x01"));
    arr.push(JsonValue::number(std::numeric_limits<double>::infinity()));
    arr.push(JsonValue::number(std::nan("")));
    arr.push(JsonValue::boolean(true));
    arr.push(JsonValue::array());
    root.set("list", std::move(arr));

    const std::string text = root.dump();
    CHECK(text ==
          "{\n"
          "  \"b\": 0.25,\n"
          "  \"a\": 42,\n"
          "  \"list\": [\n"
          "    \"x\\\"y\\nz\\u0001\",\n"
          "    \"inf\",\n"
          "    \"nan\",\n"
          "    true,\n"
          "    []\n"
          "  ]\n"
          "}\n");

    // Round-trips through a strict parser.
    const auto parsed = nlohmann::json::parse(text);
    CHECK(parsed.at("b").get<double>() == doctest::Approx(0.25));
    CHECK(parsed.at("list").size() == 5);

    // 15-significant-digit float formatting.
    JsonValue num = JsonValue::object();
    num.set("x", JsonValue::number(1.0 / 3.0));
    CHECK(num.dump().find("0.333333333333333") != std::string::npos);

    SUBCASE("csv quoting and row width") {
        CsvBuilder csv({"a", "b"});
        csv.row({"plain", "with,comma"});
        csv.row({"quote\"inside", "line\nbreak"});
        CHECK(csv.text() ==
              "a,b\r\n"
              "plain,\"with,comma\"\r\n"
              "\"quote\"\"inside\",\"line\nbreak\"\r\n");
        CHECK_THROWS_AS(csv.row({"only-one"}), std::logic_error);
    }

    SUBCASE("write_file creates parents; read_file round-trips") {
        const std::string dir = fresh_dir("io");
        const std::string path = dir + "/nested/deep/file.txt";
        write_file(path, "payload");
        CHECK(file_exists(path));
        CHECK(read_file(path) == "payload");
        CHECK(!file_exists(dir + "/absent"));
        CHECK_THROWS_AS(read_file(dir + "/absent"), std::runtime_error);
    }
}

TEST_CASE("validate stage: pass, hypothesis failure naming, admissibility") {
    const LabConfig cfg = parse_config(kMiniConfig, "mini.json");
    PipelineOptions po;
    po.out_dir = fresh_dir("validate");

    const RunResult ok = run_validate(cfg, po);
    CHECK(ok.exit_code == exit_ok);
    REQUIRE(ok.files.size() == 1);
    const auto doc = nlohmann::json::parse(read_file(ok.files[0]));
    CHECK(doc.at("hypotheses").at("all_pass").get<bool>());
    CHECK(doc.at("admissibility").at("pass").get<bool>());
    CHECK(doc.at("admissibility").at("margins").size() == 3);
    CHECK(doc.at("config_hash").get<std::string>() == hash_hex(fnv1a64(cfg.raw_text)));

    SUBCASE("violated per-term hypothesis names the line and exits nonzero") {
        const std::string text = replace_once(kMiniConfig, "\"delta_l\": 2", "\"delta_l\": 1");
        const LabConfig bad = parse_config(text, "mini.json");
        const RunResult res = run_validate(bad, po);
        CHECK(res.exit_code == exit_contract_failure);
        CHECK(res.message.find("term0:eps_weight_covers_t_power") != std::string::npos);
        const auto rep = nlohmann::json::parse(read_file(res.files[0]));
        CHECK(!rep.at("hypotheses").at("all_pass").get<bool>());
        bool named = false;
        for (const auto& line : rep.at("hypotheses").at("lines"))
            if (line.at("id") == "term0:eps_weight_covers_t_power" &&
                !line.at("pass").get<bool>())
                named = true;
        CHECK(named);
    }

    SUBCASE("inadmissible geometry is a contract failure, not a crash") {
        // Rotate one Borel sector onto a symbol root of 1 + u^3 (arg 60 deg).
        const std::string text = replace_once(
            kMiniConfig, "{\"direction_deg\": 0, \"half_opening_deg\": 55}",
            "{\"direction_deg\": 60, \"half_opening_deg\": 55}");
        const LabConfig bad = parse_config(text, "mini.json");
        const RunResult res = run_validate(bad, po);
        CHECK(res.exit_code == exit_contract_failure);
        const auto rep = nlohmann::json::parse(read_file(res.files[0]));
        CHECK(!rep.at("admissibility").at("pass").get<bool>());
    }
}

TEST_CASE("solve + asym stages: artifacts, gating, and determinism") {
    const LabConfig cfg = parse_config(kMiniConfig, "mini.json");
    PipelineOptions po;
    po.out_dir = fresh_dir("stage");

    SUBCASE("asym without solve artifacts exits 3") {
        const RunResult res = run_asym(cfg, po);
        CHECK(res.exit_code == exit_missing_artifacts);
        CHECK(res.message.find("mini_solve.json") != std::string::npos);
    }

    SUBCASE("N override below the Cauchy order is a usage error") {
        PipelineOptions bad = po;
        bad.N = 0;
        CHECK(run_solve(cfg, bad).exit_code == exit_usage);
    }

    SUBCASE("full chain: solve, gate on hash, asym, reproducible bytes") {
        const RunResult rs = run_solve(cfg, po);
        REQUIRE(rs.exit_code == exit_ok);
        REQUIRE(rs.files.size() == 3);
        const auto solve_doc = nlohmann::json::parse(read_file(rs.files[0]));
        CHECK(solve_doc.at("N").get<int>() == 5);
        CHECK(solve_doc.at("sectors").size() == 3);
        CHECK(solve_doc.at("bound_fits").size() == 4);
        for (const auto& f : solve_doc.at("bound_fits"))
            CHECK(f.at("pass").get<bool>());
        CHECK(solve_doc.at("pde_residual").at("residual").get<double>() < 1e-6);

        // Coefficient CSV: header + rows, constant column count.
        const std::string family_csv = read_file(rs.files[1]);
        CHECK(family_csv.substr(0, 2) == "r,");
        CHECK(family_csv.find("omega5_im") != std::string::npos);

        // A config with different bytes (same semantics) must be rejected.
        const LabConfig touched =
            parse_config(replace_once(kMiniConfig, "\"N\": 5", "\"N\":  5"), "mini.json");
        const RunResult stale = run_asym(touched, po);
        CHECK(stale.exit_code == exit_usage);
        CHECK(stale.message.find("hash") != std::string::npos);

        const RunResult ra = run_asym(cfg, po);
        REQUIRE(ra.exit_code == exit_ok);
        REQUIRE(!ra.files.empty());
        const auto asym_doc = nlohmann::json::parse(read_file(ra.files[0]));
        CHECK(asym_doc.at("pairs").size() == 3);
        CHECK(asym_doc.at("rs_bound").at("pass").get<bool>());
        CHECK(asym_doc.at("rs_bound").at("mode").get<std::string>() == "gevrey");
        CHECK(asym_doc.at("config_hash").get<std::string>() ==
              solve_doc.at("config_hash").get<std::string>());

        // Byte-identical reruns, independent output directories.
        PipelineOptions pa = po, pb = po;
        pa.out_dir = fresh_dir("det_a");
        pb.out_dir = fresh_dir("det_b");
        pa.solve_inline = pb.solve_inline = true;
        const RunResult r1 = run_asym(cfg, pa);
        const RunResult r2 = run_asym(cfg, pb);
        REQUIRE(r1.exit_code == exit_ok);
        REQUIRE(r2.exit_code == exit_ok);
        REQUIRE(r1.files.size() == r2.files.size());
        for (std::size_t i = 0; i < r1.files.size(); ++i)
            CHECK(read_file(r1.files[i]) == read_file(r2.files[i]));
    }
}

TEST_CASE("selftest batteries: quick pass and injected-bug detection") {
    SelftestOptions so;
    so.quick = true;
    std::string json_text;
    const RunResult ok = run_selftest(so, &json_text);
    CHECK(ok.exit_code == exit_ok);
    const auto doc = nlohmann::json::parse(json_text);
    CHECK(doc.at("pass").get<bool>());
    CHECK(doc.at("identity_battery").at("pass").get<bool>());
    CHECK(doc.at("flatness_battery").at("pass").get<bool>());
    CHECK(doc.at("mixed_bound_battery").at("pass").get<bool>());
    CHECK(doc.at("classifier_battery").at("correct").get<int>() == 20);

    // A 2% error in the kernel normalization must not survive the battery.
    so.gamma_scale = 1.02;
    const RunResult bug = run_selftest(so, nullptr);
    CHECK(bug.exit_code == exit_contract_failure);
}
