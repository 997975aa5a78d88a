#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "memliou/errors.hpp"
#include "memliou/records.hpp"
#include "memliou/version.hpp"

using namespace memliou;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("memliou_test_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MEMLIOU_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

const char* kQb3Verify = R"({"model": {"catalog": "QB3"}, "params": {"z_points": 6}})";

Json inline_model_json(const CompositeModel& m) {
  Json j{{"d_system", m.d_system},
         {"d_env", m.d_env},
         {"h_system", matrix_to_json(m.h_system)},
         {"h_env", matrix_to_json(m.h_env)},
         {"rho_env", matrix_to_json(m.rho_env)}};
  Json cs = Json::array();
  for (const auto& c : m.couplings)
    cs.push_back(Json{{"system", matrix_to_json(c.system_op)}, {"env", matrix_to_json(c.env_op)}});
  j["couplings"] = cs;
  j["initial"] = Json{{"kind", "full"}, {"rho_total", matrix_to_json(m.initial.rho_total)}};
  return j;
}

}  // namespace

TEST_CASE("matrices and complex numbers survive the JSON boundary bit-exactly") {
  const Matrix m = memtest::random_matrix(3, 2024);
  const Matrix back = matrix_from_json(matrix_to_json(m), "t");
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(back(i, j) == m(i, j));

  const Complex c(0.1 + 1e-17, -3.7e300);
  CHECK(complex_from_json(complex_to_json(c), "t") == c);

  CHECK_THROWS_AS(matrix_from_json(Json::array(), "t"), ConfigError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[ [0,0] ],[ [0,0],[0,0] ]]"), "t"), ConfigError);
  CHECK_THROWS_AS(complex_from_json(Json::parse("[1]"), "t"), ConfigError);
  CHECK_THROWS_AS(complex_from_json(Json::parse("[1,\"x\"]"), "t"), ConfigError);
}

TEST_CASE("model fingerprints are stable and sensitive") {
  const CompositeModel a = catalog_model("QB3");
  const CompositeModel b = catalog_model("QB3");
  const std::string fa = model_fingerprint(a);
  CHECK(fa == model_fingerprint(b));
  CHECK(fa.size() == 16);
  CHECK(fa.find_first_not_of("0123456789abcdef") == std::string::npos);

  // one ulp in one coefficient must change the fingerprint
  CompositeModel c = a;
  Complex v = c.h_system(0, 0);
  c.h_system(0, 0) = Complex(std::nextafter(v.real(), 1.0), v.imag());
  CHECK(model_fingerprint(c) != fa);

  // so must a different initial-state kind with the same numbers
  CompositeModel d = a;
  d = d.with_initial(InitialStateSpec::product_plus_correlation(
      a.initial.rho_system, Matrix::Zero(6, 6)));
  CHECK(model_fingerprint(d) != fa);

  CHECK(model_fingerprint(catalog_model("GENERIC", 0)) !=
        model_fingerprint(catalog_model("GENERIC", 1)));
}

TEST_CASE("config parsing is strict about unknown fields") {
  CHECK_NOTHROW(parse_config(kQb3Verify, "verify"));

  CHECK_THROWS_WITH_AS(parse_config(R"({"modle": {}})", "verify"),
                       doctest::Contains("modle"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"model": {"catalog": "QB3", "sede": 1}})", "verify"),
      doctest::Contains("model.sede"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"model": {"catalog": "QB3"}, "params": {"zpoints": 4}})", "verify"),
      doctest::Contains("params.zpoints"), ConfigError);
  // params are checked against the subcommand that will run
  CHECK_THROWS_AS(
      parse_config(R"({"model": {"catalog": "QB3"}, "params": {"t_max": 4}})", "verify"),
      ConfigError);
  CHECK_NOTHROW(
      parse_config(R"({"model": {"catalog": "QB3"}, "params": {"t_max": 4}})", "evolve"));

  CHECK_THROWS_AS(parse_config("not json", "verify"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"catalog": "QB3"}})", "fnord"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"params": {}})", "verify"), ConfigError);  // model missing
}

TEST_CASE("inline model configs round-trip through JSON to the same fingerprint") {
  const CompositeModel bell = memtest::bell_model();
  const Json doc{{"model", inline_model_json(bell)}, {"params", Json::object()}};
  const RunConfig cfg = parse_config_json(doc, "verify");
  CHECK(model_fingerprint(cfg.model) == model_fingerprint(bell));
  CHECK(cfg.model.initial.kind == InitialKind::FullMatrix);
}

TEST_CASE("verify records carry the residual summary and the resolved parameters") {
  const RunConfig cfg = parse_config(kQb3Verify, "verify");
  const ResultRecord rec = run_command(cfg);

  CHECK(!rec.threshold_violated);
  const Json& doc = rec.doc;
  CHECK(doc.at("artifact_version") == kArtifactVersion);
  CHECK(doc.at("command") == "verify");
  CHECK(doc.at("model_fingerprint") == model_fingerprint(cfg.model));
  CHECK(doc.at("payload").at("points").size() == 6);
  CHECK(doc.at("payload").at("passed") == true);
  CHECK(doc.at("payload").at("max_r_embed").get<double>() <= 1e-8);
  CHECK(doc.at("payload").at("max_r_cross").get<double>() <= 1e-8);
  CHECK(doc.at("parameters").at("tolerance") == 1e-8);
  CHECK(doc.at("parameters").contains("re_half_width"));  // default resolved and echoed
  CHECK(doc.at("diagnostics").at("dim_total") == 6);
  CHECK(doc.at("diagnostics").at("dim_q") == 32);
  CHECK(doc.at("diagnostics").at("correlated_initial") == false);

  // an absurd tolerance flags the run but still produces the record
  RunConfig tight = cfg;
  tight.verify.tolerance = 1e-18;
  const ResultRecord bad = run_command(tight);
  CHECK(bad.threshold_violated);
  CHECK(bad.doc.at("payload").at("passed") == false);
}

TEST_CASE("records are byte-identical across execution policies") {
  const struct {
    const char* command;
    const char* config;
  } runs[] = {
      {"verify", kQb3Verify},
      {"evolve", R"({"model": {"catalog": "QB3"},
                     "params": {"t_max": 2.0, "t_count": 5, "n_points": 128}})"},
      {"freq-sweep", R"({"model": {"catalog": "GENERIC", "seed": 3}, "params": {"count": 9}})"},
      {"spectrum", R"({"model": {"catalog": "DECOUPLED"}, "params": {"z": [0.0, 0.05]}})"},
      {"longtime", R"({"model": {"catalog": "QB3"}, "params": {}})"},
      {"diagnose", R"({"model": {"catalog": "GENERIC", "seed": 5}, "params": {}})"},
      {"catalog", "{}"},
  };
  for (const auto& r : runs) {
    CAPTURE(r.command);
    const RunConfig cfg = parse_config(r.config, r.command);
    const std::string serial = run_command(cfg, Exec::Serial).to_string();
    const std::string parallel = run_command(cfg, Exec::Parallel).to_string();
    CHECK(serial == parallel);
    CHECK(serial.back() == '\n');
    // shortest round-trip doubles: parse + re-dump reproduces the bytes
    CHECK(Json::parse(serial).dump(2) + "\n" == serial);
  }
}

TEST_CASE("table export covers the point-grid commands") {
  const ResultRecord ver = run_command(parse_config(kQb3Verify, "verify"));
  const std::string vt = record_to_table(ver);
  CHECK(vt.rfind("re_z,im_z,r_embed,r_cross,trace_dev,left_zero_norm\n", 0) == 0);
  CHECK(std::count(vt.begin(), vt.end(), '\n') == 7);  // header + 6 points

  const ResultRecord evo = run_command(parse_config(
      R"({"model": {"catalog": "QB3"}, "params": {"t_max": 1.0, "t_count": 3, "n_points": 64}})",
      "evolve"));
  const std::string et = record_to_table(evo);
  CHECK(et.rfind("t,rho_00_re,rho_00_im,rho_01_re,rho_01_im,rho_10_re,rho_10_im,"
                 "rho_11_re,rho_11_im\n", 0) == 0);
  CHECK(std::count(et.begin(), et.end(), '\n') == 4);

  const ResultRecord fs_rec = run_command(parse_config(
      R"({"model": {"catalog": "QB3"}, "params": {"count": 4}})", "freq-sweep"));
  const std::string ft = record_to_table(fs_rec);
  CHECK(ft.rfind("re_z,im_z,condition,rho_00_re", 0) == 0);
  CHECK(std::count(ft.begin(), ft.end(), '\n') == 5);

  const ResultRecord sp = run_command(parse_config(
      R"({"model": {"catalog": "QB3"}, "params": {}})", "spectrum"));
  CHECK_THROWS_AS(record_to_table(sp), ConfigError);
}

TEST_CASE("cli runs commands end to end with documented exit codes") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "verify.json";
  std::ofstream(cfg) << kQb3Verify;

  SUBCASE("catalog lists the fixtures") {
    const fs::path out = tmp.path / "catalog.json";
    CHECK(run_cli("catalog --out " + out.string()) == 0);
    const Json doc = Json::parse(slurp(out));
    CHECK(doc.at("payload").at("models").size() == 4);
    CHECK(doc.at("payload").at("models").at(0).at("name") == "QB3");
    CHECK(!fs::exists(out.string() + ".tmp"));
  }

  SUBCASE("verify passes and writes the record atomically") {
    const fs::path out = tmp.path / "verify_out.json";
    CHECK(run_cli("verify --config " + cfg.string() + " --out " + out.string()) == 0);
    const Json doc = Json::parse(slurp(out));
    CHECK(doc.at("payload").at("passed") == true);
    CHECK(!fs::exists(out.string() + ".tmp"));
  }

  SUBCASE("threshold violations exit 4 but keep the record") {
    const fs::path tight = tmp.path / "tight.json";
    std::ofstream(tight)
        << R"({"model": {"catalog": "QB3"}, "params": {"z_points": 4, "tolerance": 1e-18}})";
    const fs::path out = tmp.path / "tight_out.json";
    CHECK(run_cli("verify --config " + tight.string() + " --out " + out.string()) == 4);
    CHECK(Json::parse(slurp(out)).at("payload").at("passed") == false);
  }

  SUBCASE("config problems exit 2") {
    const fs::path bad = tmp.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("verify --config " + bad.string()) == 2);

    const fs::path unknown = tmp.path / "unknown.json";
    std::ofstream(unknown) << R"({"model": {"catalog": "QB3"}, "params": {"zz": 1}})";
    CHECK(run_cli("verify --config " + unknown.string()) == 2);

    CHECK(run_cli("verify") == 2);                 // --config required
    CHECK(run_cli("nonsense-subcommand") == 2);    // parser error
    CHECK(run_cli("verify --config " + cfg.string() + " --format yaml") == 2);
    CHECK(run_cli("verify --config " + cfg.string() + " --out " +
                  (tmp.path / "missing_dir" / "out.json").string()) == 2);
    // seed overrides only make sense for catalog models
    const fs::path inl = tmp.path / "inline.json";
    Json doc{{"model", inline_model_json(memtest::bell_model())}, {"params", Json::object()}};
    std::ofstream(inl) << doc.dump();
    CHECK(run_cli("verify --config " + inl.string() + " --seed 7") == 2);
    CHECK(run_cli("verify --config " + inl.string()) == 0);
  }

  SUBCASE("numerical failures exit 3") {
    const fs::path onaxis = tmp.path / "onaxis.json";
    std::ofstream(onaxis)
        << R"({"model": {"catalog": "QB3"}, "params": {"z": [0.1, 0.0]}})";
    CHECK(run_cli("spectrum --config " + onaxis.string()) == 3);
  }

  SUBCASE("table format and seed overrides work through the cli") {
    const fs::path out = tmp.path / "sweep.csv";
    const fs::path sweep = tmp.path / "sweep.json";
    std::ofstream(sweep) << R"({"model": {"catalog": "GENERIC"}, "params": {"count": 3}})";
    CHECK(run_cli("freq-sweep --config " + sweep.string() + " --seed 9 --format table --out " +
                  out.string()) == 0);
    CHECK(slurp(out).rfind("re_z,im_z,condition", 0) == 0);
  }

  SUBCASE("identical configs give identical bytes regardless of threading") {
    const fs::path a = tmp.path / "a.json";
    const fs::path b = tmp.path / "b.json";
    const fs::path c = tmp.path / "c.json";
    CHECK(run_cli("verify --config " + cfg.string() + " --serial --out " + a.string()) == 0);
    CHECK(run_cli("verify --config " + cfg.string() + " --threads 3 --out " + b.string()) == 0);
    CHECK(run_cli("verify --config " + cfg.string() + " --threads 7 --out " + c.string()) == 0);
    const std::string ra = slurp(a);
    CHECK(ra == slurp(b));
    CHECK(ra == slurp(c));
  }
}
