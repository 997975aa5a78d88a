// Command line front end: parse a JSON config, run one command, write the
// result record (JSON, or CSV for the point-grid commands).
//
// Exit codes: 0 ok, 2 config problem, 3 numerical failure, 4 verification
// threshold exceeded (the record is still written).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "memliou/errors.hpp"
#include "memliou/parallel.hpp"
#include "memliou/records.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  int threads = 0;
  bool serial = false;
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw memliou::ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw memliou::ConfigError("out", "cannot write '" + tmp + "'");
    out << text;
    if (!out.flush()) throw memliou::ConfigError("out", "write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw memliou::ConfigError("out", "cannot move result into '" + path + "'");
  }
}

int run(const std::string& command, const CommonOpts& opts) {
  if (opts.threads > 0) memliou::set_threads(opts.threads);
  const memliou::Exec exec = opts.serial ? memliou::Exec::Serial : memliou::Exec::Parallel;

  memliou::Json doc = memliou::Json::object();
  if (!opts.config_path.empty()) {
    try {
      doc = memliou::Json::parse(read_file(opts.config_path));
    } catch (const memliou::Json::parse_error& e) {
      throw memliou::ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
  } else if (command != "catalog") {
    throw memliou::ConfigError("config", "--config is required for this command");
  }
  if (opts.seed) {
    if (!doc.contains("model") || !doc["model"].is_object() ||
        !doc["model"].contains("catalog"))
      throw memliou::ConfigError("seed", "--seed only applies to catalog models");
    doc["model"]["seed"] = *opts.seed;
  }

  const memliou::RunConfig cfg = memliou::parse_config_json(doc, command);
  const memliou::ResultRecord rec = memliou::run_command(cfg, exec);

  if (opts.format == "json") {
    write_output(opts.out_path, rec.to_string());
  } else if (opts.format == "table") {
    write_output(opts.out_path, memliou::record_to_table(rec));
  } else {
    throw memliou::ConfigError("format", "expected json or table");
  }
  return rec.threshold_violated ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-domain reduced dynamics for finite composite systems"};
  app.require_subcommand(1);

  const char* commands[] = {"verify",   "evolve",   "freq-sweep", "spectrum",
                            "longtime", "diagnose", "catalog"};
  const char* blurbs[] = {
      "check the reduced resolvent against the brute-force total resolvent",
      "reconstruct rho(t) from frequency samples along an inversion contour",
      "evaluate the effective generator and state on a frequency grid",
      "eigensystem and stationary cluster of the effective generator",
      "stationary state via extrapolation and via the zero-mode projector",
      "heuristic memory/correlation timescales",
      "list the built-in model fixtures"};

  CommonOpts opts;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    CLI::App* sub = app.add_subcommand(commands[k], blurbs[k]);
    sub->add_option("--config", opts.config_path, "JSON config file");
    sub->add_option("--out", opts.out_path, "output file (default: stdout)");
    sub->add_option("--format", opts.format, "json or table")->capture_default_str();
    sub->add_option("--threads", opts.threads, "OpenMP thread count (0 = runtime default)");
    sub->add_flag("--serial", opts.serial, "use the serial reference execution path");
    sub->add_option("--seed", opts.seed, "override the catalog model seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opts);
  } catch (const memliou::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const memliou::NearPoleError& e) {
    std::cerr << "numerical error: " << e.what() << " (z = " << e.z.real() << " + "
              << e.z.imag() << "i, condition " << e.condition << ")\n";
    return 3;
  } catch (const memliou::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
