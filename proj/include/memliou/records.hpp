#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "memliou/model.hpp"
#include "memliou/parallel.hpp"

namespace memliou {

using Json = nlohmann::json;

// Matrices cross the serialization boundary as row-major arrays of [re, im]
// pairs. nlohmann emits shortest round-trip decimal for doubles, so a record
// parsed back and re-serialized is byte-identical.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& context);
Json complex_to_json(Complex c);
Complex complex_from_json(const Json& j, const std::string& context);

// FNV-1a over dimensions and raw coefficient bytes of every model matrix.
std::string model_fingerprint(const CompositeModel& m);

struct VerifyParams {
  int z_points = 20;
  double im_min = 0.02;
  double im_max = 1.0;
  std::optional<double> re_half_width;  // default 2*scale
  double tolerance = 1e-8;
  std::uint64_t probe_seed = 0;
};

struct EvolveParams {
  double t_min = 0.0;
  double t_max = 10.0;
  int t_count = 201;
  std::optional<double> epsilon;
  std::optional<double> omega_max;
  std::optional<int> n_points;
  bool tail_subtraction = true;
};

struct FreqSweepParams {
  std::optional<double> omega_min;  // default -2*scale
  std::optional<double> omega_max;  // default +2*scale
  int count = 64;
  std::optional<double> epsilon;  // default 0.05*scale
};

struct SpectrumParams {
  Complex z{0.0, 0.1};
  double cluster_tol = 1e-6;
};

struct LongtimeParams {
  std::vector<double> eps_seq{0.2, 0.1, 0.05};
  std::optional<double> eps_ref;
};

struct DiagnoseParams {
  std::optional<double> eps_ref;
};

struct RunConfig {
  std::string command;
  CompositeModel model;
  VerifyParams verify;
  EvolveParams evolve;
  FreqSweepParams freq_sweep;
  SpectrumParams spectrum;
  LongtimeParams longtime;
  DiagnoseParams diagnose;
};

// Strict parse: unknown keys anywhere are ConfigErrors naming the offending
// field. `command` selects which params section is honored.
RunConfig parse_config(const std::string& text, const std::string& command);
RunConfig parse_config_json(const Json& doc, const std::string& command);

struct ResultRecord {
  Json doc;
  bool threshold_violated = false;  // verify: residual above tolerance (exit 4)
  std::string to_string() const;    // deterministic, newline-terminated
};

ResultRecord run_command(const RunConfig& config, Exec exec = Exec::Parallel);

// Flat CSV export, one row per time/frequency point. Supported for verify,
// evolve and freq-sweep records; others throw ConfigError.
std::string record_to_table(const ResultRecord& record);

}  // namespace memliou
