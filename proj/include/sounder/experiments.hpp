// SPDX-License-Identifier: MIT
//
// Config-driven experiment runner: each experiment reproduces one study from
// the toolkit (capacity vs. SNR under switched phase noise, MI distribution
// comparisons, bound sandwiches, calibration round trips, sequence-SNR
// histograms, ...) as plain data files.  Configs are JSON documents; outputs
// are CSV tables (with a '#' metadata header block) or JSON summaries, and a
// given config + seed always produces byte-identical bytes regardless of the
// worker-thread count.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sounder {

/// Version stamp written into every output's metadata block.
inline constexpr const char* kToolkitVersion = "0.1.0";

enum class ExperimentId {
  fig2_capacity,   // ergodic MI vs SNR, low-rank correlated channels
  fig3_cdf,        // MI CDFs: physical vs effective vs damped-correlation
  fig4_bounds,     // rank-one bound sandwich vs Monte Carlo
  fig5_variance,   // MI variance vs transmit array size
  fig6_taylor,     // exact vs quadratic-surrogate MI distributions
  fig7_laws,       // log2-det law CDFs vs direct Monte Carlo
  fig14_moments,   // per-realization surrogate moments vs Monte Carlo
  calib_synth,     // synthetic calibration trace + estimator round trip
  seq_snr,         // m-sequence correlation SNR histograms
  custom,          // fully parameterized effective-channel Monte Carlo
};

/// Canonical lowercase name (the `experiment` config value).
std::string experiment_name(ExperimentId id);

/// Inverse of experiment_name; throws validation_error for unknown names.
ExperimentId parse_experiment(const std::string& name);

/// (name, one-line description) for every experiment, listing order fixed.
std::vector<std::pair<std::string, std::string>> list_experiments();

/// Validation outcome: hard errors (config unusable) and warnings
/// (parameters outside a recommended envelope).
struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Parsed runnable configuration.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::custom;
  nlohmann::json params;         // experiment-specific table (may be empty)
  std::uint64_t seed = 12345;    // master seed
  int threads = 1;               // worker cap; never affects output bytes
};

/// Check a raw config document end to end — schema, ranges, matrix
/// properties — without running anything.  Every violation found is
/// reported; nothing is thrown.
Diagnostics validate_config(const nlohmann::json& doc);

/// Parse a raw config document.  Throws validation_error carrying every
/// collected issue (newline-separated) if the document is invalid.
ExperimentConfig load_config(const nlohmann::json& doc);

/// One produced file: a suggested basename plus its full content bytes.
struct OutputFile {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  std::vector<OutputFile> files;
};

/// Run the experiment.  Deterministic: identical (config, seed) yield
/// byte-identical file contents for any `threads` value.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace sounder
