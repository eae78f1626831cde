#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gfra/config.hpp"
#include "gfra/detection.hpp"
#include "gfra/toml_lite.hpp"
#include "gfra/types.hpp"

namespace gfra {

enum class Scheme { kSemiBlind, kCoherentBaseline, kCodebookBaseline };

Scheme scheme_from_string(const std::string& s);
std::string scheme_to_string(Scheme s);

// Non-coherent baseline parameters (single inner block, see README).
struct CodebookParams {
  int bits = 12;  // B~ per block
  int len = 55;   // codeword length
  int q = 32;     // block count used for efficiency/latency bookkeeping
};

struct TrialResult {
  DetectionOutcome outcome;
  double aer = 0.0, miss = 0.0, fa = 0.0, ber = 0.0, pupe = 0.0;
  std::int64_t complexity = 0;
  double latency_s = 0.0;
  bool bigamp_all_converged = true;
};

// One end-to-end frame with the selected detector.
TrialResult run_single(const SystemConfig& cfg, Scheme scheme, std::uint64_t seed,
                       const CodebookParams& cb = {});

struct SweepSpec {
  std::string field;
  std::vector<double> values;
};

struct ExperimentConfig {
  SystemConfig base;
  std::vector<SweepSpec> sweeps;  // cartesian product; empty -> single point
  int trials = 100;
  std::vector<Scheme> schemes = {Scheme::kSemiBlind};
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 -> hardware concurrency
  bool trace = false;
  CodebookParams cb;
  std::string out_csv;   // empty -> stdout
  std::string out_json;  // empty -> none
};

ExperimentConfig load_experiment(const std::string& path);
ExperimentConfig experiment_from_toml(const TomlDoc& doc);

// Applies one sweep assignment to a config copy (by field name).
SystemConfig apply_sweep(const SystemConfig& base, const std::vector<SweepSpec>& sweeps,
                         const std::vector<int>& point);

struct ResultRow {
  std::string scheme;
  std::map<std::string, double> sweep;  // field -> value
  double snr_tx_db = 0.0, snr_rx_db = 0.0;
  double aer = 0.0, miss = 0.0, fa = 0.0, ber = 0.0, pupe = 0.0, pe = 0.0;
  double complexity = 0.0;
  double latency_ms = 0.0;
  int trials = 0;
  double ci95 = 0.0;  // half-width for the mode's primary error metric
  // per-trial values retained for downstream significance checks
  std::vector<double> trial_aer, trial_ber, trial_pupe;
  std::vector<int> trial_bigamp_converged;
};

struct ResultTable {
  std::vector<std::string> sweep_fields;
  std::vector<ResultRow> rows;
};

ResultTable run_experiment(const ExperimentConfig& exp);

std::string to_csv(const ResultTable& table);
std::string to_json(const ResultTable& table);

}  // namespace gfra
