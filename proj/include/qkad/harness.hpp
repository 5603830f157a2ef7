#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkad/data.hpp"
#include "qkad/featuremap.hpp"
#include "qkad/kernel.hpp"
#include "qkad/metrics.hpp"
#include "qkad/ocsvm.hpp"
#include "qkad/tomography.hpp"

namespace qkad {

enum class RdmMode { exact, estimated };

RdmMode rdm_mode_from_name(std::string_view name);
std::string_view rdm_mode_name(RdmMode mode);

// Kernels a run covers; rbf is the classical control.
struct VariantSelection {
  std::vector<FeatureMapVariant> quantum;
  bool rbf = false;
};

// Comma list over {cx, ecr, rxx, rbf, all}; duplicates collapse.
VariantSelection parse_variants(const std::string& text);
std::string variants_to_text(const VariantSelection& v);

struct ExperimentConfig {
  std::string dataset = "synth";  // "synth" or a raw transactions CSV path
  std::uint64_t synth_seed = 7;
  long long synth_normal = 10500;
  long long synth_anomalies = 110;

  std::uint64_t seed = 1;
  VariantSelection variants = {{FeatureMapVariant::cx, FeatureMapVariant::ecr,
                                FeatureMapVariant::rxx},
                               true};

  double gamma = 0.1;
  double nu = 0.1;
  long long shots = 200;
  RdmMode rdm_mode = RdmMode::estimated;
  int layers = 1;
  double angle_scale = kPi;

  std::vector<double> r_grid = {0.2, 0.1, 0.05, 0.02, 0.01};
  double r = 0.2;  // crossval and gridsearch
  long long n_anomalies = 100;
  double test_fraction = 0.1;
  int folds = 10;
  int grid_folds = 5;
  std::vector<double> grid_gammas = {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0};
  std::vector<double> grid_nus = {0.01, 0.1, 1.0};

  std::vector<long long> shot_grid = {100, 1000, 10000, 100000};
  int sweep_repeats = 100;

  NoiseConfig noise;  // all-zero means noiseless runs only

  bool rates_on_full = false;
  std::string out_dir = "out";

  // Throws std::invalid_argument listing every problem found.
  void validate() const;

  // Sorted key=value lines; the manifest echoes these and hashes them.
  std::string canonical_text() const;
  std::uint64_t config_hash() const;

  void apply_kv(const std::string& key, const std::string& value);
  static ExperimentConfig from_file(const std::string& path);
};

struct TaskRecord {
  std::string path;
  std::uint64_t child_seed = 0;
  std::string status = "ok";
  double elapsed_s = 0.0;
};

struct RunResult {
  bool ok = true;
  std::vector<TaskRecord> tasks;
  std::vector<std::string> outputs;
  std::string manifest_path;
};

// Engineered label-free rows for the configured dataset plus their labels.
struct Pool {
  std::vector<EngineeredBase> base;
  std::vector<int> labels;
};

Pool load_pool(const ExperimentConfig& cfg);

struct CellMetrics {
  Prf1 train;
  Prf1 test;
};

// One (variant, subsample, split) evaluation. Encoders and the standardizer
// fit on the training rows (or the whole pool with rates_on_full), the
// one-class boundary fits on the training rows labeled normal, and every
// row of both splits is scored with anomaly as the positive class. Kernels
// follow cfg.rdm_mode. split indices address positions within `subsample`.
// nullopt variant runs the classical rbf control.
CellMetrics evaluate_cell(const Pool& pool,
                          std::span<const std::size_t> subsample,
                          const DatasetSplit& split,
                          const ExperimentConfig& cfg,
                          std::optional<FeatureMapVariant> variant,
                          std::uint64_t tomography_seed);

// One "key  description" line per accepted config key, for --help.
std::string config_keys_help();

struct GridCell {
  double gamma = 0.0;
  double nu = 0.0;
  double mean_f1 = 0.0;
};

// Index of the best cell; ties break toward smaller gamma, then smaller nu.
std::size_t pick_best_cell(std::span<const GridCell> cells);

RunResult run_benchmark(const ExperimentConfig& cfg);
RunResult run_crossval(const ExperimentConfig& cfg);
RunResult run_gridsearch(const ExperimentConfig& cfg);
RunResult run_tomography_study(const ExperimentConfig& cfg);

}  // namespace qkad
