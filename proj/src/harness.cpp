#include "qkad/harness.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qkad/parallel.hpp"
#include "qkad/simd/simd.hpp"
#include "qkad/version.hpp"

namespace qkad {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) out.push_back(trim(token));
  if (!out.empty() && out.back().empty() && text.find(',') == std::string::npos)
    out.clear();
  return out;
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing junk in '" + v + "'");
  return x;
}

long long parse_ll(const std::string& v) {
  std::size_t pos = 0;
  const long long x = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing junk in '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& v) {
  std::size_t pos = 0;
  const unsigned long long x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing junk in '" + v + "'");
  return x;
}

int parse_int(const std::string& v) {
  const long long x = parse_ll(v);
  if (x < INT_MIN || x > INT_MAX) throw std::out_of_range("out of int range: " + v);
  return (int)x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  for (const std::string& tok : split_list(v)) {
    if (tok.empty()) throw std::invalid_argument("empty list element");
    out.push_back(parse_double(tok));
  }
  return out;
}

std::vector<long long> parse_ll_list(const std::string& v) {
  std::vector<long long> out;
  for (const std::string& tok : split_list(v)) {
    if (tok.empty()) throw std::invalid_argument("empty list element");
    out.push_back(parse_ll(tok));
  }
  return out;
}

std::string join_doubles(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt17(v[i]);
  }
  return out;
}

std::string join_lls(std::span<const long long> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

struct ConfigKey {
  const char* name;
  const char* doc;
};

// Keep sorted by name; canonical_text and --help both walk this table.
constexpr ConfigKey kConfigKeys[] = {
    {"angle_scale", "encoding angle per unit feature (default pi)"},
    {"dataset", "\"synth\" or a path to a raw transactions CSV"},
    {"folds", "cross-validation fold count (default 10)"},
    {"gamma", "kernel bandwidth (default 0.1)"},
    {"grid_folds", "grid-search fold count (default 5)"},
    {"grid_gammas", "comma list of gammas for gridsearch"},
    {"grid_nus", "comma list of nus for gridsearch"},
    {"layers", "feature-map layers (default 1)"},
    {"n_anomalies", "anomalies kept per subsample (default 100)"},
    {"noise_depolarizing_p", "per-shot depolarizing probability"},
    {"noise_drift_rate", "per-shot-index depolarizing increment"},
    {"noise_readout_flip_p", "readout bit-flip probability"},
    {"nu", "OCSVM nu (default 0.1)"},
    {"out_dir", "output directory (default out)"},
    {"r", "anomaly ratio for crossval/gridsearch (default 0.2)"},
    {"r_grid", "comma list of anomaly ratios for benchmark"},
    {"rates_on_full", "fit fraud-rate encoders on all rows, not train only"},
    {"rdm_mode", "exact | estimated"},
    {"seed", "master seed; every task derives a child seed from it"},
    {"shot_grid", "comma list of shot counts for tomography"},
    {"shots", "measurement shots per sample (default 200)"},
    {"sweep_repeats", "repeats per shot count in tomography (default 100)"},
    {"synth_anomalies", "synthetic fraud rows (default 110)"},
    {"synth_normal", "synthetic normal rows (default 10500)"},
    {"synth_seed", "seed of the synthetic dataset itself (default 7)"},
    {"test_fraction", "held-out fraction per split (default 0.1)"},
    {"variants", "comma list over cx,ecr,rxx,rbf,all,none"},
};

std::string value_of(const ExperimentConfig& c, const std::string& key) {
  if (key == "angle_scale") return fmt17(c.angle_scale);
  if (key == "dataset") return c.dataset;
  if (key == "folds") return std::to_string(c.folds);
  if (key == "gamma") return fmt17(c.gamma);
  if (key == "grid_folds") return std::to_string(c.grid_folds);
  if (key == "grid_gammas") return join_doubles(c.grid_gammas);
  if (key == "grid_nus") return join_doubles(c.grid_nus);
  if (key == "layers") return std::to_string(c.layers);
  if (key == "n_anomalies") return std::to_string(c.n_anomalies);
  if (key == "noise_depolarizing_p") return fmt17(c.noise.depolarizing_p);
  if (key == "noise_drift_rate") return fmt17(c.noise.drift_rate);
  if (key == "noise_readout_flip_p") return fmt17(c.noise.readout_flip_p);
  if (key == "nu") return fmt17(c.nu);
  if (key == "out_dir") return c.out_dir;
  if (key == "r") return fmt17(c.r);
  if (key == "r_grid") return join_doubles(c.r_grid);
  if (key == "rates_on_full") return c.rates_on_full ? "true" : "false";
  if (key == "rdm_mode") return std::string(rdm_mode_name(c.rdm_mode));
  if (key == "seed") return std::to_string(c.seed);
  if (key == "shot_grid") return join_lls(c.shot_grid);
  if (key == "shots") return std::to_string(c.shots);
  if (key == "sweep_repeats") return std::to_string(c.sweep_repeats);
  if (key == "synth_anomalies") return std::to_string(c.synth_anomalies);
  if (key == "synth_normal") return std::to_string(c.synth_normal);
  if (key == "synth_seed") return std::to_string(c.synth_seed);
  if (key == "test_fraction") return fmt17(c.test_fraction);
  if (key == "variants") return variants_to_text(c.variants);
  throw std::logic_error("unlisted config key: " + key);
}

}  // namespace

RdmMode rdm_mode_from_name(std::string_view name) {
  if (name == "exact") return RdmMode::exact;
  if (name == "estimated") return RdmMode::estimated;
  throw std::invalid_argument("unknown rdm mode: " + std::string(name));
}

std::string_view rdm_mode_name(RdmMode mode) {
  return mode == RdmMode::exact ? "exact" : "estimated";
}

VariantSelection parse_variants(const std::string& text) {
  bool cx = false, ecr = false, rxx = false, rbf = false;
  for (const std::string& tok : split_list(text)) {
    if (tok.empty() || tok == "none") continue;
    if (tok == "all") {
      cx = ecr = rxx = rbf = true;
    } else if (tok == "rbf") {
      rbf = true;
    } else if (tok == "cx") {
      cx = true;
    } else if (tok == "ecr") {
      ecr = true;
    } else if (tok == "rxx") {
      rxx = true;
    } else {
      throw std::invalid_argument("unknown variant '" + tok +
                                  "' (expected cx, ecr, rxx, rbf, all, none)");
    }
  }
  VariantSelection sel;
  if (cx) sel.quantum.push_back(FeatureMapVariant::cx);
  if (ecr) sel.quantum.push_back(FeatureMapVariant::ecr);
  if (rxx) sel.quantum.push_back(FeatureMapVariant::rxx);
  sel.rbf = rbf;
  return sel;
}

std::string variants_to_text(const VariantSelection& v) {
  std::string out;
  for (FeatureMapVariant q : v.quantum) {
    if (!out.empty()) out += ',';
    out += feature_map_variant_name(q);
  }
  if (v.rbf) {
    if (!out.empty()) out += ',';
    out += "rbf";
  }
  return out.empty() ? "none" : out;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& p) { problems.push_back(p); };

  if (dataset.empty()) bad("dataset is empty");
  if (dataset == "synth") {
    if (synth_normal < 1) bad("synth_normal must be >= 1");
    if (synth_anomalies < 1) bad("synth_anomalies must be >= 1");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma must be positive");
  if (!(nu > 0.0 && nu <= 1.0)) bad("nu must be in (0, 1]");
  if (shots < 3) bad("shots must be >= 3");
  if (layers < 1) bad("layers must be >= 1");
  if (!std::isfinite(angle_scale)) bad("angle_scale must be finite");
  if (r_grid.empty()) bad("r_grid is empty");
  for (double rv : r_grid)
    if (!(rv > 0.0 && rv < 1.0)) bad("r_grid entries must lie in (0, 1)");
  if (!(r > 0.0 && r < 1.0)) bad("r must lie in (0, 1)");
  if (n_anomalies < 1) bad("n_anomalies must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    bad("test_fraction must lie in (0, 1)");
  if (folds < 2) bad("folds must be >= 2");
  if (grid_folds < 2) bad("grid_folds must be >= 2");
  if (grid_gammas.empty()) bad("grid_gammas is empty");
  for (double g : grid_gammas)
    if (!(g > 0.0) || !std::isfinite(g)) bad("grid_gammas entries must be positive");
  if (grid_nus.empty()) bad("grid_nus is empty");
  for (double n : grid_nus)
    if (!(n > 0.0 && n <= 1.0)) bad("grid_nus entries must lie in (0, 1]");
  if (shot_grid.empty()) bad("shot_grid is empty");
  for (long long s : shot_grid)
    if (s < 3) bad("shot_grid entries must be >= 3");
  if (sweep_repeats < 2) bad("sweep_repeats must be >= 2");
  try {
    noise.validate();
  } catch (const std::exception& e) {
    bad(e.what());
  }
  if (out_dir.empty()) bad("out_dir is empty");

  if (!problems.empty()) {
    std::string msg = "invalid config: " + problems[0];
    for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
    throw std::invalid_argument(msg);
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const ConfigKey& k : kConfigKeys) {
    out += k.name;
    out += '=';
    out += value_of(*this, k.name);
    out += '\n';
  }
  return out;
}

std::uint64_t ExperimentConfig::config_hash() const {
  return fnv1a64(canonical_text());
}

void ExperimentConfig::apply_kv(const std::string& key,
                                const std::string& value) {
  const bool known =
      std::any_of(std::begin(kConfigKeys), std::end(kConfigKeys),
                  [&](const ConfigKey& k) { return key == k.name; });
  if (!known) throw std::invalid_argument("unknown config key '" + key + "'");
  try {
    if (key == "angle_scale") angle_scale = parse_double(value);
    else if (key == "dataset") dataset = value;
    else if (key == "folds") folds = parse_int(value);
    else if (key == "gamma") gamma = parse_double(value);
    else if (key == "grid_folds") grid_folds = parse_int(value);
    else if (key == "grid_gammas") grid_gammas = parse_double_list(value);
    else if (key == "grid_nus") grid_nus = parse_double_list(value);
    else if (key == "layers") layers = parse_int(value);
    else if (key == "n_anomalies") n_anomalies = parse_ll(value);
    else if (key == "noise_depolarizing_p") noise.depolarizing_p = parse_double(value);
    else if (key == "noise_drift_rate") noise.drift_rate = parse_double(value);
    else if (key == "noise_readout_flip_p") noise.readout_flip_p = parse_double(value);
    else if (key == "nu") nu = parse_double(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "r") r = parse_double(value);
    else if (key == "r_grid") r_grid = parse_double_list(value);
    else if (key == "rates_on_full") rates_on_full = parse_bool(value);
    else if (key == "rdm_mode") rdm_mode = rdm_mode_from_name(value);
    else if (key == "seed") seed = parse_u64(value);
    else if (key == "shot_grid") shot_grid = parse_ll_list(value);
    else if (key == "shots") shots = parse_ll(value);
    else if (key == "sweep_repeats") sweep_repeats = parse_int(value);
    else if (key == "synth_anomalies") synth_anomalies = parse_ll(value);
    else if (key == "synth_normal") synth_normal = parse_ll(value);
    else if (key == "synth_seed") synth_seed = parse_u64(value);
    else if (key == "test_fraction") test_fraction = parse_double(value);
    else if (key == "variants") variants = parse_variants(value);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    try {
      cfg.apply_kv(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

std::string config_keys_help() {
  std::string out;
  for (const ConfigKey& k : kConfigKeys) {
    const std::size_t len = std::strlen(k.name);
    out += "  ";
    out += k.name;
    out.append(len < 22 ? 22 - len : 1, ' ');
    out += k.doc;
    out += '\n';
  }
  return out;
}

Pool load_pool(const ExperimentConfig& cfg) {
  std::vector<RawTransaction> records;
  if (cfg.dataset == "synth") {
    records =
        synth_generate(cfg.synth_seed, cfg.synth_normal, cfg.synth_anomalies);
  } else {
    LoadReport rep = load_raw(cfg.dataset);
    records = std::move(rep.records);
  }
  Pool pool;
  pool.base = engineer_base(records);
  pool.labels.reserve(pool.base.size());
  for (const EngineeredBase& b : pool.base) pool.labels.push_back(b.label);
  return pool;
}

namespace {

RdmSet compute_rdm_set(const FeatureMatrix& x,
                       std::span<const std::size_t> pool_rows,
                       const FeatureMapSpec& spec, const ExperimentConfig& cfg,
                       std::uint64_t master_seed,
                       const std::string& path_prefix) {
  RdmProvenance prov;
  prov.kind =
      cfg.rdm_mode == RdmMode::exact ? RdmKind::exact : RdmKind::estimated;
  if (prov.kind == RdmKind::estimated) {
    prov.shots = cfg.shots;
    prov.seed = master_seed;
  }
  RdmSet set(spec.num_qubits, prov);
  set.resize(x.rows());
  const std::optional<NoiseConfig> noise =
      cfg.noise.enabled() ? std::optional<NoiseConfig>(cfg.noise)
                          : std::nullopt;
  const ShotPlan plan = prov.kind == RdmKind::estimated ? plan_shots(cfg.shots)
                                                        : ShotPlan{};
  parallel_for(x.rows(), [&](std::size_t i) {
    const FeatureMapCircuit circuit = build_feature_map(spec, x.row(i));
    if (prov.kind == RdmKind::exact) {
      set.set_row(i, exact_rdms(circuit));
    } else {
      const std::string path =
          path_prefix + "/row=" + std::to_string(pool_rows[i]);
      Rng rng(child_seed(master_seed, path));
      set.set_row(i, estimate_rdms(circuit, plan, noise, rng));
    }
  });
  return set;
}

void bump(ConfusionCounts& c, int label, int pred) {
  if (label == 1) {
    (pred == -1 ? c.tp : c.fn) += 1;
  } else {
    (pred == -1 ? c.fp : c.tn) += 1;
  }
}

}  // namespace

CellMetrics evaluate_cell(const Pool& pool,
                          std::span<const std::size_t> subsample,
                          const DatasetSplit& split,
                          const ExperimentConfig& cfg,
                          std::optional<FeatureMapVariant> variant,
                          std::uint64_t tomography_seed) {
  if (split.train.empty() || split.test.empty())
    throw std::invalid_argument("evaluate_cell: empty split side");

  auto gather = [&](std::span<const std::size_t> positions) {
    std::pair<std::vector<EngineeredBase>, std::vector<std::size_t>> out;
    out.first.reserve(positions.size());
    out.second.reserve(positions.size());
    for (std::size_t p : positions) {
      if (p >= subsample.size())
        throw std::out_of_range("split position outside subsample");
      out.second.push_back(subsample[p]);
      out.first.push_back(pool.base[subsample[p]]);
    }
    return out;
  };
  auto [train_rows, train_idx] = gather(split.train);
  auto [test_rows, test_idx] = gather(split.test);

  RateEncoders encoders;
  if (cfg.rates_on_full) {
    std::vector<std::size_t> all(pool.base.size());
    std::iota(all.begin(), all.end(), 0);
    encoders = fit_rate_encoders(pool.base, all);
  } else {
    std::vector<std::size_t> local(train_rows.size());
    std::iota(local.begin(), local.end(), 0);
    encoders = fit_rate_encoders(train_rows, local);
  }
  const std::vector<EngineeredSample> train_samples =
      apply_rates(train_rows, encoders);
  const std::vector<EngineeredSample> test_samples =
      apply_rates(test_rows, encoders);

  std::vector<std::size_t> idx_tr(train_samples.size());
  std::iota(idx_tr.begin(), idx_tr.end(), 0);
  std::vector<std::size_t> idx_te(test_samples.size());
  std::iota(idx_te.begin(), idx_te.end(), 0);
  FeatureMatrix xtr = feature_matrix(train_samples, idx_tr);
  FeatureMatrix xte = feature_matrix(test_samples, idx_te);
  const Standardizer scaler = Standardizer::fit(xtr);
  scaler.apply(xtr);
  scaler.apply(xte);

  // One-class boundary: learned from the training rows labeled normal.
  // Anomalous training rows still get scored for the train metrics.
  std::vector<std::size_t> fit_pos;
  for (std::size_t i = 0; i < train_samples.size(); ++i)
    if (train_samples[i].label == 0) fit_pos.push_back(i);
  if (fit_pos.empty())
    throw std::invalid_argument("no normal training rows to fit on");

  std::optional<KernelMatrix> kfit;
  FeatureMatrix score_train;  // train rows x fit rows
  FeatureMatrix score_test;   // test rows x fit rows
  if (!variant) {
    FeatureMatrix xfit;
    for (std::size_t p : fit_pos) xfit.append_row(xtr.row(p));
    kfit = gram_matrix(xfit, cfg.gamma);
    score_train = cross_gram(xtr, xfit, cfg.gamma);
    score_test = cross_gram(xte, xfit, cfg.gamma);
  } else {
    const FeatureMapSpec spec = FeatureMapSpec::for_features(
        *variant, kNumFeatures, cfg.layers, cfg.angle_scale);
    const RdmSet rdm_train =
        compute_rdm_set(xtr, train_idx, spec, cfg, tomography_seed, "rdm");
    const RdmSet rdm_test =
        compute_rdm_set(xte, test_idx, spec, cfg, tomography_seed, "rdm");
    RdmSet rdm_fit(spec.num_qubits, rdm_train.provenance());
    std::vector<OneQubitRdm> rdm_row;
    for (std::size_t p : fit_pos) {
      rdm_row.clear();
      for (int q = 0; q < spec.num_qubits; ++q)
        rdm_row.push_back(rdm_train.rdm(p, q));
      rdm_fit.add_row(rdm_row);
    }
    kfit = gram_matrix(rdm_fit, cfg.gamma);
    score_train = cross_gram(rdm_train, rdm_fit, cfg.gamma);
    score_test = cross_gram(rdm_test, rdm_fit, cfg.gamma);
  }

  const OcsvmModel model = fit(*kfit, cfg.nu);
  ConfusionCounts ctr, cte;
  for (std::size_t i = 0; i < train_samples.size(); ++i)
    bump(ctr, train_samples[i].label, predict(model, score_train.row(i)));
  for (std::size_t i = 0; i < test_samples.size(); ++i)
    bump(cte, test_samples[i].label, predict(model, score_test.row(i)));

  CellMetrics out;
  out.train = precision_recall_f1(ctr);
  out.test = precision_recall_f1(cte);
  return out;
}

namespace {

nlohmann::json tasks_json(const std::vector<TaskRecord>& tasks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TaskRecord& t : tasks) {
    nlohmann::json j;
    j["path"] = t.path;
    j["child_seed"] = t.child_seed;
    j["status"] = t.status;
    j["elapsed_s"] = t.elapsed_s;
    arr.push_back(j);
  }
  return arr;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    RunResult& res, double elapsed_s) {
  nlohmann::json j;
  j["schema"] = "manifest/1";
  j["version"] = QKAD_VERSION;
  j["command"] = command;
  j["seed"] = cfg.seed;
  nlohmann::json conf;
  for (const ConfigKey& k : kConfigKeys) conf[k.name] = value_of(cfg, k.name);
  j["config"] = conf;
  j["config_text"] = cfg.canonical_text();
  j["config_hash"] = hash_hex(cfg.config_hash());
  j["simd_level"] = std::string(simd::level_name(simd::active_level()));
  j["elapsed_s"] = elapsed_s;
  j["ok"] = res.ok;
  j["tasks"] = tasks_json(res.tasks);
  j["outputs"] = res.outputs;
  const std::string path = cfg.out_dir + "/" + command + "_manifest.json";
  write_text_file(path, j.dump(2) + "\n");
  res.manifest_path = path;
}

std::string prf1_csv(const Prf1& m) {
  return fmt17(m.precision) + "," + fmt17(m.recall) + "," + fmt17(m.f1);
}

}  // namespace

RunResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Stopwatch total;
  RunResult res;

  const bool need_data = cfg.variants.rbf || !cfg.variants.quantum.empty();
  Pool pool;
  if (need_data) pool = load_pool(cfg);

  std::string csv = "variant,r,split,precision,recall,f1\n";
  for (double r : cfg.r_grid) {
    const std::string rtxt = fmtg(r);
    // Predict-everything-anomalous control: precision r, recall 1.
    csv += "baseline," + rtxt + ",test," + fmt17(r) + "," + fmt17(1.0) + "," +
           fmt17(2.0 * r / (r + 1.0)) + "\n";
    if (!need_data) continue;

    std::vector<std::size_t> subsample;
    DatasetSplit split;
    try {
      Rng sub_rng(child_seed(cfg.seed, "benchmark/r=" + rtxt + "/subsample"));
      subsample = subsample_to_ratio(pool.labels, r, cfg.n_anomalies, sub_rng);
      std::vector<int> sub_labels;
      sub_labels.reserve(subsample.size());
      for (std::size_t idx : subsample) sub_labels.push_back(pool.labels[idx]);
      split = stratified_split(
          sub_labels, cfg.test_fraction,
          child_seed(cfg.seed, "benchmark/r=" + rtxt + "/split"));
    } catch (const std::exception& e) {
      TaskRecord task;
      task.path = "benchmark/r=" + rtxt;
      task.child_seed = child_seed(cfg.seed, task.path);
      task.status = e.what();
      res.tasks.push_back(task);
      res.ok = false;
      continue;
    }

    auto run_cell = [&](const std::string& name,
                        std::optional<FeatureMapVariant> variant) {
      TaskRecord task;
      task.path = "benchmark/r=" + rtxt + "/" + name;
      task.child_seed = child_seed(cfg.seed, task.path);
      const Stopwatch sw;
      try {
        const CellMetrics m = evaluate_cell(pool, subsample, split, cfg,
                                            variant, task.child_seed);
        csv += name + "," + rtxt + ",train," + prf1_csv(m.train) + "\n";
        csv += name + "," + rtxt + ",test," + prf1_csv(m.test) + "\n";
      } catch (const std::exception& e) {
        task.status = e.what();
        res.ok = false;
      }
      task.elapsed_s = sw.seconds();
      res.tasks.push_back(task);
    };
    if (cfg.variants.rbf) run_cell("rbf", std::nullopt);
    for (FeatureMapVariant v : cfg.variants.quantum)
      run_cell(std::string(feature_map_variant_name(v)), v);
  }

  const std::string csv_path = cfg.out_dir + "/benchmark.csv";
  write_text_file(csv_path, csv);
  res.outputs.push_back(csv_path);
  write_manifest(cfg, "benchmark", res, total.seconds());
  return res;
}

RunResult run_crossval(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Stopwatch total;
  RunResult res;

  const Pool pool = load_pool(cfg);
  Rng sub_rng(child_seed(cfg.seed, "crossval/subsample"));
  const std::vector<std::size_t> subsample =
      subsample_to_ratio(pool.labels, cfg.r, cfg.n_anomalies, sub_rng);
  std::vector<int> sub_labels;
  sub_labels.reserve(subsample.size());
  for (std::size_t idx : subsample) sub_labels.push_back(pool.labels[idx]);
  Rng fold_rng(child_seed(cfg.seed, "crossval/folds"));
  const std::vector<std::vector<std::size_t>> folds =
      stratified_kfold(sub_labels, cfg.folds, fold_rng);

  const double ratio =
      (double)std::count(sub_labels.begin(), sub_labels.end(), 1) /
      (double)sub_labels.size();

  auto fold_scores = [&](const std::string& name,
                         std::optional<FeatureMapVariant> variant)
      -> std::optional<std::vector<double>> {
    std::vector<double> f1s;
    bool all_ok = true;
    for (int f = 0; f < cfg.folds; ++f) {
      TaskRecord task;
      task.path = "crossval/" + name + "/fold=" + std::to_string(f);
      task.child_seed = child_seed(cfg.seed, task.path);
      const Stopwatch sw;
      try {
        DatasetSplit split;
        split.test = folds[f];
        for (int g = 0; g < cfg.folds; ++g)
          if (g != f)
            split.train.insert(split.train.end(), folds[g].begin(),
                               folds[g].end());
        std::sort(split.train.begin(), split.train.end());
        split.anomaly_ratio = ratio;
        split.seed = task.child_seed;
        const CellMetrics m = evaluate_cell(pool, subsample, split, cfg,
                                            variant, task.child_seed);
        f1s.push_back(m.test.f1);
      } catch (const std::exception& e) {
        task.status = e.what();
        all_ok = false;
        res.ok = false;
      }
      task.elapsed_s = sw.seconds();
      res.tasks.push_back(task);
    }
    if (!all_ok) return std::nullopt;
    return f1s;
  };

  std::string csv = "variant,mu,sigma,pr\n";
  std::optional<ScoreDistribution> rbf_dist;
  if (cfg.variants.rbf) {
    if (const auto scores = fold_scores("rbf", std::nullopt)) {
      rbf_dist = fold_statistics(*scores);
      csv += "rbf," + fmt17(rbf_dist->mu) + "," + fmt17(rbf_dist->sigma) +
             ",none\n";
    }
  }
  for (FeatureMapVariant v : cfg.variants.quantum) {
    const std::string name(feature_map_variant_name(v));
    if (const auto scores = fold_scores(name, v)) {
      const ScoreDistribution dist = fold_statistics(*scores);
      const std::string pr =
          rbf_dist ? fmt17(outperformance_probability(dist, *rbf_dist))
                   : "none";
      csv += name + "," + fmt17(dist.mu) + "," + fmt17(dist.sigma) + "," + pr +
             "\n";
    }
  }

  const std::string csv_path = cfg.out_dir + "/crossval.csv";
  write_text_file(csv_path, csv);
  res.outputs.push_back(csv_path);
  write_manifest(cfg, "crossval", res, total.seconds());
  return res;
}

std::size_t pick_best_cell(std::span<const GridCell> cells) {
  if (cells.empty()) throw std::invalid_argument("no grid cells");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const GridCell& a = cells[i];
    const GridCell& b = cells[best];
    if (a.mean_f1 > b.mean_f1 ||
        (a.mean_f1 == b.mean_f1 &&
         (a.gamma < b.gamma || (a.gamma == b.gamma && a.nu < b.nu))))
      best = i;
  }
  return best;
}

namespace {

// Everything that determines the cached RDM coordinates; grid axes and fold
// counts deliberately excluded so hyperparameter changes reuse the cache.
std::uint64_t rdm_cache_key(const ExperimentConfig& cfg,
                            const std::string& variant_name) {
  static constexpr const char* kKeys[] = {
      "angle_scale", "dataset",   "layers",
      "n_anomalies", "noise_depolarizing_p", "noise_drift_rate",
      "noise_readout_flip_p", "r", "rates_on_full",
      "rdm_mode",    "seed",      "shots",
      "synth_anomalies", "synth_normal", "synth_seed",
  };
  std::string text = "variant=" + variant_name + "\n";
  for (const char* k : kKeys) text += std::string(k) + "=" + value_of(cfg, k) + "\n";
  return fnv1a64(text);
}

std::vector<double> squared_distance_block(
    const std::function<std::span<const double>(std::size_t)>& row,
    std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<double> d(a.size() * b.size());
  parallel_for(a.size(), [&](std::size_t i) {
    const std::span<const double> ra = row(a[i]);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::span<const double> rb = row(b[j]);
      d[i * b.size() + j] = simd::l2sq(ra.data(), rb.data(), ra.size());
    }
  });
  return d;
}

}  // namespace

RunResult run_gridsearch(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Stopwatch total;
  RunResult res;

  const Pool pool = load_pool(cfg);
  Rng sub_rng(child_seed(cfg.seed, "gridsearch/subsample"));
  const std::vector<std::size_t> subsample =
      subsample_to_ratio(pool.labels, cfg.r, cfg.n_anomalies, sub_rng);
  std::vector<int> sub_labels;
  sub_labels.reserve(subsample.size());
  for (std::size_t idx : subsample) sub_labels.push_back(pool.labels[idx]);
  Rng fold_rng(child_seed(cfg.seed, "gridsearch/folds"));
  const std::vector<std::vector<std::size_t>> folds =
      stratified_kfold(sub_labels, cfg.grid_folds, fold_rng);

  // The sweep reuses one set of per-sample rows across folds and grid
  // cells, so encoders and the standardizer fit on the whole tuning
  // subsample rather than per fold.
  std::vector<EngineeredBase> rows;
  rows.reserve(subsample.size());
  for (std::size_t idx : subsample) rows.push_back(pool.base[idx]);
  RateEncoders encoders;
  if (cfg.rates_on_full) {
    std::vector<std::size_t> all(pool.base.size());
    std::iota(all.begin(), all.end(), 0);
    encoders = fit_rate_encoders(pool.base, all);
  } else {
    std::vector<std::size_t> local(rows.size());
    std::iota(local.begin(), local.end(), 0);
    encoders = fit_rate_encoders(rows, local);
  }
  const std::vector<EngineeredSample> samples = apply_rates(rows, encoders);
  std::vector<std::size_t> all_positions(samples.size());
  std::iota(all_positions.begin(), all_positions.end(), 0);
  FeatureMatrix x = feature_matrix(samples, all_positions);
  const Standardizer scaler = Standardizer::fit(x);
  scaler.apply(x);

  std::vector<double> gammas = cfg.grid_gammas;
  std::sort(gammas.begin(), gammas.end());
  std::vector<double> nus = cfg.grid_nus;
  std::sort(nus.begin(), nus.end());

  struct FoldBlocks {
    std::vector<std::size_t> fit, test;  // fit = normal rows of the train side
    std::vector<double> d_fit;   // fit x fit squared distances
    std::vector<double> d_test;  // test x fit
  };

  std::string csv = "variant,gamma,nu,mean_f1,best\n";

  auto sweep_variant = [&](const std::string& name,
                           std::optional<FeatureMapVariant> variant) {
    TaskRecord task;
    task.path = "gridsearch/" + name;
    task.child_seed = child_seed(cfg.seed, task.path);
    const Stopwatch sw;
    try {
      std::optional<RdmSet> rdms;
      if (variant) {
        const FeatureMapSpec spec = FeatureMapSpec::for_features(
            *variant, kNumFeatures, cfg.layers, cfg.angle_scale);
        const std::string cache_path = cfg.out_dir + "/rdm_cache_" + name +
                                       "_" +
                                       hash_hex(rdm_cache_key(cfg, name)) +
                                       ".bin";
        bool loaded = false;
        if (std::filesystem::exists(cache_path)) {
          try {
            RdmSet cached = load_rdms(cache_path);
            const RdmProvenance& p = cached.provenance();
            const bool mode_matches =
                cfg.rdm_mode == RdmMode::exact
                    ? p.kind == RdmKind::exact
                    : (p.kind == RdmKind::estimated && p.shots == cfg.shots &&
                       p.seed == task.child_seed);
            if (cached.size() == x.rows() &&
                cached.num_qubits() == spec.num_qubits && mode_matches) {
              rdms = std::move(cached);
              loaded = true;
            }
          } catch (const std::exception&) {
            loaded = false;  // unreadable cache: recompute below
          }
        }
        if (!loaded) {
          rdms = compute_rdm_set(x, subsample, spec, cfg, task.child_seed,
                                 "gridsearch/" + name + "/rdm");
          save_rdms(cache_path, *rdms);
          res.outputs.push_back(cache_path);
        }
      }

      auto row_of = [&](std::size_t i) {
        return variant ? rdms->row(i) : x.row(i);
      };

      std::vector<FoldBlocks> blocks(folds.size());
      for (std::size_t f = 0; f < folds.size(); ++f) {
        blocks[f].test = folds[f];
        std::sort(blocks[f].test.begin(), blocks[f].test.end());
        for (std::size_t g = 0; g < folds.size(); ++g)
          if (g != f)
            for (std::size_t idx : folds[g])
              if (sub_labels[idx] == 0) blocks[f].fit.push_back(idx);
        std::sort(blocks[f].fit.begin(), blocks[f].fit.end());
        blocks[f].d_fit =
            squared_distance_block(row_of, blocks[f].fit, blocks[f].fit);
        blocks[f].d_test =
            squared_distance_block(row_of, blocks[f].test, blocks[f].fit);
      }

      // The whole point of caching rows: the sweep below must be pure
      // arithmetic on precomputed distances.
      const std::uint64_t tomo_before = estimate_invocation_count();

      std::vector<GridCell> cells;
      const KernelKind kind = variant ? KernelKind::qrbf : KernelKind::rbf;
      for (double gamma : gammas) {
        for (double nu : nus) {
          double f1_sum = 0.0;
          for (const FoldBlocks& blk : blocks) {
            const std::size_t l = blk.fit.size();
            std::vector<double> kv(l * l);
            for (std::size_t i = 0; i < l; ++i) {
              kv[i * l + i] = 1.0;
              for (std::size_t j = i + 1; j < l; ++j) {
                const double val = std::exp(-gamma * blk.d_fit[i * l + j]);
                kv[i * l + j] = val;
                kv[j * l + i] = val;
              }
            }
            const KernelMatrix k =
                KernelMatrix::from_values(l, std::move(kv), gamma, kind);
            const OcsvmModel model = fit(k, nu);
            ConfusionCounts counts;
            std::vector<double> krow(l);
            for (std::size_t i = 0; i < blk.test.size(); ++i) {
              for (std::size_t j = 0; j < l; ++j)
                krow[j] = std::exp(-gamma * blk.d_test[i * l + j]);
              bump(counts, sub_labels[blk.test[i]], predict(model, krow));
            }
            f1_sum += precision_recall_f1(counts).f1;
          }
          cells.push_back({gamma, nu, f1_sum / (double)blocks.size()});
        }
      }

      if (estimate_invocation_count() != tomo_before)
        throw std::logic_error(
            "tomography ran during the hyperparameter sweep");

      const std::size_t best = pick_best_cell(cells);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        csv += name + "," + fmtg(cells[i].gamma) + "," + fmtg(cells[i].nu) +
               "," + fmt17(cells[i].mean_f1) + "," +
               (i == best ? "1" : "0") + "\n";
      }
    } catch (const std::exception& e) {
      task.status = e.what();
      res.ok = false;
    }
    task.elapsed_s = sw.seconds();
    res.tasks.push_back(task);
  };

  if (cfg.variants.rbf) sweep_variant("rbf", std::nullopt);
  for (FeatureMapVariant v : cfg.variants.quantum)
    sweep_variant(std::string(feature_map_variant_name(v)), v);

  const std::string csv_path = cfg.out_dir + "/gridsearch.csv";
  write_text_file(csv_path, csv);
  res.outputs.push_back(csv_path);
  write_manifest(cfg, "gridsearch", res, total.seconds());
  return res;
}

RunResult run_tomography_study(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Stopwatch total;
  RunResult res;

  struct Mode {
    std::string name;
    std::optional<NoiseConfig> noise;
  };
  std::vector<Mode> modes = {{"noiseless", std::nullopt}};
  if (cfg.noise.enabled()) modes.push_back({"noisy", cfg.noise});

  std::string csv = "state,mode,shots,mean_d,std_d\n";
  for (ProbeState state : {ProbeState::plus, ProbeState::t}) {
    const std::string state_name = state == ProbeState::plus ? "plus" : "t";
    for (const Mode& mode : modes) {
      TaskRecord task;
      task.path = "tomography/" + state_name + "/" + mode.name;
      task.child_seed = child_seed(cfg.seed, task.path);
      const Stopwatch sw;
      try {
        const std::vector<PrecisionRow> sweep =
            precision_sweep(state, cfg.shot_grid, cfg.sweep_repeats,
                            mode.noise, task.child_seed);
        for (const PrecisionRow& row : sweep)
          csv += state_name + "," + mode.name + "," +
                 std::to_string(row.shots) + "," + fmt17(row.mean_d) + "," +
                 fmt17(row.std_d) + "\n";
      } catch (const std::exception& e) {
        task.status = e.what();
        res.ok = false;
      }
      task.elapsed_s = sw.seconds();
      res.tasks.push_back(task);
    }
  }

  const std::string csv_path = cfg.out_dir + "/tomography.csv";
  write_text_file(csv_path, csv);
  res.outputs.push_back(csv_path);
  write_manifest(cfg, "tomography", res, total.seconds());
  return res;
}

}  // namespace qkad
