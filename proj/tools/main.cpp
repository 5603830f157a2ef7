#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qkad/data.hpp"
#include "qkad/harness.hpp"
#include "qkad/simd/simd.hpp"
#include "qkad/version.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<long long> shots;
  std::optional<std::string> rdm_mode;
  std::optional<std::string> variant;
  std::optional<double> gamma;
  std::optional<double> nu;
  bool rates_on_full = false;
  std::optional<std::string> simd;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--shots", f.shots, "measurement shots per sample");
  cmd->add_option("--rdm-mode", f.rdm_mode, "RDM source")
      ->check(CLI::IsMember({"exact", "estimated"}));
  cmd->add_option("--variant", f.variant,
                  "comma list over cx,ecr,rxx,rbf,all,none");
  cmd->add_option("--gamma", f.gamma, "kernel bandwidth");
  cmd->add_option("--nu", f.nu, "OCSVM nu");
  cmd->add_flag("--rates-on-full", f.rates_on_full,
                "fit fraud-rate encoders on all rows, not train only");
  cmd->add_option("--simd", f.simd, "force kernel dispatch level")
      ->check(CLI::IsMember({"scalar", "avx2"}));
}

qkad::ExperimentConfig build_config(const CommonFlags& f) {
  qkad::ExperimentConfig cfg = f.config_path
                                   ? qkad::ExperimentConfig::from_file(
                                         *f.config_path)
                                   : qkad::ExperimentConfig{};
  if (f.seed) cfg.seed = *f.seed;
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.shots) cfg.shots = *f.shots;
  if (f.rdm_mode) cfg.rdm_mode = qkad::rdm_mode_from_name(*f.rdm_mode);
  if (f.variant) cfg.variants = qkad::parse_variants(*f.variant);
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.nu) cfg.nu = *f.nu;
  if (f.rates_on_full) cfg.rates_on_full = true;
  if (f.simd)
    qkad::simd::set_level(*f.simd == "avx2" ? qkad::simd::Level::avx2
                                            : qkad::simd::Level::scalar);
  return cfg;
}

int report(const qkad::RunResult& res) {
  for (const std::string& out : res.outputs)
    std::printf("wrote %s\n", out.c_str());
  std::printf("manifest %s\n", res.manifest_path.c_str());
  if (res.ok) return 0;
  int failed = 0;
  for (const qkad::TaskRecord& t : res.tasks) {
    if (t.status == "ok") continue;
    std::fprintf(stderr, "failed %s: %s\n", t.path.c_str(), t.status.c_str());
    ++failed;
  }
  std::fprintf(stderr, "%d task(s) failed\n", failed);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-kernel one-class anomaly detection workbench"};
  app.set_version_flag("--version", QKAD_VERSION);
  app.require_subcommand(1);
  app.footer("config file keys:\n" + qkad::config_keys_help());

  CommonFlags flags;

  CLI::App* bench =
      app.add_subcommand("benchmark", "train/test F1 across the anomaly-ratio grid");
  add_common(bench, flags);
  CLI::App* crossval = app.add_subcommand(
      "crossval", "k-fold score distributions and outperformance");
  add_common(crossval, flags);
  CLI::App* grid =
      app.add_subcommand("gridsearch", "gamma x nu sweep on cached RDMs");
  add_common(grid, flags);
  CLI::App* tomo = app.add_subcommand(
      "tomography", "estimation-precision sweep for the probe states");
  add_common(tomo, flags);

  CLI::App* engineer = app.add_subcommand(
      "engineer", "raw transactions to engineered feature CSV");
  std::string eng_in, eng_out;
  engineer->add_option("--input", eng_in, "raw transactions CSV")->required();
  engineer->add_option("--output", eng_out, "engineered output CSV")
      ->required();

  CLI::App* synth =
      app.add_subcommand("synth", "write a synthetic transaction CSV");
  std::string synth_out;
  std::uint64_t synth_seed = 7;
  long long synth_normal = 10500;
  long long synth_anomalies = 110;
  synth->add_option("--output", synth_out, "destination CSV")->required();
  synth->add_option("--seed", synth_seed, "dataset seed");
  synth->add_option("--normal", synth_normal, "normal row count");
  synth->add_option("--anomalies", synth_anomalies, "fraud row count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (engineer->parsed()) {
      const qkad::LoadReport rep = qkad::load_raw(eng_in);
      for (const std::string& err : rep.row_errors)
        std::fprintf(stderr, "skipped %s\n", err.c_str());
      const std::vector<qkad::EngineeredSample> samples =
          qkad::engineer(rep.records);
      qkad::write_engineered_csv(eng_out, samples);
      std::printf("wrote %s (%zu rows, %zu skipped)\n", eng_out.c_str(),
                  samples.size(), rep.row_errors.size());
      return 0;
    }
    if (synth->parsed()) {
      const std::vector<qkad::RawTransaction> records =
          qkad::synth_generate(synth_seed, synth_normal, synth_anomalies);
      qkad::write_raw_csv(synth_out, records);
      std::printf("wrote %s (%zu rows)\n", synth_out.c_str(), records.size());
      return 0;
    }
    const qkad::ExperimentConfig cfg = build_config(flags);
    if (bench->parsed()) return report(qkad::run_benchmark(cfg));
    if (crossval->parsed()) return report(qkad::run_crossval(cfg));
    if (grid->parsed()) return report(qkad::run_gridsearch(cfg));
    if (tomo->parsed()) return report(qkad::run_tomography_study(cfg));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
