#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qkad/matrix.hpp"
#include "qkad/rng.hpp"

namespace qkad {

// One card transaction in the 22-column retail fraud layout. Fields appear
// here in CSV column order; the loader matches columns by header name, so
// extra columns (like a leading row index) are tolerated.
struct RawTransaction {
  std::string timestamp;  // trans_date_trans_time, "YYYY-MM-DD HH:MM:SS"
  std::string cc_num;
  std::string merchant;
  std::string category;
  double amount = 0.0;  // amt
  std::string first;
  std::string last;
  std::string gender;  // "F" or "M"
  std::string street;
  std::string city;
  std::string state;
  std::string zip;
  double lat = 0.0;
  double lon = 0.0;  // column "long"
  long long city_pop = 0;
  std::string job;
  std::string dob;  // "YYYY-MM-DD"
  std::string trans_num;
  long long unix_time = 0;
  double merch_lat = 0.0;
  double merch_lon = 0.0;  // column "merch_long"
  int is_fraud = 0;
};

struct LoadReport {
  std::vector<RawTransaction> records;
  std::vector<std::string> row_errors;  // "line 17: ..." for skipped rows
};

// Throws when the file cannot be read or a required column is missing;
// malformed rows are skipped and reported instead.
LoadReport load_raw(const std::string& path);

void write_raw_csv(const std::string& path,
                   std::span<const RawTransaction> records);

// Seconds since the Unix epoch, UTC civil reckoning.
long long parse_timestamp(const std::string& ts);  // "YYYY-MM-DD HH:MM:SS"
long long parse_date(const std::string& d);        // "YYYY-MM-DD", midnight

inline constexpr int kNumFeatures = 20;

// Engineered columns in fixed order. Rate features are filled by encoders;
// everything else is computable without labels.
extern const std::array<std::string_view, kNumFeatures> kFeatureNames;

inline constexpr int kStateRateSlot = 10;
inline constexpr int kJobRateSlot = 14;
inline constexpr int kZipRateSlot = 16;
inline constexpr int kCategoryRateSlot = 17;
inline constexpr int kMerchantRateSlot = 18;

struct EngineeredSample {
  std::array<double, kNumFeatures> features{};
  int label = 0;
};

// Label-free stage: history, calendar and identity features plus the
// categorical keys the rate encoders need later. Rate slots hold NaN.
struct EngineeredBase {
  std::array<double, kNumFeatures> features{};
  std::string zip, state, job, category, merchant;
  int label = 0;
};

// Computes history windows over the records as given, ordered by timestamp
// (ties by input position). Output rows stay in input order.
std::vector<EngineeredBase> engineer_base(
    std::span<const RawTransaction> records);

enum class GroupKey { zip, state, job, category, merchant };

// Group key -> mean label among the fitted rows; unseen keys fall back to
// the global mean.
class FraudRateEncoder {
 public:
  double rate(const std::string& key) const {
    const auto it = rates_.find(key);
    return it == rates_.end() ? global_ : it->second;
  }
  double global_rate() const { return global_; }
  std::size_t num_groups() const { return rates_.size(); }

  static FraudRateEncoder fit(std::span<const std::string> keys,
                              std::span<const int> labels,
                              std::span<const std::size_t> fit_on);

 private:
  std::unordered_map<std::string, double> rates_;
  double global_ = 0.0;
};

FraudRateEncoder fraud_rate_encode(std::span<const RawTransaction> records,
                                   GroupKey key,
                                   std::span<const std::size_t> fit_on);

struct RateEncoders {
  FraudRateEncoder zip, state, job, category, merchant;
};

RateEncoders fit_rate_encoders(std::span<const EngineeredBase> rows,
                               std::span<const std::size_t> fit_on);

// Fills the five rate slots from the encoders. Reads no labels; they are
// only copied through, which is what keeps evaluation splits leak-free.
std::vector<EngineeredSample> apply_rates(
    std::span<const EngineeredBase> rows, const RateEncoders& encoders);

// Whole-dataset convenience: rates fitted on every record.
std::vector<EngineeredSample> engineer(
    std::span<const RawTransaction> records);

void write_engineered_csv(const std::string& path,
                          std::span<const EngineeredSample> samples);

double pearson_corr(std::span<const double> a, std::span<const double> b);

double cramers_v(std::span<const std::string> a,
                 std::span<const std::string> b);

// Picks all-random subsets with round(n_anomalies * (1 - r) / r) normal
// rows and exactly n_anomalies anomalous ones. Returns indices in
// ascending order.
std::vector<std::size_t> subsample_to_ratio(std::span<const int> labels,
                                            double r, long long n_anomalies,
                                            Rng& rng);

struct DatasetSplit {
  std::vector<std::size_t> train, test;
  double anomaly_ratio = 0.0;  // over train + test
  std::uint64_t seed = 0;
};

// Stratified by label; test gets round(count * test_fraction) of each class.
DatasetSplit stratified_split(std::span<const int> labels,
                              double test_fraction, std::uint64_t seed);

// k disjoint stratified folds covering all indices; element f is fold f's
// held-out set.
std::vector<std::vector<std::size_t>> stratified_kfold(
    std::span<const int> labels, int k, Rng& rng);

// z-score, clipped to 3 sigma and mapped into [-1, 1]. Zero-variance
// columns are flagged and emit 0.
class Standardizer {
 public:
  static Standardizer fit(const FeatureMatrix& x);
  void apply(FeatureMatrix& x) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<std::uint8_t>& zero_variance() const {
    return zero_variance_;
  }

 private:
  std::vector<double> mean_, sigma_;
  std::vector<std::uint8_t> zero_variance_;
};

FeatureMatrix feature_matrix(std::span<const EngineeredSample> samples,
                             std::span<const std::size_t> indices);
std::vector<int> labels_of(std::span<const EngineeredSample> samples,
                           std::span<const std::size_t> indices);

// Synthetic transaction stream with the biases the engineered features look
// for: fraud runs hotter at night, in bursts per card, at roughly 3x amounts,
// and concentrated in a few categories and merchants. Byte-identical output
// per seed, rows time-sorted.
std::vector<RawTransaction> synth_generate(std::uint64_t seed,
                                           long long n_normal,
                                           long long n_anomalies);

}  // namespace qkad
