#include "qkad/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "qkad/csv.hpp"

namespace qkad {

namespace {

long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int* y, unsigned* m, unsigned* d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long yy = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = doy - (153 * mp + 2) / 5 + 1;
  *m = mp < 10 ? mp + 3 : mp - 9;
  *y = static_cast<int>(yy + (*m <= 2));
}

int digits(const std::string& s, std::size_t pos, std::size_t len) {
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9')
      throw std::invalid_argument("bad digit in date/time: " + s);
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

double parse_double(const std::string& s, const char* col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(col) + ": not a number: " + s);
  }
}

long long parse_ll(const std::string& s, const char* col) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(col) + ": not an integer: " + s);
  }
}

const char* const kRawColumns[] = {
    "trans_date_trans_time", "cc_num",  "merchant",  "category", "amt",
    "first",                 "last",    "gender",    "street",   "city",
    "state",                 "zip",     "lat",       "long",     "city_pop",
    "job",                   "dob",     "trans_num", "unix_time",
    "merch_lat",             "merch_long", "is_fraud"};
constexpr int kNumRawColumns = 22;

std::string format_timestamp(long long epoch) {
  long long days = epoch / 86400;
  long long rem = epoch % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y;
  unsigned m, d;
  civil_from_days(days, &y, &m, &d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld", y, m,
                d, rem / 3600, rem / 60 % 60, rem % 60);
  return buf;
}

std::string format_date(long long epoch_days) {
  int y;
  unsigned m, d;
  civil_from_days(epoch_days, &y, &m, &d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

}  // namespace

long long parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw std::invalid_argument("expected YYYY-MM-DD, got: " + s);
  const int y = digits(s, 0, 4);
  const int m = digits(s, 5, 2);
  const int d = digits(s, 8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw std::invalid_argument("date out of range: " + s);
  return days_from_civil(y, static_cast<unsigned>(m),
                         static_cast<unsigned>(d)) *
         86400;
}

long long parse_timestamp(const std::string& s) {
  if (s.size() != 19 || s[10] != ' ' || s[13] != ':' || s[16] != ':')
    throw std::invalid_argument("expected YYYY-MM-DD HH:MM:SS, got: " + s);
  const long long base = parse_date(s.substr(0, 10));
  const int hh = digits(s, 11, 2);
  const int mm = digits(s, 14, 2);
  const int ss = digits(s, 17, 2);
  if (hh > 23 || mm > 59 || ss > 59)
    throw std::invalid_argument("time out of range: " + s);
  return base + hh * 3600 + mm * 60 + ss;
}

LoadReport load_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::string> header;
  if (!read_csv_record(in, header))
    throw std::runtime_error(path + ": empty file");

  std::array<int, kNumRawColumns> pos;
  for (int c = 0; c < kNumRawColumns; ++c) {
    const auto it = std::find(header.begin(), header.end(), kRawColumns[c]);
    if (it == header.end())
      throw std::runtime_error(path + ": missing column " +
                               std::string(kRawColumns[c]));
    pos[static_cast<std::size_t>(c)] = static_cast<int>(it - header.begin());
  }

  LoadReport report;
  std::vector<std::string> f;
  long long line = 1;
  while (read_csv_record(in, f)) {
    ++line;
    if (f.size() == 1 && f[0].empty()) continue;  // trailing blank line
    try {
      if (f.size() != header.size())
        throw std::invalid_argument("expected " +
                                    std::to_string(header.size()) +
                                    " fields, got " + std::to_string(f.size()));
      auto field = [&](int c) -> const std::string& {
        return f[static_cast<std::size_t>(pos[static_cast<std::size_t>(c)])];
      };
      RawTransaction r;
      r.timestamp = field(0);
      parse_timestamp(r.timestamp);  // validates
      r.cc_num = field(1);
      r.merchant = field(2);
      r.category = field(3);
      r.amount = parse_double(field(4), "amt");
      r.first = field(5);
      r.last = field(6);
      r.gender = field(7);
      r.street = field(8);
      r.city = field(9);
      r.state = field(10);
      r.zip = field(11);
      r.lat = parse_double(field(12), "lat");
      r.lon = parse_double(field(13), "long");
      r.city_pop = parse_ll(field(14), "city_pop");
      r.job = field(15);
      r.dob = field(16);
      parse_date(r.dob);  // validates
      r.trans_num = field(17);
      r.unix_time = parse_ll(field(18), "unix_time");
      r.merch_lat = parse_double(field(19), "merch_lat");
      r.merch_lon = parse_double(field(20), "merch_long");
      const long long fraud = parse_ll(field(21), "is_fraud");
      if (fraud != 0 && fraud != 1)
        throw std::invalid_argument("is_fraud must be 0 or 1");
      r.is_fraud = static_cast<int>(fraud);
      report.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      report.row_errors.push_back("line " + std::to_string(line) + ": " +
                                  e.what());
    }
  }
  return report;
}

void write_raw_csv(const std::string& path,
                   std::span<const RawTransaction> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::vector<std::string> f(kNumRawColumns);
  for (int c = 0; c < kNumRawColumns; ++c)
    f[static_cast<std::size_t>(c)] = kRawColumns[c];
  write_csv_record(out, f);
  char buf[32];
  for (const RawTransaction& r : records) {
    auto num = [&buf](const char* fmt, auto v) {
      std::snprintf(buf, sizeof(buf), fmt, v);
      return std::string(buf);
    };
    f[0] = r.timestamp;
    f[1] = r.cc_num;
    f[2] = r.merchant;
    f[3] = r.category;
    f[4] = num("%.2f", r.amount);
    f[5] = r.first;
    f[6] = r.last;
    f[7] = r.gender;
    f[8] = r.street;
    f[9] = r.city;
    f[10] = r.state;
    f[11] = r.zip;
    f[12] = num("%.4f", r.lat);
    f[13] = num("%.4f", r.lon);
    f[14] = num("%lld", r.city_pop);
    f[15] = r.job;
    f[16] = r.dob;
    f[17] = r.trans_num;
    f[18] = num("%lld", r.unix_time);
    f[19] = num("%.6f", r.merch_lat);
    f[20] = num("%.6f", r.merch_lon);
    f[21] = num("%d", r.is_fraud);
    write_csv_record(out, f);
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

const std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "cc_number",        "city_population",     "merch_lat",
    "lat",              "time_since_first",    "long",
    "merch_long",       "gender_f",            "gender_m",
    "age",              "state_fraud_rate",    "hour",
    "time_since_last",  "txn_count_7d",        "job_fraud_rate",
    "txn_count_30d",    "zip_fraud_rate",      "category_fraud_rate",
    "merchant_fraud_rate", "dollar"};

std::vector<EngineeredBase> engineer_base(
    std::span<const RawTransaction> records) {
  const std::size_t n = records.size();
  std::vector<long long> ts(n);
  for (std::size_t i = 0; i < n; ++i)
    ts[i] = parse_timestamp(records[i].timestamp);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });

  struct CardState {
    long long first_ts = -1;
    std::deque<long long> recent;  // ascending, pruned to the 30-day window
  };
  std::unordered_map<std::string, CardState> cards;

  constexpr long long kWeek = 7 * 86400;
  constexpr long long kMonth = 30 * 86400;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<EngineeredBase> out(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    const RawTransaction& r = records[i];
    const long long t = ts[i];
    CardState& cs = cards[r.cc_num];

    while (!cs.recent.empty() && cs.recent.front() < t - kMonth)
      cs.recent.pop_front();
    // Trailing windows [t - W, t): the current transaction and same-second
    // peers are excluded.
    const auto before_t =
        std::lower_bound(cs.recent.begin(), cs.recent.end(), t);
    const auto week_lo =
        std::lower_bound(cs.recent.begin(), cs.recent.end(), t - kWeek);
    const double c7 = static_cast<double>(before_t - week_lo);
    const double c30 = static_cast<double>(before_t - cs.recent.begin());

    const long long since_first = cs.first_ts < 0 ? 0 : t - cs.first_ts;
    const long long last_ts = cs.recent.empty() ? -1 : cs.recent.back();
    const long long since_last = last_ts < 0 ? 0 : t - last_ts;

    const long long t_days = (t >= 0 ? t : t - 86399) / 86400;
    const long long dob_days = parse_date(r.dob) / 86400;
    const double age =
        static_cast<double>(t_days - dob_days) / 365.25;
    const double hour = static_cast<double>(t % 86400 / 3600);

    EngineeredBase& e = out[i];
    e.features[0] = parse_double(r.cc_num, "cc_num");
    e.features[1] = static_cast<double>(r.city_pop);
    e.features[2] = r.merch_lat;
    e.features[3] = r.lat;
    e.features[4] = static_cast<double>(since_first);
    e.features[5] = r.lon;
    e.features[6] = r.merch_lon;
    e.features[7] = r.gender == "F" ? 1.0 : 0.0;
    e.features[8] = r.gender == "M" ? 1.0 : 0.0;
    e.features[9] = age;
    e.features[kStateRateSlot] = nan;
    e.features[11] = hour;
    e.features[12] = static_cast<double>(since_last);
    e.features[13] = c7;
    e.features[kJobRateSlot] = nan;
    e.features[15] = c30;
    e.features[kZipRateSlot] = nan;
    e.features[kCategoryRateSlot] = nan;
    e.features[kMerchantRateSlot] = nan;
    e.features[19] = r.amount;
    e.zip = r.zip;
    e.state = r.state;
    e.job = r.job;
    e.category = r.category;
    e.merchant = r.merchant;
    e.label = r.is_fraud;

    if (cs.first_ts < 0) cs.first_ts = t;
    cs.recent.push_back(t);
  }
  return out;
}

FraudRateEncoder FraudRateEncoder::fit(std::span<const std::string> keys,
                                       std::span<const int> labels,
                                       std::span<const std::size_t> fit_on) {
  if (keys.size() != labels.size())
    throw std::invalid_argument("keys and labels differ in length");
  if (fit_on.empty()) throw std::invalid_argument("empty fit index set");
  std::unordered_map<std::string, std::pair<long long, long long>> agg;
  long long total = 0, frauds = 0;
  for (std::size_t i : fit_on) {
    if (i >= keys.size()) throw std::invalid_argument("fit index out of range");
    auto& [cnt, pos] = agg[keys[i]];
    ++cnt;
    pos += labels[i];
    ++total;
    frauds += labels[i];
  }
  FraudRateEncoder enc;
  enc.global_ = static_cast<double>(frauds) / static_cast<double>(total);
  for (const auto& [key, cp] : agg)
    enc.rates_[key] =
        static_cast<double>(cp.second) / static_cast<double>(cp.first);
  return enc;
}

namespace {

const std::string& key_of(const RawTransaction& r, GroupKey key) {
  switch (key) {
    case GroupKey::zip:
      return r.zip;
    case GroupKey::state:
      return r.state;
    case GroupKey::job:
      return r.job;
    case GroupKey::category:
      return r.category;
    case GroupKey::merchant:
      return r.merchant;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

FraudRateEncoder fraud_rate_encode(std::span<const RawTransaction> records,
                                   GroupKey key,
                                   std::span<const std::size_t> fit_on) {
  std::vector<std::string> keys;
  std::vector<int> labels;
  keys.reserve(records.size());
  labels.reserve(records.size());
  for (const RawTransaction& r : records) {
    keys.push_back(key_of(r, key));
    labels.push_back(r.is_fraud);
  }
  return FraudRateEncoder::fit(keys, labels, fit_on);
}

RateEncoders fit_rate_encoders(std::span<const EngineeredBase> rows,
                               std::span<const std::size_t> fit_on) {
  const std::size_t n = rows.size();
  std::vector<int> labels(n);
  std::vector<std::string> zip(n), state(n), job(n), category(n), merchant(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = rows[i].label;
    zip[i] = rows[i].zip;
    state[i] = rows[i].state;
    job[i] = rows[i].job;
    category[i] = rows[i].category;
    merchant[i] = rows[i].merchant;
  }
  RateEncoders enc;
  enc.zip = FraudRateEncoder::fit(zip, labels, fit_on);
  enc.state = FraudRateEncoder::fit(state, labels, fit_on);
  enc.job = FraudRateEncoder::fit(job, labels, fit_on);
  enc.category = FraudRateEncoder::fit(category, labels, fit_on);
  enc.merchant = FraudRateEncoder::fit(merchant, labels, fit_on);
  return enc;
}

std::vector<EngineeredSample> apply_rates(std::span<const EngineeredBase> rows,
                                          const RateEncoders& encoders) {
  std::vector<EngineeredSample> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i].features = rows[i].features;
    out[i].features[kZipRateSlot] = encoders.zip.rate(rows[i].zip);
    out[i].features[kStateRateSlot] = encoders.state.rate(rows[i].state);
    out[i].features[kJobRateSlot] = encoders.job.rate(rows[i].job);
    out[i].features[kCategoryRateSlot] =
        encoders.category.rate(rows[i].category);
    out[i].features[kMerchantRateSlot] =
        encoders.merchant.rate(rows[i].merchant);
    out[i].label = rows[i].label;
  }
  return out;
}

std::vector<EngineeredSample> engineer(
    std::span<const RawTransaction> records) {
  const auto base = engineer_base(records);
  std::vector<std::size_t> all(base.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return apply_rates(base, fit_rate_encoders(base, all));
}

void write_engineered_csv(const std::string& path,
                          std::span<const EngineeredSample> samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (int c = 0; c < kNumFeatures; ++c) {
    if (c) out << ',';
    out << kFeatureNames[static_cast<std::size_t>(c)];
  }
  out << ",is_fraud\n";
  char buf[32];
  for (const EngineeredSample& s : samples) {
    for (int c = 0; c < kNumFeatures; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    s.features[static_cast<std::size_t>(c)]);
      if (c) out << ',';
      out << buf;
    }
    out << ',' << s.label << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("need two equal-length series");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw std::invalid_argument("zero variance series");
  return sab / std::sqrt(saa * sbb);
}

double cramers_v(std::span<const std::string> a,
                 std::span<const std::string> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("need two equal-length series");
  std::map<std::string, std::size_t> ra, rb;
  for (const auto& k : a) ra.emplace(k, ra.size());
  for (const auto& k : b) rb.emplace(k, rb.size());
  const std::size_t nr = ra.size(), nc = rb.size();
  if (nr < 2 || nc < 2)
    throw std::invalid_argument("need at least two categories per series");

  std::vector<double> table(nr * nc, 0.0), rows(nr, 0.0), cols(nc, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = ra[a[i]];
    const std::size_t c = rb[b[i]];
    table[r * nc + c] += 1.0;
    rows[r] += 1.0;
    cols[c] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double chi2 = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double expected = rows[r] * cols[c] / n;
      const double d = table[r * nc + c] - expected;
      chi2 += d * d / expected;
    }
  }
  return std::sqrt(chi2 / (n * static_cast<double>(std::min(nr, nc) - 1)));
}

namespace {

// First k of a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(
    std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.below(
                                  static_cast<std::uint64_t>(pool.size() - t)));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

std::vector<std::size_t> subsample_to_ratio(std::span<const int> labels,
                                            double r, long long n_anomalies,
                                            Rng& rng) {
  if (!(r > 0.0) || !(r < 1.0))
    throw std::invalid_argument("anomaly ratio must lie in (0, 1)");
  if (n_anomalies < 1) throw std::invalid_argument("need n_anomalies >= 1");
  std::vector<std::size_t> anomalies, normals;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? anomalies : normals).push_back(i);
  const auto n_anom = static_cast<std::size_t>(n_anomalies);
  const auto n_norm = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_anomalies) * (1.0 - r) / r));
  if (anomalies.size() < n_anom)
    throw std::invalid_argument(
        "not enough anomalies: need " + std::to_string(n_anom) + ", have " +
        std::to_string(anomalies.size()));
  if (normals.size() < n_norm)
    throw std::invalid_argument("not enough normal rows: need " +
                                std::to_string(n_norm) + ", have " +
                                std::to_string(normals.size()));
  auto picked = sample_without_replacement(std::move(anomalies), n_anom, rng);
  const auto norm_pick =
      sample_without_replacement(std::move(normals), n_norm, rng);
  picked.insert(picked.end(), norm_pick.begin(), norm_pick.end());
  std::sort(picked.begin(), picked.end());
  return picked;
}

DatasetSplit stratified_split(std::span<const int> labels,
                              double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  Rng rng(seed);
  DatasetSplit split;
  split.seed = seed;
  long long anomalies = 0;
  for (int lab : labels) anomalies += lab == 1;
  split.anomaly_ratio =
      static_cast<double>(anomalies) / static_cast<double>(labels.size());

  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.empty()) continue;
    const auto n_test = static_cast<std::size_t>(std::llround(
        static_cast<double>(idx.size()) * test_fraction));
    if (n_test == 0 || n_test >= idx.size())
      throw std::invalid_argument(
          "test fraction leaves a class empty on one side");
    const auto test = sample_without_replacement(idx, n_test, rng);
    std::vector<std::uint8_t> in_test(labels.size(), 0);
    for (std::size_t i : test) in_test[i] = 1;
    for (std::size_t i : idx)
      (in_test[i] ? split.test : split.train).push_back(i);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::vector<std::size_t>> stratified_kfold(
    std::span<const int> labels, int k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("need k >= 2");
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(k))
      throw std::invalid_argument("a class has fewer rows than folds");
    idx = sample_without_replacement(std::move(idx), idx.size(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("empty matrix");
  const std::size_t n = x.rows(), w = x.cols();
  Standardizer s;
  s.mean_.assign(w, 0.0);
  s.sigma_.assign(w, 0.0);
  s.zero_variance_.assign(w, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) s.mean_[j] += x.at(i, j);
  for (double& m : s.mean_) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double d = x.at(i, j) - s.mean_[j];
      s.sigma_[j] += d * d;
    }
  for (std::size_t j = 0; j < w; ++j) {
    s.sigma_[j] = std::sqrt(s.sigma_[j] / static_cast<double>(n));
    if (s.sigma_[j] < 1e-12) {
      s.sigma_[j] = 0.0;
      s.zero_variance_[j] = 1;
    }
  }
  return s;
}

void Standardizer::apply(FeatureMatrix& x) const {
  if (x.cols() != mean_.size())
    throw std::invalid_argument("column count does not match the fit");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (zero_variance_[j]) {
        row[j] = 0.0;
      } else {
        const double z = (row[j] - mean_[j]) / sigma_[j];
        row[j] = std::clamp(z, -3.0, 3.0) / 3.0;
      }
    }
  }
}

FeatureMatrix feature_matrix(std::span<const EngineeredSample> samples,
                             std::span<const std::size_t> indices) {
  FeatureMatrix x(indices.size(), kNumFeatures);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& f = samples[indices[i]].features;
    std::copy(f.begin(), f.end(), x.row(i).begin());
  }
  return x;
}

std::vector<int> labels_of(std::span<const EngineeredSample> samples,
                           std::span<const std::size_t> indices) {
  std::vector<int> y(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    y[i] = samples[indices[i]].label;
  return y;
}

namespace {

struct SynthCity {
  const char* city;
  const char* state;
  const char* zip;
  double lat;
  double lon;
  long long pop;
};

const SynthCity kCities[] = {
    {"Harper Falls", "NC", "28734", 35.1803, -83.3825, 94610},
    {"Dayton Mills", "OH", "45371", 39.8702, -84.1821, 128312},
    {"Eastonville", "CO", "80832", 39.0416, -104.5488, 4523},
    {"Port Laramie", "WY", "82070", 41.3114, -105.5911, 32190},
    {"Sunridge", "AZ", "85635", 31.5455, -110.2773, 50841},
    {"Kettle Plain", "KS", "67480", 38.9513, -97.4265, 2103},
    {"New Alban", "IN", "47150", 38.2856, -85.8241, 67210},
    {"Gray Harbor", "WA", "98520", 46.9754, -123.8157, 16212},
    {"Bell Meadow", "TN", "37027", 36.0023, -86.7844, 82115},
    {"Crestline", "PA", "16833", 40.9645, -78.5264, 7392},
    {"Mossy Oak", "GA", "31021", 32.5404, -82.9071, 21992},
    {"Fox River", "WI", "54913", 44.3387, -88.3954, 73098},
};

const char* const kFirstF[] = {"Ashley", "Brittany", "Carmen", "Dana",
                               "Elena",  "Felicia",  "Grace",  "Heather",
                               "Imani",  "Jasmine"};
const char* const kFirstM[] = {"Aaron",  "Brandon", "Carl",   "Derek",
                               "Edward", "Felix",   "Gavin",  "Hector",
                               "Ivan",   "Jerome"};
const char* const kLast[] = {"Abbott",   "Barrera", "Calhoun",  "Dickson",
                             "Eaton",    "Ferrell", "Goodwin",  "Hubbard",
                             "Ingram",   "Jacobson", "Keller",  "Lozano",
                             "McMahon",  "Norris",  "Odonnell", "Pittman"};
const char* const kStreetNames[] = {"Oak",     "Maple",  "Cedar", "Willow",
                                    "Hickory", "Juniper", "Birch", "Sycamore"};
const char* const kStreetSuffix[] = {"St", "Ave", "Ln", "Rd"};
const char* const kJobs[] = {
    "Therapist, occupational",
    "Engineer, chemical",
    "Scientist, research (maths)",
    "Retail banker",
    "Surveyor, land/geomatics",
    "Teacher, primary school",
    "Production assistant, television",
    "Museum education officer",
    "Air cabin crew",
    "Chartered loss adjuster",
    "Designer, furniture",
    "Psychologist, counselling",
    "Purchasing manager",
    "Herbalist",
    "Futures trader",
    "Administrator, education",
    "Paramedic",
    "Copywriter, advertising"};

struct SynthCategory {
  const char* name;
  double mu_log;     // log-amount centre for legitimate spend
  double sigma_log;
  bool hot;          // categories fraud concentrates in
};

const SynthCategory kCategories[] = {
    {"grocery_pos", 4.05, 0.35, false},
    {"gas_transport", 3.95, 0.30, false},
    {"home", 4.00, 0.40, false},
    {"shopping_pos", 4.10, 0.40, false},
    {"kids_pets", 3.85, 0.35, false},
    {"shopping_net", 4.15, 0.40, true},
    {"entertainment", 3.90, 0.35, false},
    {"food_dining", 3.75, 0.35, false},
    {"personal_care", 3.70, 0.35, false},
    {"health_fitness", 3.80, 0.35, false},
    {"misc_pos", 3.70, 0.40, false},
    {"misc_net", 3.80, 0.40, true},
    {"grocery_net", 4.00, 0.35, false},
    {"travel", 4.20, 0.45, false},
};
constexpr int kNumCategories = 14;

const char* const kMerchStemA[] = {"Kirlin",  "Rippin", "Schmidt", "Towne",
                                   "Heller",  "Kuhic",  "Bahringer", "Dare",
                                   "Gleason", "Larkin", "Monahan", "Ortiz"};
const char* const kMerchStemB[] = {"Kub",    "Mann", "Yost",  "Feest",
                                   "Gerlach", "Koss", "Lemke", "Ryan"};

// Daytime-weighted hour histogram for legitimate spend.
const int kHourWeights[24] = {1, 1, 1, 1, 1, 2, 4, 6, 8, 9, 10, 10,
                              11, 11, 10, 10, 9, 9, 8, 6, 4,  3,  2, 1};
const int kLateEvening[3] = {21, 22, 23};
// Everything except shopping_net and misc_net; legitimate preferences stay
// in card-present categories so the card-not-present pair is fraud country.
const int kColdCategories[12] = {0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 12, 13};
// Cities where skimming rings harvested card numbers; victims concentrate
// there. Chosen spread across the map and around the median population so
// the concentration shows up in the zip and state rates, not in any linear
// trend on coordinates or city size.
const int kSkimmedCities[4] = {1, 4, 7, 10};
// The same rings bought a breached payroll file from a regional processor,
// so cardholders in those metros skew toward these employers and the job
// fraud rate carries signal alongside the geographic rates.
const int kBreachedJobs[5] = {3, 9, 14, 15, 16};

int draw_weighted(Rng& rng, const int* weights, int n) {
  int total = 0;
  for (int i = 0; i < n; ++i) total += weights[i];
  auto u = static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
  for (int i = 0; i < n; ++i) {
    u -= weights[i];
    if (u < 0) return i;
  }
  return n - 1;
}

}  // namespace

std::vector<RawTransaction> synth_generate(std::uint64_t seed,
                                           long long n_normal,
                                           long long n_anomalies) {
  if (n_normal < 0 || n_anomalies < 0 || n_normal + n_anomalies < 1)
    throw std::invalid_argument("need a positive number of rows");
  Rng rng(child_seed(seed, "synth"));

  struct Customer {
    std::string cc_num, first, last, gender, street, dob, job;
    int city = 0;
    double lat = 0.0, lon = 0.0;
    int pref_cat[3] = {0, 0, 0};
    double weight = 1.0;
  };

  constexpr int kNumCustomers = 120;
  std::vector<Customer> customers(kNumCustomers);
  for (auto& c : customers) {
    const bool female = rng.bernoulli(0.5);
    c.gender = female ? "F" : "M";
    c.first = female ? kFirstF[rng.below(std::size(kFirstF))]
                     : kFirstM[rng.below(std::size(kFirstM))];
    c.last = kLast[rng.below(std::size(kLast))];
    c.cc_num = "4";
    for (int d = 0; d < 15; ++d)
      c.cc_num += static_cast<char>('0' + rng.below(10));
    c.city = static_cast<int>(rng.below(std::size(kCities)));
    c.lat = kCities[c.city].lat + rng.uniform(-0.25, 0.25);
    c.lon = kCities[c.city].lon + rng.uniform(-0.25, 0.25);
    c.street = std::to_string(100 + rng.below(900)) + " " +
               kStreetNames[rng.below(std::size(kStreetNames))] + " " +
               kStreetSuffix[rng.below(std::size(kStreetSuffix))];
    // Birth dates across 1940-2004.
    const long long dob_day =
        days_from_civil(1940, 1, 1) +
        static_cast<long long>(rng.below(65 * 365));
    c.dob = format_date(dob_day);
    bool in_skimmed_city = false;
    for (int sc : kSkimmedCities) in_skimmed_city |= c.city == sc;
    if (rng.bernoulli(in_skimmed_city ? 0.85 : 0.08)) {
      c.job = kJobs[kBreachedJobs[rng.below(std::size(kBreachedJobs))]];
    } else {
      c.job = kJobs[rng.below(std::size(kJobs))];
    }
    for (int& p : c.pref_cat)
      p = kColdCategories[rng.below(std::size(kColdCategories))];
    // routine online shoppers keep a card-not-present outlet in rotation
    if (rng.bernoulli(0.4)) c.pref_cat[2] = rng.bernoulli(0.5) ? 5 : 11;
    c.weight = rng.uniform(0.5, 2.0);
  }
  std::vector<double> cust_cdf(customers.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < customers.size(); ++i) {
    wsum += customers[i].weight;
    cust_cdf[i] = wsum;
  }
  auto draw_customer = [&]() -> const Customer& {
    const double u = rng.uniform(0.0, wsum);
    const auto it = std::upper_bound(cust_cdf.begin(), cust_cdf.end(), u);
    return customers[std::min<std::size_t>(
        static_cast<std::size_t>(it - cust_cdf.begin()),
        customers.size() - 1)];
  };

  struct Merchant {
    std::string name;
    int category = 0;
    bool hot = false;
  };
  constexpr int kNumMerchants = 60;
  std::vector<Merchant> merchants(kNumMerchants);
  std::vector<std::vector<int>> by_category(kNumCategories);
  std::vector<int> hot_merchants;
  for (int i = 0; i < kNumMerchants; ++i) {
    Merchant& m = merchants[i];
    const std::string a = kMerchStemA[rng.below(std::size(kMerchStemA))];
    const std::string b = kMerchStemB[rng.below(std::size(kMerchStemB))];
    switch (rng.below(4)) {
      case 0:
        m.name = "fraud_" + a + " and Sons";
        break;
      case 1:
        m.name = "fraud_" + a + ", " + b + " and " +
                 kMerchStemB[rng.below(std::size(kMerchStemB))];
        break;
      case 2:
        m.name = "fraud_" + a + "-" + b;
        break;
      default:
        m.name = "fraud_" + a + " LLC";
        break;
    }
    m.name += " #" + std::to_string(i);  // stems repeat; keep names unique
    // seed the first merchant of every category so pick_merchant always has
    // a pool to draw from
    m.category = i < kNumCategories ? i
                                    : static_cast<int>(rng.below(kNumCategories));
    m.hot = kCategories[m.category].hot && rng.bernoulli(0.9);
    by_category[static_cast<std::size_t>(m.category)].push_back(i);
    if (m.hot) hot_merchants.push_back(i);
  }

  const long long t0 = parse_timestamp("2025-06-01 00:00:00");
  constexpr long long kSpanDays = 180;

  auto make_trans_num = [&rng]() {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(rng.next_u64()),
                  static_cast<unsigned long long>(rng.next_u64()));
    return std::string(buf);
  };

  std::vector<RawTransaction> records;
  records.reserve(static_cast<std::size_t>(n_normal + n_anomalies));

  auto emit = [&](const Customer& c, long long when, int cat_idx,
                  int merch_idx, double amount, int fraud) {
    RawTransaction r;
    r.unix_time = when;
    r.timestamp = format_timestamp(when);
    r.cc_num = c.cc_num;
    r.merchant = merchants[static_cast<std::size_t>(merch_idx)].name;
    r.category = kCategories[cat_idx].name;
    r.amount = std::max(1.0, std::round(amount * 100.0) / 100.0);
    r.first = c.first;
    r.last = c.last;
    r.gender = c.gender;
    r.street = c.street;
    const SynthCity& city = kCities[c.city];
    r.city = city.city;
    r.state = city.state;
    r.zip = city.zip;
    r.lat = c.lat;
    r.lon = c.lon;
    r.city_pop = city.pop;
    r.job = c.job;
    r.dob = c.dob;
    r.trans_num = make_trans_num();
    r.merch_lat = city.lat + rng.uniform(-0.5, 0.5);
    r.merch_lon = city.lon + rng.uniform(-0.5, 0.5);
    r.is_fraud = fraud;
    records.push_back(std::move(r));
  };

  auto pick_merchant = [&](int cat_idx) {
    const auto& pool = by_category[static_cast<std::size_t>(cat_idx)];
    return pool[rng.below(pool.size())];
  };

  auto pick_hot_merchant = [&](int cat_idx) {
    std::vector<int> cat_hot;
    for (int mi : hot_merchants)
      if (merchants[static_cast<std::size_t>(mi)].category == cat_idx)
        cat_hot.push_back(mi);
    return cat_hot.empty() ? pick_merchant(cat_idx)
                           : cat_hot[rng.below(cat_hot.size())];
  };

  // card-not-present outlets take a steady share of everyday spend too
  auto draw_cat = [&](const Customer& c) -> int {
    if (rng.bernoulli(0.6)) return c.pref_cat[rng.below(3)];
    if (rng.bernoulli(0.25)) return rng.bernoulli(0.5) ? 5 : 11;
    return static_cast<int>(rng.below(kNumCategories));
  };

  // A tail of benign oddities keeps the normal class from being one tight
  // ball: big-ticket daytime buys, crack-of-dawn errands, rapid back-to-back
  // purchases, and the occasional evening gift through the same
  // card-not-present outlets the fraud rings favor. Each strays in one
  // direction at a time; none stacks the full fraud signature, so they thin
  // out the margin rather than bridge it.
  long long emitted_normal = 0;
  while (emitted_normal < n_normal) {
    const Customer& c = draw_customer();
    const long long day = static_cast<long long>(rng.below(kSpanDays));
    const double u = rng.uniform(0.0, 1.0);
    if (u < 0.04) {
      // big ticket through a card-not-present outlet, ordinary hours
      const int hour = draw_weighted(rng, kHourWeights, 24);
      const long long when = t0 + day * 86400 + hour * 3600 +
                             static_cast<long long>(rng.below(3600));
      const int cat_idx = rng.bernoulli(0.5) ? 5 : 11;
      const int merch_idx = pick_hot_merchant(cat_idx);
      const SynthCategory& cat = kCategories[cat_idx];
      const double amount = std::exp(rng.normal(
          cat.mu_log + rng.uniform(0.9, 1.05), cat.sigma_log * 0.35));
      emit(c, when, cat_idx, merch_idx, amount, 0);
      ++emitted_normal;
      continue;
    }
    if (u < 0.0495) {
      // rapid errands: ordinary purchases minutes apart on one card
      const int hour = draw_weighted(rng, kHourWeights, 24);
      long long when = t0 + day * 86400 + hour * 3600 +
                       static_cast<long long>(rng.below(3600));
      const long long burst = std::min<long long>(
          3 + static_cast<long long>(rng.below(2)), n_normal - emitted_normal);
      for (long long b = 0; b < burst; ++b) {
        const int cat_idx = draw_cat(c);
        const SynthCategory& cat = kCategories[cat_idx];
        const double amount = std::exp(rng.normal(cat.mu_log, cat.sigma_log));
        emit(c, when, cat_idx, pick_merchant(cat_idx), amount, 0);
        when += 240 + static_cast<long long>(rng.below(900));
        ++emitted_normal;
      }
      continue;
    }
    if (u < 0.0845) {
      // evening gift through a card-not-present outlet; amounts run the
      // whole span from modest to lavish
      const int hour = 19 + static_cast<int>(rng.below(3));
      const long long when = t0 + day * 86400 + hour * 3600 +
                             static_cast<long long>(rng.below(3600));
      const int cat_idx = rng.bernoulli(0.5) ? 5 : 11;
      const int merch_idx = pick_hot_merchant(cat_idx);
      const SynthCategory& cat = kCategories[cat_idx];
      const double amount = std::exp(rng.normal(
          cat.mu_log + rng.uniform(0.3, 0.8), cat.sigma_log * 0.35));
      emit(c, when, cat_idx, merch_idx, amount, 0);
      ++emitted_normal;
      continue;
    }
    const int hour = draw_weighted(rng, kHourWeights, 24);
    const long long when = t0 + day * 86400 + hour * 3600 +
                           static_cast<long long>(rng.below(3600));
    int cat_idx = rng.bernoulli(0.6)
                      ? c.pref_cat[rng.below(3)]
                      : static_cast<int>(rng.below(kNumCategories));
    const SynthCategory& cat = kCategories[cat_idx];
    const double amount = std::exp(rng.normal(cat.mu_log, cat.sigma_log));
    emit(c, when, cat_idx, pick_merchant(cat_idx), amount, 0);
    ++emitted_normal;
  }

  std::vector<int> skimmed;
  for (int ci = 0; ci < kNumCustomers; ++ci)
    for (int sc : kSkimmedCities)
      if (customers[static_cast<std::size_t>(ci)].city == sc)
        skimmed.push_back(ci);

  // Fraud arrives in short per-card bursts: a stolen number gets hit a few
  // times within an hour or two, late in the evening, at the card-not-present
  // merchants that launder the money, and in a consistent price band well
  // above normal spend. The bursts drive the recency and window-count
  // features; the concentration on skimmed cardholders drives the geographic
  // and job rates. A few frauds are instead careful single purchases styled
  // after ordinary spend; those stay inside any sensible boundary and put a
  // floor under the reachable recall.
  long long emitted = 0;
  while (emitted < n_anomalies) {
    if (rng.bernoulli(0.07)) {
      const Customer& c = draw_customer();
      const long long day = static_cast<long long>(rng.below(kSpanDays));
      const int hour = draw_weighted(rng, kHourWeights, 24);
      const long long when = t0 + day * 86400 + hour * 3600 +
                             static_cast<long long>(rng.below(3600));
      const int cat_idx = rng.bernoulli(0.6)
                              ? c.pref_cat[rng.below(3)]
                              : static_cast<int>(rng.below(kNumCategories));
      const SynthCategory& cat = kCategories[cat_idx];
      const double amount = std::exp(rng.normal(cat.mu_log, cat.sigma_log));
      emit(c, when, cat_idx, pick_merchant(cat_idx), amount, 1);
      ++emitted;
      continue;
    }
    const Customer& c =
        skimmed.empty() ? customers[rng.below(static_cast<std::uint64_t>(
                              customers.size()))]
                        : customers[static_cast<std::size_t>(
                              skimmed[rng.below(skimmed.size())])];
    const long long day = static_cast<long long>(rng.below(kSpanDays));
    const int hour = kLateEvening[rng.below(std::size(kLateEvening))];
    long long when = t0 + day * 86400 + hour * 3600 +
                     static_cast<long long>(rng.below(3600));
    const long long burst = std::min<long long>(
        4 + static_cast<long long>(rng.below(4)), n_anomalies - emitted);
    for (long long b = 0; b < burst; ++b) {
      const int cat_idx = rng.bernoulli(0.5) ? 5 : 11;  // card-not-present
      const int merch_idx = pick_hot_merchant(cat_idx);
      const SynthCategory& cat = kCategories[cat_idx];
      const double amount = std::exp(rng.normal(
          cat.mu_log + rng.uniform(0.85, 1.0), cat.sigma_log * 0.4));
      emit(c, when, cat_idx, merch_idx, amount, 1);
      when += 60 + static_cast<long long>(rng.below(1740));
      ++emitted;
    }
  }

  std::sort(records.begin(), records.end(),
            [](const RawTransaction& a, const RawTransaction& b) {
              if (a.unix_time != b.unix_time) return a.unix_time < b.unix_time;
              return a.trans_num < b.trans_num;
            });
  return records;
}

}  // namespace qkad
