#include "qkad/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qkad/parallel.hpp"
#include "qkad/simd/simd.hpp"

namespace qkad {

namespace {

constexpr char kRdmSchema[] = "rdmset/1";
constexpr char kRdmMagic[8] = {'Q', 'K', 'R', 'D', 'M', 'S', '1', '\n'};

}  // namespace

std::string_view kernel_kind_name(KernelKind k) {
  return k == KernelKind::rbf ? "rbf" : "qrbf";
}

KernelKind kernel_kind_from_name(std::string_view name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "qrbf") return KernelKind::qrbf;
  throw std::invalid_argument("unknown kernel kind: " + std::string(name));
}

RdmSet::RdmSet(int num_qubits, RdmProvenance prov)
    : num_qubits_(num_qubits), prov_(prov),
      coords_(0, static_cast<std::size_t>(num_qubits) * 8) {
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be >= 1");
}

void RdmSet::add_row(std::span<const OneQubitRdm> rdms) {
  if (static_cast<int>(rdms.size()) != num_qubits_)
    throw std::invalid_argument("RDM count does not match num_qubits");
  resize(size() + 1);
  set_row(size() - 1, rdms);
}

void RdmSet::set_row(std::size_t i, std::span<const OneQubitRdm> rdms) {
  if (static_cast<int>(rdms.size()) != num_qubits_)
    throw std::invalid_argument("RDM count does not match num_qubits");
  auto row = coords_.row(i);
  for (std::size_t q = 0; q < rdms.size(); ++q) {
    const auto c = rdms[q].coords();
    std::copy(c.begin(), c.end(), row.begin() + static_cast<long>(8 * q));
  }
}

void RdmSet::resize(std::size_t rows) {
  coords_.data().resize(rows * static_cast<std::size_t>(num_qubits_) * 8, 0.0);
}

OneQubitRdm RdmSet::rdm(std::size_t sample, int qubit) const {
  const auto row = coords_.row(sample);
  return OneQubitRdm::from_coords(
      row.subspan(static_cast<std::size_t>(qubit) * 8, 8), prov_.kind);
}

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma) {
  if (a.size() != b.size())
    throw std::invalid_argument("kernel arguments differ in length");
  if (a.empty()) throw std::invalid_argument("kernel arguments are empty");
  return std::exp(-gamma * simd::l2sq(a.data(), b.data(), a.size()));
}

double qrbf_kernel(std::span<const double> row_a,
                   std::span<const double> row_b, double gamma) {
  // Row euclidean distance == summed Frobenius distance over qubits, so the
  // projected kernel reduces to the plain gaussian on coordinate rows.
  return rbf_kernel(row_a, row_b, gamma);
}

double qrbf_kernel(std::span<const OneQubitRdm> a,
                   std::span<const OneQubitRdm> b, double gamma) {
  if (a.size() != b.size())
    throw std::invalid_argument("qubit counts differ");
  double acc = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double d = frobenius_distance(a[q], b[q]);
    acc += d * d;
  }
  return std::exp(-gamma * acc);
}

KernelMatrix KernelMatrix::from_values(std::size_t n,
                                       std::vector<double> values,
                                       double gamma, KernelKind kind) {
  KernelMatrix k = from_values_unchecked(n, std::move(values), gamma, kind);
  if (!k.is_symmetric(1e-12))
    throw std::invalid_argument("kernel matrix is not symmetric");
  return k;
}

KernelMatrix KernelMatrix::from_values_unchecked(std::size_t n,
                                                 std::vector<double> values,
                                                 double gamma,
                                                 KernelKind kind) {
  if (values.size() != n * n)
    throw std::invalid_argument("kernel matrix size mismatch");
  KernelMatrix k;
  k.n_ = n;
  k.gamma_ = gamma;
  k.kind_ = kind;
  k.v_ = std::move(values);
  return k;
}

bool KernelMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (std::abs(at(i, j) - at(j, i)) > tol) return false;
  return true;
}

namespace {

template <typename Rows>
KernelMatrix gram_impl(const Rows& x, std::size_t n, double gamma,
                       KernelKind kind) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  if (n == 0) throw std::invalid_argument("empty sample set");
  std::vector<double> v(n * n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    v[i * n + i] = 1.0;
    const auto ri = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto rj = x.row(j);
      const double k =
          std::exp(-gamma * simd::l2sq(ri.data(), rj.data(), ri.size()));
      v[i * n + j] = k;
      v[j * n + i] = k;
    }
  });
  return KernelMatrix::from_values_unchecked(n, std::move(v), gamma, kind);
}

template <typename Rows>
FeatureMatrix cross_impl(const Rows& test, const Rows& train,
                         std::size_t n_test, std::size_t n_train,
                         double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  FeatureMatrix out(n_test, n_train);
  parallel_for(n_test, [&](std::size_t i) {
    const auto ri = test.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < n_train; ++j) {
      const auto rj = train.row(j);
      dst[j] = std::exp(-gamma * simd::l2sq(ri.data(), rj.data(), ri.size()));
    }
  });
  return out;
}

}  // namespace

KernelMatrix gram_matrix(const FeatureMatrix& x, double gamma) {
  return gram_impl(x, x.rows(), gamma, KernelKind::rbf);
}

KernelMatrix gram_matrix(const RdmSet& x, double gamma) {
  return gram_impl(x, x.size(), gamma, KernelKind::qrbf);
}

FeatureMatrix cross_gram(const FeatureMatrix& test, const FeatureMatrix& train,
                         double gamma) {
  if (test.cols() != train.cols())
    throw std::invalid_argument("feature widths differ");
  return cross_impl(test, train, test.rows(), train.rows(), gamma);
}

FeatureMatrix cross_gram(const RdmSet& test, const RdmSet& train,
                         double gamma) {
  if (test.num_qubits() != train.num_qubits())
    throw std::invalid_argument("qubit counts differ");
  return cross_impl(test, train, test.size(), train.size(), gamma);
}

void save_rdms(const std::string& path, const RdmSet& set) {
  const bool binary = path.size() > 4 && path.ends_with(".bin");
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  if (binary) {
    out.write(kRdmMagic, sizeof(kRdmMagic));
    const std::uint32_t nq = static_cast<std::uint32_t>(set.num_qubits());
    const std::uint8_t kind =
        set.provenance().kind == RdmKind::estimated ? 1 : 0;
    const std::uint64_t shots =
        static_cast<std::uint64_t>(set.provenance().shots);
    const std::uint64_t seed = set.provenance().seed;
    const std::uint64_t rows = set.size();
    out.write(reinterpret_cast<const char*>(&nq), sizeof(nq));
    out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
    out.write(reinterpret_cast<const char*>(&shots), sizeof(shots));
    out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto row = set.row(i);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  } else {
    nlohmann::json j;
    j["schema"] = kRdmSchema;
    j["num_qubits"] = set.num_qubits();
    nlohmann::json prov;
    prov["kind"] =
        set.provenance().kind == RdmKind::estimated ? "estimated" : "exact";
    if (set.provenance().kind == RdmKind::estimated) {
      prov["shots"] = set.provenance().shots;
      prov["seed"] = set.provenance().seed;
    }
    j["provenance"] = prov;
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto row = set.row(i);
      samples.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["samples"] = std::move(samples);
    out << j.dump();
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

RdmSet load_rdms(const std::string& path) {
  const bool binary = path.size() > 4 && path.ends_with(".bin");
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path);

  if (binary) {
    char magic[sizeof(kRdmMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kRdmMagic, sizeof(magic)) != 0)
      throw std::runtime_error(path + ": not an RDM set block");
    std::uint32_t nq = 0;
    std::uint8_t kind = 0;
    std::uint64_t shots = 0, seed = 0, rows = 0;
    in.read(reinterpret_cast<char*>(&nq), sizeof(nq));
    in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
    in.read(reinterpret_cast<char*>(&shots), sizeof(shots));
    in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    if (!in) throw std::runtime_error(path + ": truncated header");
    RdmProvenance prov;
    prov.kind = kind ? RdmKind::estimated : RdmKind::exact;
    prov.shots = static_cast<long long>(shots);
    prov.seed = seed;
    RdmSet set(static_cast<int>(nq), prov);
    set.resize(rows);
    in.read(reinterpret_cast<char*>(set.coords_.data().data()),
            static_cast<std::streamsize>(set.coords_.data().size() *
                                         sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated payload");
    return set;
  }

  nlohmann::json j;
  in >> j;
  if (!j.contains("schema") || j["schema"] != kRdmSchema)
    throw std::runtime_error(path + ": unsupported schema, expected " +
                             std::string(kRdmSchema));
  RdmProvenance prov;
  const auto& pj = j.at("provenance");
  const std::string kind = pj.at("kind").get<std::string>();
  if (kind == "estimated") {
    prov.kind = RdmKind::estimated;
    prov.shots = pj.at("shots").get<long long>();
    prov.seed = pj.at("seed").get<std::uint64_t>();
  } else if (kind == "exact") {
    prov.kind = RdmKind::exact;
  } else {
    throw std::runtime_error(path + ": unknown provenance kind " + kind);
  }
  RdmSet set(j.at("num_qubits").get<int>(), prov);
  const auto& samples = j.at("samples");
  set.resize(samples.size());
  const std::size_t width = static_cast<std::size_t>(set.num_qubits()) * 8;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = samples[i].get<std::vector<double>>();
    if (row.size() != width)
      throw std::runtime_error(path + ": sample row width mismatch");
    std::copy(row.begin(), row.end(),
              set.coords_.data().begin() + static_cast<long>(i * width));
  }
  return set;
}

void write_kernel_csv(std::ostream& out, const KernelMatrix& k) {
  char buf[32];
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", k.at(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace qkad
