#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qkad {

// Dense row-major matrix of doubles; rows are samples.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return cols_ == 0 ? 0 : data_.size() / cols_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  void append_row(std::span<const double> r) {
    if (cols_ == 0) cols_ = r.size();
    if (r.size() != cols_)
      throw std::invalid_argument("row width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace qkad
