#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mppgeo {

// Dense cubic/quartic arrays over a single index range [0, n). Storage is
// row-major in the order the indices are written.

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int size() const { return n_; }
  double& operator()(int a, int b, int c) { return data_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const {
    return data_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
  }
  const std::vector<double>& data() const { return data_; }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int size() const { return n_; }
  double& operator()(int a, int b, int c, int d) {
    return data_[((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d];
  }
  double operator()(int a, int b, int c, int d) const {
    return data_[((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d];
  }
  const std::vector<double>& data() const { return data_; }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

}  // namespace mppgeo
