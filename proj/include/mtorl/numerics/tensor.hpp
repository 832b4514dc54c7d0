#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtorl::num {

// Dense 64-bit real array in row-major order. Rank 1..3 is all the
// architecture needs (vectors, matrices, conv kernel stacks).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);  // zero-filled
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor vec(std::vector<double> values);
  static Tensor mat(int rows, int cols, std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](int i) { return values_[static_cast<size_t>(i)]; }
  double operator[](int i) const { return values_[static_cast<size_t>(i)]; }

  // 2-D accessors
  int rows() const;
  int cols() const;
  double& at(int r, int c);
  double at(int r, int c) const;

  // 3-D accessor (e.g. conv kernels [out][in][tap])
  double& at3(int a, int b, int c);
  double at3(int a, int b, int c) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  // Zero-filled tensor with this tensor's shape.
  Tensor zeros_like() const { return Tensor(shape_); }

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

std::string shape_str(const std::vector<int>& shape);

}  // namespace mtorl::num
