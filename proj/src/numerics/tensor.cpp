#include "mtorl/numerics/tensor.hpp"

#include <cmath>
#include <sstream>

#include "mtorl/common/errors.hpp"

namespace mtorl::num {

namespace {

size_t checked_product(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + shape_str(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  values_.assign(checked_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (checked_product(shape_) != values_.size()) {
    throw ShapeError("value count " + std::to_string(values_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  for (double& v : t.values_) v = value;
  return t;
}

Tensor Tensor::vec(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  return Tensor({n}, std::move(values));
}

Tensor Tensor::mat(int rows, int cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

int Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on rank-" + std::to_string(rank()) + " tensor");
  return shape_[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on rank-" + std::to_string(rank()) + " tensor");
  return shape_[1];
}

double& Tensor::at(int r, int c) {
  return values_[static_cast<size_t>(r) * static_cast<size_t>(shape_[1]) + static_cast<size_t>(c)];
}

double Tensor::at(int r, int c) const {
  return values_[static_cast<size_t>(r) * static_cast<size_t>(shape_[1]) + static_cast<size_t>(c)];
}

double& Tensor::at3(int a, int b, int c) {
  size_t idx = (static_cast<size_t>(a) * static_cast<size_t>(shape_[1]) + static_cast<size_t>(b)) *
                   static_cast<size_t>(shape_[2]) +
               static_cast<size_t>(c);
  return values_[idx];
}

double Tensor::at3(int a, int b, int c) const {
  size_t idx = (static_cast<size_t>(a) * static_cast<size_t>(shape_[1]) + static_cast<size_t>(b)) *
                   static_cast<size_t>(shape_[2]) +
               static_cast<size_t>(c);
  return values_[idx];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace mtorl::num
