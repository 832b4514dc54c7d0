#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mtorl/numerics/tensor.hpp"

namespace mtorl::num {

using VarId = int;

// Floor applied inside every log on a probability, and the matching guard
// in the backward pass.
inline constexpr double kProbFloor = 1e-12;

// Reverse-mode gradient tape. Records the primitive operations applied in
// order; backward() replays them in reverse, accumulating gradients into
// each tracked node. Parameters are named leaves; their accumulated
// gradients are read back by name after backward().
//
// Owned by one logical thread at a time. Values are immutable once
// recorded, so replaying a forward build with the same inputs reproduces
// the same values bit-exactly.
class Tape {
 public:
  // Leaf with no gradient tracking (data, masks, fixed inputs).
  // References returned by val() and grad() stay valid as the graph grows.
  VarId constant(Tensor value);

  // Named leaf whose gradient is accumulated during backward().
  VarId param(const std::string& name, Tensor value);

  const Tensor& val(VarId id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool tracked(VarId id) const { return nodes_[static_cast<size_t>(id)].track; }

  // Gradient tensor of a node, zero-initialized on first access.
  Tensor& grad(VarId id);
  // Null if backward() has not reached this node (or never will).
  const Tensor* maybe_grad(VarId id) const;

  // Seeds d(root)/d(root) = 1 and runs all recorded backward steps in
  // reverse order. root must be scalar (size 1).
  void backward(VarId root);

  // Accumulated parameter gradients by name; parameters a backward pass
  // never touched map to zero tensors of the parameter shape.
  std::map<std::string, Tensor> param_gradients() const;

  size_t node_count() const { return nodes_.size(); }

  // Used by operator implementations: value of the new node plus the
  // backward step that scatters its incoming gradient to its parents.
  // Pass track = true iff any parent is tracked.
  VarId emplace(Tensor value, bool track, std::function<void(Tape&)> back);

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool track = false;
    std::function<void(Tape&)> back;
  };
  std::deque<Node> nodes_;  // deque: stable references under push_back
  std::vector<std::pair<std::string, VarId>> params_;
};

// ----- primitive operations -------------------------------------------------
// All operations validate shapes and throw ShapeError on mismatch. Inputs
// must be finite; every operation maps finite inputs to finite outputs.

VarId matmul(Tape& t, VarId a, VarId b);
VarId transpose(Tape& t, VarId a);
VarId add(Tape& t, VarId a, VarId b);                  // same shape
VarId add_col_broadcast(Tape& t, VarId mat, VarId col);  // [d x n] + [d]
VarId sub(Tape& t, VarId a, VarId b);
VarId scale(Tape& t, VarId a, double c);
VarId hadamard(Tape& t, VarId a, VarId b);
VarId leaky_relu(Tape& t, VarId a, double slope);
VarId sigmoid(Tape& t, VarId a);
VarId log_sigmoid(Tape& t, VarId a);

// Causal convolution over a [d_in x n] sequence with kernel
// [d_out x d_in x k_c]: out[o][t] = sum_{c,i} K[o][c][i] * in[c][t - dilation*i],
// positions before 0 read as zero. Output is [d_out x n].
VarId dilated_causal_conv1d(Tape& t, VarId input, VarId kernel, int dilation);

// Kernel reparameterization: per output channel o,
// K[o] = scale[o] * V[o] / ||V[o]||_2 over the flattened [d_in x k_c] slice.
VarId weight_norm_kernel(Tape& t, VarId direction, VarId scale);

// Per-position normalization of [d x n] over the feature dimension, then
// affine by gain/bias [d].
VarId layer_norm(Tape& t, VarId x, VarId gain, VarId bias, double eps);

// Row-wise softmax of square [n x n] logits under the causal
// lower-triangular mask: row r sees columns c <= r. Masked entries of the
// output are exactly 0. key_valid, when given, additionally hides columns
// whose flag is false from every row except the diagonal (self stays
// visible, so no row is ever fully masked).
VarId masked_softmax(Tape& t, VarId logits, const std::vector<std::uint8_t>* key_valid = nullptr);

VarId softmax_rows(Tape& t, VarId a);

VarId slice_cols(Tape& t, VarId a, int c0, int c1);  // [r x (c1-c0)], half-open
VarId concat_cols(Tape& t, const std::vector<VarId>& parts);
VarId reshape(Tape& t, VarId a, std::vector<int> shape);

// out[t] = log(max(probs[t, labels[t]], kProbFloor)) for [n x m] probs.
VarId row_gather_log(Tape& t, VarId probs, const std::vector<int>& labels);

// Elementwise -(y log p + (1-y) log(1-p)) with the probability floor.
VarId bce_terms(Tape& t, VarId preds, const std::vector<double>& labels);

// Elementwise (p - y)^2.
VarId squared_error_terms(Tape& t, VarId preds, const std::vector<double>& labels);

// Scalar sum of vec[t] over positions with mask[t] != 0.
VarId masked_sum(Tape& t, VarId vec, const std::vector<std::uint8_t>& mask);

}  // namespace mtorl::num
