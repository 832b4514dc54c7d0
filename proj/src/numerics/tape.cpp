#include "mtorl/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtorl/common/errors.hpp"

namespace mtorl::num {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ShapeError(what);
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

VarId Tape::constant(Tensor value) { return emplace(std::move(value), false, nullptr); }

VarId Tape::param(const std::string& name, Tensor value) {
  VarId id = emplace(std::move(value), true, nullptr);
  params_.emplace_back(name, id);
  return id;
}

VarId Tape::emplace(Tensor value, bool track, std::function<void(Tape&)> back) {
  Node node;
  node.value = std::move(value);
  node.track = track;
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<VarId>(nodes_.size() - 1);
}

Tensor& Tape::grad(VarId id) {
  Node& node = nodes_[static_cast<size_t>(id)];
  if (node.grad.empty()) node.grad = node.value.zeros_like();
  return node.grad;
}

const Tensor* Tape::maybe_grad(VarId id) const {
  const Node& node = nodes_[static_cast<size_t>(id)];
  return node.grad.empty() ? nullptr : &node.grad;
}

void Tape::backward(VarId root) {
  require(val(root).size() == 1, "backward root must be scalar");
  grad(root)[0] = 1.0;
  for (VarId id = root; id >= 0; --id) {
    Node& node = nodes_[static_cast<size_t>(id)];
    if (!node.track || !node.back) continue;
    if (node.grad.empty()) continue;  // not an ancestor of root
    node.back(*this);
  }
}

std::map<std::string, Tensor> Tape::param_gradients() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, id] : params_) {
    const Tensor* g = maybe_grad(id);
    out[name] = g ? *g : val(id).zeros_like();
  }
  return out;
}

// ----- operations -----------------------------------------------------------

VarId matmul(Tape& t, VarId a, VarId b) {
  const Tensor& A = t.val(a);
  const Tensor& B = t.val(b);
  require(A.rank() == 2 && B.rank() == 2, "matmul expects matrices");
  require(A.cols() == B.rows(),
          "matmul inner dims " + shape_str(A.shape()) + " * " + shape_str(B.shape()));
  const int n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C({n, m});
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      for (int j = 0; j < m; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  }
  const bool track = t.tracked(a) || t.tracked(b);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, b, out, n, k, m](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& A2 = tp.val(a);
      const Tensor& B2 = tp.val(b);
      if (tp.tracked(a)) {
        Tensor& ga = tp.grad(a);
        for (int i = 0; i < n; ++i)
          for (int p = 0; p < k; ++p) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += g.at(i, j) * B2.at(p, j);
            ga.at(i, p) += acc;
          }
      }
      if (tp.tracked(b)) {
        Tensor& gb = tp.grad(b);
        for (int p = 0; p < k; ++p)
          for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += A2.at(i, p) * g.at(i, j);
            gb.at(p, j) += acc;
          }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId transpose(Tape& t, VarId a) {
  const Tensor& A = t.val(a);
  require(A.rank() == 2, "transpose expects a matrix");
  const int r = A.rows(), c = A.cols();
  Tensor C({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) C.at(j, i) = A.at(i, j);
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out, r, c](Tape& tp) {
      const Tensor& g = tp.grad(out);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) ga.at(i, j) += g.at(j, i);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId add(Tape& t, VarId a, VarId b) {
  const Tensor& A = t.val(a);
  const Tensor& B = t.val(b);
  require(A.same_shape(B), "add shape mismatch " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) C[i] += B[i];
  const bool track = t.tracked(a) || t.tracked(b);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, b, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      if (tp.tracked(a)) {
        Tensor& ga = tp.grad(a);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.tracked(b)) {
        Tensor& gb = tp.grad(b);
        for (int i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId add_col_broadcast(Tape& t, VarId mat, VarId col) {
  const Tensor& A = t.val(mat);
  const Tensor& B = t.val(col);
  require(A.rank() == 2 && B.rank() == 1, "add_col_broadcast expects [d x n] + [d]");
  require(A.rows() == B.dim(0), "broadcast length " + shape_str(B.shape()) + " vs " + shape_str(A.shape()));
  const int d = A.rows(), n = A.cols();
  Tensor C = A;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) C.at(i, j) += B[i];
  const bool track = t.tracked(mat) || t.tracked(col);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [mat, col, out, d, n](Tape& tp) {
      const Tensor& g = tp.grad(out);
      if (tp.tracked(mat)) {
        Tensor& ga = tp.grad(mat);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.tracked(col)) {
        Tensor& gb = tp.grad(col);
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += g.at(i, j);
          gb[i] += acc;
        }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId sub(Tape& t, VarId a, VarId b) {
  const Tensor& A = t.val(a);
  const Tensor& B = t.val(b);
  require(A.same_shape(B), "sub shape mismatch");
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) C[i] -= B[i];
  const bool track = t.tracked(a) || t.tracked(b);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, b, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      if (tp.tracked(a)) {
        Tensor& ga = tp.grad(a);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.tracked(b)) {
        Tensor& gb = tp.grad(b);
        for (int i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId scale(Tape& t, VarId a, double c) {
  Tensor C = t.val(a);
  for (int i = 0; i < C.size(); ++i) C[i] *= c;
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, c, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId hadamard(Tape& t, VarId a, VarId b) {
  const Tensor& A = t.val(a);
  const Tensor& B = t.val(b);
  require(A.same_shape(B), "hadamard shape mismatch");
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) C[i] *= B[i];
  const bool track = t.tracked(a) || t.tracked(b);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, b, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& A2 = tp.val(a);
      const Tensor& B2 = tp.val(b);
      if (tp.tracked(a)) {
        Tensor& ga = tp.grad(a);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * B2[i];
      }
      if (tp.tracked(b)) {
        Tensor& gb = tp.grad(b);
        for (int i = 0; i < g.size(); ++i) gb[i] += g[i] * A2[i];
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId leaky_relu(Tape& t, VarId a, double slope) {
  require(slope > 0.0 && slope < 1.0, "leaky_relu slope must lie in (0,1)");
  const Tensor& A = t.val(a);
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) {
    if (C[i] < 0.0) C[i] *= slope;
  }
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, slope, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& A2 = tp.val(a);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (A2[i] >= 0.0 ? 1.0 : slope);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId sigmoid(Tape& t, VarId a) {
  const Tensor& A = t.val(a);
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) C[i] = stable_sigmoid(C[i]);
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& Y = tp.val(out);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * Y[i] * (1.0 - Y[i]);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId log_sigmoid(Tape& t, VarId a) {
  const Tensor& A = t.val(a);
  Tensor C = A;
  for (int i = 0; i < C.size(); ++i) {
    double x = C[i];
    C[i] = x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  }
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& A2 = tp.val(a);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * stable_sigmoid(-A2[i]);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId dilated_causal_conv1d(Tape& t, VarId input, VarId kernel, int dilation) {
  const Tensor& X = t.val(input);
  const Tensor& K = t.val(kernel);
  require(dilation >= 1, "dilation must be >= 1");
  require(X.rank() == 2, "conv input must be [d_in x n]");
  require(K.rank() == 3, "conv kernel must be [d_out x d_in x k_c]");
  require(K.dim(1) == X.rows(), "kernel input channels " + std::to_string(K.dim(1)) +
                                    " vs input channels " + std::to_string(X.rows()));
  const int d_out = K.dim(0), d_in = K.dim(1), taps = K.dim(2), n = X.cols();
  Tensor C({d_out, n});
  for (int o = 0; o < d_out; ++o) {
    for (int tpos = 0; tpos < n; ++tpos) {
      double acc = 0.0;
      for (int i = 0; i < taps; ++i) {
        const int src = tpos - dilation * i;
        if (src < 0) break;  // earlier taps only reach further back
        for (int c = 0; c < d_in; ++c) acc += K.at3(o, c, i) * X.at(c, src);
      }
      C.at(o, tpos) = acc;
    }
  }
  const bool track = t.tracked(input) || t.tracked(kernel);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [input, kernel, dilation, out, d_out, d_in, taps, n](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& X2 = tp.val(input);
      const Tensor& K2 = tp.val(kernel);
      if (tp.tracked(input)) {
        Tensor& gx = tp.grad(input);
        for (int o = 0; o < d_out; ++o)
          for (int tpos = 0; tpos < n; ++tpos) {
            const double go = g.at(o, tpos);
            if (go == 0.0) continue;
            for (int i = 0; i < taps; ++i) {
              const int src = tpos - dilation * i;
              if (src < 0) break;
              for (int c = 0; c < d_in; ++c) gx.at(c, src) += K2.at3(o, c, i) * go;
            }
          }
      }
      if (tp.tracked(kernel)) {
        Tensor& gk = tp.grad(kernel);
        for (int o = 0; o < d_out; ++o)
          for (int tpos = 0; tpos < n; ++tpos) {
            const double go = g.at(o, tpos);
            if (go == 0.0) continue;
            for (int i = 0; i < taps; ++i) {
              const int src = tpos - dilation * i;
              if (src < 0) break;
              for (int c = 0; c < d_in; ++c) gk.at3(o, c, i) += X2.at(c, src) * go;
            }
          }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId weight_norm_kernel(Tape& t, VarId direction, VarId scale_vec) {
  const Tensor& V = t.val(direction);
  const Tensor& S = t.val(scale_vec);
  require(V.rank() == 3, "weight_norm direction must be [d_out x d_in x k_c]");
  require(S.rank() == 1 && S.dim(0) == V.dim(0), "weight_norm scale must be [d_out]");
  const int d_out = V.dim(0);
  const int per = V.dim(1) * V.dim(2);
  std::vector<double> norms(static_cast<size_t>(d_out), 0.0);
  Tensor C = V;
  for (int o = 0; o < d_out; ++o) {
    double sq = 0.0;
    const double* v = V.data() + static_cast<size_t>(o) * per;
    for (int i = 0; i < per; ++i) sq += v[i] * v[i];
    const double norm = std::sqrt(sq);
    if (norm == 0.0) throw std::runtime_error("weight_norm: zero direction slice");
    norms[static_cast<size_t>(o)] = norm;
    double* c = C.data() + static_cast<size_t>(o) * per;
    const double f = S[o] / norm;
    for (int i = 0; i < per; ++i) c[i] = v[i] * f;
  }
  const bool track = t.tracked(direction) || t.tracked(scale_vec);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [direction, scale_vec, out, d_out, per, norms](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& V2 = tp.val(direction);
      const Tensor& S2 = tp.val(scale_vec);
      for (int o = 0; o < d_out; ++o) {
        const double norm = norms[static_cast<size_t>(o)];
        const double* v = V2.data() + static_cast<size_t>(o) * per;
        const double* go = g.data() + static_cast<size_t>(o) * per;
        double dot = 0.0;  // g . v_hat
        for (int i = 0; i < per; ++i) dot += go[i] * v[i] / norm;
        if (tp.tracked(scale_vec)) tp.grad(scale_vec)[o] += dot;
        if (tp.tracked(direction)) {
          Tensor& gv = tp.grad(direction);
          double* gvo = gv.data() + static_cast<size_t>(o) * per;
          const double f = S2[o] / norm;
          for (int i = 0; i < per; ++i) gvo[i] += f * (go[i] - dot * v[i] / norm);
        }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId layer_norm(Tape& t, VarId x, VarId gain, VarId bias, double eps) {
  require(eps > 0.0, "layer_norm eps must be positive");
  const Tensor& X = t.val(x);
  const Tensor& G = t.val(gain);
  const Tensor& B = t.val(bias);
  require(X.rank() == 2, "layer_norm input must be [d x n]");
  require(G.rank() == 1 && G.dim(0) == X.rows(), "layer_norm gain must be [d]");
  require(B.rank() == 1 && B.dim(0) == X.rows(), "layer_norm bias must be [d]");
  const int d = X.rows(), n = X.cols();
  Tensor C({d, n});
  Tensor xhat({d, n});
  std::vector<double> inv_std(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += X.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = X.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(j)] = inv;
    for (int i = 0; i < d; ++i) {
      const double xh = (X.at(i, j) - mean) * inv;
      xhat.at(i, j) = xh;
      C.at(i, j) = G[i] * xh + B[i];
    }
  }
  const bool track = t.tracked(x) || t.tracked(gain) || t.tracked(bias);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [x, gain, bias, out, d, n, xhat, inv_std](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& G2 = tp.val(gain);
      if (tp.tracked(gain)) {
        Tensor& gg = tp.grad(gain);
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += g.at(i, j) * xhat.at(i, j);
          gg[i] += acc;
        }
      }
      if (tp.tracked(bias)) {
        Tensor& gb = tp.grad(bias);
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += g.at(i, j);
          gb[i] += acc;
        }
      }
      if (tp.tracked(x)) {
        Tensor& gx = tp.grad(x);
        for (int j = 0; j < n; ++j) {
          double sum_dxh = 0.0, sum_dxh_xh = 0.0;
          for (int i = 0; i < d; ++i) {
            const double dxh = g.at(i, j) * G2[i];
            sum_dxh += dxh;
            sum_dxh_xh += dxh * xhat.at(i, j);
          }
          const double inv = inv_std[static_cast<size_t>(j)];
          for (int i = 0; i < d; ++i) {
            const double dxh = g.at(i, j) * G2[i];
            gx.at(i, j) += inv * (dxh - sum_dxh / d - xhat.at(i, j) * sum_dxh_xh / d);
          }
        }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId masked_softmax(Tape& t, VarId logits, const std::vector<std::uint8_t>* key_valid) {
  const Tensor& L = t.val(logits);
  require(L.rank() == 2, "masked_softmax expects a matrix");
  require(L.rows() == L.cols(), "masked_softmax expects square logits, got " + shape_str(L.shape()));
  const int n = L.rows();
  std::vector<std::uint8_t> kv;
  if (key_valid != nullptr) {
    require(static_cast<int>(key_valid->size()) == n, "key_valid length must match logits");
    kv = *key_valid;
  }
  auto visible = [&kv](int r, int c) {
    if (c > r) return false;
    if (kv.empty()) return true;
    return kv[static_cast<size_t>(c)] != 0 || c == r;  // self always visible
  };
  Tensor C({n, n});
  for (int r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c <= r; ++c) {
      if (visible(r, c)) mx = std::max(mx, L.at(r, c));
    }
    double denom = 0.0;
    for (int c = 0; c <= r; ++c) {
      if (visible(r, c)) denom += std::exp(L.at(r, c) - mx);
    }
    for (int c = 0; c < n; ++c) {
      C.at(r, c) = visible(r, c) ? std::exp(L.at(r, c) - mx) / denom : 0.0;
    }
  }
  const bool track = t.tracked(logits);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [logits, out, n, kv](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& Y = tp.val(out);
      Tensor& gl = tp.grad(logits);
      for (int r = 0; r < n; ++r) {
        double dot = 0.0;
        for (int c = 0; c <= r; ++c) dot += g.at(r, c) * Y.at(r, c);
        for (int c = 0; c <= r; ++c) {
          const double y = Y.at(r, c);
          if (y == 0.0 && !kv.empty()) continue;  // key-masked entry
          gl.at(r, c) += y * (g.at(r, c) - dot);
        }
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId softmax_rows(Tape& t, VarId a) {
  const Tensor& A = t.val(a);
  require(A.rank() == 2, "softmax_rows expects a matrix");
  const int n = A.rows(), m = A.cols();
  Tensor C({n, m});
  for (int r = 0; r < n; ++r) {
    double mx = A.at(r, 0);
    for (int c = 1; c < m; ++c) mx = std::max(mx, A.at(r, c));
    double denom = 0.0;
    for (int c = 0; c < m; ++c) denom += std::exp(A.at(r, c) - mx);
    for (int c = 0; c < m; ++c) C.at(r, c) = std::exp(A.at(r, c) - mx) / denom;
  }
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out, n, m](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& Y = tp.val(out);
      Tensor& ga = tp.grad(a);
      for (int r = 0; r < n; ++r) {
        double dot = 0.0;
        for (int c = 0; c < m; ++c) dot += g.at(r, c) * Y.at(r, c);
        for (int c = 0; c < m; ++c) ga.at(r, c) += Y.at(r, c) * (g.at(r, c) - dot);
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId slice_cols(Tape& t, VarId a, int c0, int c1) {
  const Tensor& A = t.val(a);
  require(A.rank() == 2, "slice_cols expects a matrix");
  require(c0 >= 0 && c1 > c0 && c1 <= A.cols(), "slice_cols range out of bounds");
  const int r = A.rows(), w = c1 - c0;
  Tensor C({r, w});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < w; ++j) C.at(i, j) = A.at(i, c0 + j);
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out, r, w, c0](Tape& tp) {
      const Tensor& g = tp.grad(out);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j) ga.at(i, c0 + j) += g.at(i, j);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId concat_cols(Tape& t, const std::vector<VarId>& parts) {
  require(!parts.empty(), "concat_cols needs at least one part");
  const int r = t.val(parts[0]).rows();
  int total = 0;
  bool track = false;
  for (VarId p : parts) {
    const Tensor& P = t.val(p);
    require(P.rank() == 2 && P.rows() == r, "concat_cols row mismatch");
    total += P.cols();
    track = track || t.tracked(p);
  }
  Tensor C({r, total});
  int off = 0;
  for (VarId p : parts) {
    const Tensor& P = t.val(p);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < P.cols(); ++j) C.at(i, off + j) = P.at(i, j);
    off += P.cols();
  }
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    std::vector<VarId> ps = parts;
    back = [ps, out, r](Tape& tp) {
      const Tensor& g = tp.grad(out);
      int off2 = 0;
      for (VarId p : ps) {
        const int w = tp.val(p).cols();
        if (tp.tracked(p)) {
          Tensor& gp = tp.grad(p);
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j) gp.at(i, j) += g.at(i, off2 + j);
        }
        off2 += w;
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId reshape(Tape& t, VarId a, std::vector<int> shape) {
  const Tensor& A = t.val(a);
  Tensor C(std::move(shape), A.values());
  const bool track = t.tracked(a);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    back = [a, out](Tape& tp) {
      const Tensor& g = tp.grad(out);
      Tensor& ga = tp.grad(a);
      for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId row_gather_log(Tape& t, VarId probs, const std::vector<int>& labels) {
  const Tensor& P = t.val(probs);
  require(P.rank() == 2, "row_gather_log expects [n x m] probabilities");
  const int n = P.rows(), m = P.cols();
  require(static_cast<int>(labels.size()) == n, "labels length must match rows");
  Tensor C({n});
  for (int r = 0; r < n; ++r) {
    const int l = labels[static_cast<size_t>(r)];
    if (l < 0) continue;  // padded step, stays 0 and is masked downstream
    require(l < m, "label " + std::to_string(l) + " out of range for " + std::to_string(m));
    C[r] = std::log(std::max(P.at(r, l), kProbFloor));
  }
  const bool track = t.tracked(probs);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    std::vector<int> ls = labels;
    back = [probs, out, n, ls](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& P2 = tp.val(probs);
      Tensor& gp = tp.grad(probs);
      for (int r = 0; r < n; ++r) {
        const int l = ls[static_cast<size_t>(r)];
        if (l < 0) continue;
        const double p = P2.at(r, l);
        if (p > kProbFloor) gp.at(r, l) += g[r] / p;
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId bce_terms(Tape& t, VarId preds, const std::vector<double>& labels) {
  const Tensor& P = t.val(preds);
  require(P.rank() == 1, "bce_terms expects a vector");
  const int n = P.dim(0);
  require(static_cast<int>(labels.size()) == n, "labels length must match predictions");
  Tensor C({n});
  for (int i = 0; i < n; ++i) {
    const double p = P[i], y = labels[static_cast<size_t>(i)];
    C[i] = -(y * std::log(std::max(p, kProbFloor)) + (1.0 - y) * std::log(std::max(1.0 - p, kProbFloor)));
  }
  const bool track = t.tracked(preds);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    std::vector<double> ys = labels;
    back = [preds, out, n, ys](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& P2 = tp.val(preds);
      Tensor& gp = tp.grad(preds);
      for (int i = 0; i < n; ++i) {
        const double p = P2[i], y = ys[static_cast<size_t>(i)];
        double d = 0.0;
        if (p > kProbFloor) d -= y / p;
        if (1.0 - p > kProbFloor) d += (1.0 - y) / (1.0 - p);
        gp[i] += g[i] * d;
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId squared_error_terms(Tape& t, VarId preds, const std::vector<double>& labels) {
  const Tensor& P = t.val(preds);
  require(P.rank() == 1, "squared_error_terms expects a vector");
  const int n = P.dim(0);
  require(static_cast<int>(labels.size()) == n, "labels length must match predictions");
  Tensor C({n});
  for (int i = 0; i < n; ++i) {
    const double d = P[i] - labels[static_cast<size_t>(i)];
    C[i] = d * d;
  }
  const bool track = t.tracked(preds);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    std::vector<double> ys = labels;
    back = [preds, out, n, ys](Tape& tp) {
      const Tensor& g = tp.grad(out);
      const Tensor& P2 = tp.val(preds);
      Tensor& gp = tp.grad(preds);
      for (int i = 0; i < n; ++i) gp[i] += g[i] * 2.0 * (P2[i] - ys[static_cast<size_t>(i)]);
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

VarId masked_sum(Tape& t, VarId vec, const std::vector<std::uint8_t>& mask) {
  const Tensor& V = t.val(vec);
  require(V.rank() == 1, "masked_sum expects a vector");
  const int n = V.dim(0);
  require(static_cast<int>(mask.size()) == n, "mask length must match vector");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[static_cast<size_t>(i)]) acc += V[i];
  }
  Tensor C({1});
  C[0] = acc;
  const bool track = t.tracked(vec);
  const VarId out = static_cast<VarId>(t.node_count());
  std::function<void(Tape&)> back;
  if (track) {
    std::vector<std::uint8_t> ms = mask;
    back = [vec, out, n, ms](Tape& tp) {
      const double g0 = tp.grad(out)[0];
      Tensor& gv = tp.grad(vec);
      for (int i = 0; i < n; ++i) {
        if (ms[static_cast<size_t>(i)]) gv[i] += g0;
      }
    };
  }
  return t.emplace(std::move(C), track, std::move(back));
}

}  // namespace mtorl::num
