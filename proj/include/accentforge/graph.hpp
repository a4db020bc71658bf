// Copyright (c) 2026 AccentForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "accentforge/common.hpp"

namespace accentforge {
namespace nn {

// Define-by-run reverse-mode autodiff over dense double matrices.
// Activation matrices are laid out channels-by-frames (one column per time
// step). Values are computed eagerly at op construction; Backward() runs the
// recorded closures in reverse topological order.
struct Node {
  Mat value;
  Mat grad;  // empty until Backward touches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
};

using NodePtr = std::shared_ptr<Node>;

inline NodePtr Constant(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

inline NodePtr Scalar(double v) { return Constant(Mat::Constant(1, 1, v)); }

inline NodePtr Param(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

inline void Accum(Node& n, const Mat& g) {
  if (!n.requires_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

inline NodePtr MakeNode(Mat value, std::vector<NodePtr> parents,
                        std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad |= p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

inline double ScalarValue(const NodePtr& n) {
  if (n->value.rows() != 1 || n->value.cols() != 1) ThrowInternal("ScalarValue: node is not 1x1");
  return n->value(0, 0);
}

// Runs reverse-mode accumulation from a scalar root. Gradients of every node
// reachable from the root are reset first; leaf gradients remain available
// until the next Backward or optimizer step over them.
inline void Backward(const NodePtr& root) {
  if (root->value.rows() != 1 || root->value.cols() != 1)
    ThrowInternal("Backward: root must be a 1x1 scalar");

  std::vector<Node*> order;  // post-order: dependencies before dependents
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (next_child < node->parents.size()) {
      Node* parent = node->parents[next_child++].get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->grad = Mat();
  root->grad = Mat::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->grad.size() == 0) continue;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

// ------------------------------- elementwise -------------------------------

inline NodePtr Add(NodePtr a, NodePtr b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    ThrowInternal("Add: shape mismatch");
  Mat v = a->value + b->value;
  return MakeNode(std::move(v), {a, b}, [a, b](Node& n) {
    Accum(*a, n.grad);
    Accum(*b, n.grad);
  });
}

inline NodePtr Sub(NodePtr a, NodePtr b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    ThrowInternal("Sub: shape mismatch");
  Mat v = a->value - b->value;
  return MakeNode(std::move(v), {a, b}, [a, b](Node& n) {
    Accum(*a, n.grad);
    Accum(*b, Mat(-n.grad));
  });
}

inline NodePtr Mul(NodePtr a, NodePtr b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    ThrowInternal("Mul: shape mismatch");
  Mat v = a->value.cwiseProduct(b->value);
  return MakeNode(std::move(v), {a, b}, [a, b](Node& n) {
    Accum(*a, n.grad.cwiseProduct(b->value));
    Accum(*b, n.grad.cwiseProduct(a->value));
  });
}

inline NodePtr Neg(NodePtr a) {
  Mat v = -a->value;
  return MakeNode(std::move(v), {a}, [a](Node& n) { Accum(*a, Mat(-n.grad)); });
}

inline NodePtr MulScalar(NodePtr a, double s) {
  Mat v = a->value * s;
  return MakeNode(std::move(v), {a}, [a, s](Node& n) { Accum(*a, Mat(n.grad * s)); });
}

inline NodePtr AddScalar(NodePtr a, double s) {
  Mat v = a->value.array() + s;
  return MakeNode(std::move(v), {a}, [a](Node& n) { Accum(*a, n.grad); });
}

// Broadcasts a column vector (C x 1) across every column of a (C x T).
inline NodePtr AddColVec(NodePtr a, NodePtr v) {
  if (v->value.cols() != 1 || v->value.rows() != a->value.rows())
    ThrowInternal("AddColVec: v must be C x 1 matching a's rows");
  Mat out = a->value.colwise() + Eigen::VectorXd(v->value.col(0));
  return MakeNode(std::move(out), {a, v}, [a, v](Node& n) {
    Accum(*a, n.grad);
    Accum(*v, Mat(n.grad.rowwise().sum()));
  });
}

inline NodePtr MulColVecConst(NodePtr a, const Vec& w) {
  if (w.size() != a->value.rows()) ThrowInternal("MulColVecConst: length mismatch");
  Mat out = a->value.array().colwise() * w.array();
  Vec wc = w;
  return MakeNode(std::move(out), {a}, [a, wc](Node& n) {
    Accum(*a, Mat(n.grad.array().colwise() * wc.array()));
  });
}

inline NodePtr Tanh(NodePtr a) {
  Mat v = a->value.array().tanh();
  Mat vc = v;
  return MakeNode(std::move(v), {a}, [a, vc](Node& n) {
    Accum(*a, Mat(n.grad.array() * (1.0 - vc.array().square())));
  });
}

inline NodePtr Sigmoid(NodePtr a) {
  Mat v = (1.0 / (1.0 + (-a->value.array()).exp()));
  Mat vc = v;
  return MakeNode(std::move(v), {a}, [a, vc](Node& n) {
    Accum(*a, Mat(n.grad.array() * vc.array() * (1.0 - vc.array())));
  });
}

inline NodePtr Relu(NodePtr a) {
  Mat v = a->value.cwiseMax(0.0);
  return MakeNode(std::move(v), {a}, [a](Node& n) {
    Accum(*a, Mat((a->value.array() > 0.0).cast<double>() * n.grad.array()));
  });
}

inline NodePtr LeakyRelu(NodePtr a, double slope = 0.1) {
  Mat v = a->value.cwiseMax(a->value * slope);
  return MakeNode(std::move(v), {a}, [a, slope](Node& n) {
    Mat mask = (a->value.array() > 0.0).cast<double>();
    Accum(*a, Mat(n.grad.array() * (mask.array() + (1.0 - mask.array()) * slope)));
  });
}

inline NodePtr Exp(NodePtr a) {
  Mat v = a->value.array().exp();
  Mat vc = v;
  return MakeNode(std::move(v), {a}, [a, vc](Node& n) {
    Accum(*a, Mat(n.grad.array() * vc.array()));
  });
}

inline NodePtr Log(NodePtr a) {
  Mat v = a->value.array().log();
  return MakeNode(std::move(v), {a}, [a](Node& n) {
    Accum(*a, Mat(n.grad.array() / a->value.array()));
  });
}

inline NodePtr Abs(NodePtr a) {
  Mat v = a->value.array().abs();
  return MakeNode(std::move(v), {a}, [a](Node& n) {
    Accum(*a, Mat(n.grad.array() * a->value.array().sign()));
  });
}

inline NodePtr Square(NodePtr a) {
  Mat v = a->value.array().square();
  return MakeNode(std::move(v), {a}, [a](Node& n) {
    Accum(*a, Mat(n.grad.array() * 2.0 * a->value.array()));
  });
}

inline NodePtr Sqrt(NodePtr a) {
  Mat v = a->value.array().sqrt();
  Mat vc = v;
  return MakeNode(std::move(v), {a}, [a, vc](Node& n) {
    Accum(*a, Mat(n.grad.array() * 0.5 / vc.array().max(1e-300)));
  });
}

// Hard clamp; gradient passes through strictly inside the range.
inline NodePtr Clamp(NodePtr a, double lo, double hi) {
  Mat v = a->value.cwiseMax(lo).cwiseMin(hi);
  return MakeNode(std::move(v), {a}, [a, lo, hi](Node& n) {
    Mat mask = ((a->value.array() > lo) && (a->value.array() < hi)).cast<double>();
    Accum(*a, Mat(n.grad.array() * mask.array()));
  });
}

inline NodePtr ClampMin(NodePtr a, double lo) {
  Mat v = a->value.cwiseMax(lo);
  return MakeNode(std::move(v), {a}, [a, lo](Node& n) {
    Accum(*a, Mat(n.grad.array() * (a->value.array() > lo).cast<double>()));
  });
}

inline NodePtr Detach(const NodePtr& a) { return Constant(a->value); }

// ------------------------------- structural --------------------------------

inline NodePtr Matmul(NodePtr a, NodePtr b) {
  if (a->value.cols() != b->value.rows()) ThrowInternal("Matmul: inner dimension mismatch");
  Mat v = a->value * b->value;
  return MakeNode(std::move(v), {a, b}, [a, b](Node& n) {
    Accum(*a, Mat(n.grad * b->value.transpose()));
    Accum(*b, Mat(a->value.transpose() * n.grad));
  });
}

inline NodePtr SliceCols(NodePtr a, int c0, int len) {
  if (c0 < 0 || c0 + len > a->value.cols()) ThrowInternal("SliceCols: out of range");
  Mat v = a->value.middleCols(c0, len);
  return MakeNode(std::move(v), {a}, [a, c0, len](Node& n) {
    if (!a->requires_grad) return;
    Mat g = Mat::Zero(a->value.rows(), a->value.cols());
    g.middleCols(c0, len) = n.grad;
    Accum(*a, g);
  });
}

inline NodePtr SliceRows(NodePtr a, int r0, int len) {
  if (r0 < 0 || r0 + len > a->value.rows()) ThrowInternal("SliceRows: out of range");
  Mat v = a->value.middleRows(r0, len);
  return MakeNode(std::move(v), {a}, [a, r0, len](Node& n) {
    if (!a->requires_grad) return;
    Mat g = Mat::Zero(a->value.rows(), a->value.cols());
    g.middleRows(r0, len) = n.grad;
    Accum(*a, g);
  });
}

inline NodePtr ConcatRows(NodePtr a, NodePtr b) {
  if (a->value.cols() != b->value.cols()) ThrowInternal("ConcatRows: column mismatch");
  Mat v(a->value.rows() + b->value.rows(), a->value.cols());
  v << a->value, b->value;
  auto ra = a->value.rows();
  return MakeNode(std::move(v), {a, b}, [a, b, ra](Node& n) {
    Accum(*a, Mat(n.grad.topRows(ra)));
    Accum(*b, Mat(n.grad.bottomRows(n.grad.rows() - ra)));
  });
}

// Column gather: out.col(t) = a.col(idx[t]). Backs both embedding lookup and
// alignment-driven upsampling.
inline NodePtr GatherCols(NodePtr a, std::vector<int> idx) {
  Mat v(a->value.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] < 0 || idx[t] >= a->value.cols()) ThrowInternal("GatherCols: index out of range");
    v.col(static_cast<Eigen::Index>(t)) = a->value.col(idx[t]);
  }
  return MakeNode(std::move(v), {a}, [a, idx = std::move(idx)](Node& n) {
    if (!a->requires_grad) return;
    Mat g = Mat::Zero(a->value.rows(), a->value.cols());
    for (size_t t = 0; t < idx.size(); ++t)
      g.col(idx[t]) += n.grad.col(static_cast<Eigen::Index>(t));
    Accum(*a, g);
  });
}

inline NodePtr SumAll(NodePtr a) {
  Mat v = Mat::Constant(1, 1, a->value.sum());
  return MakeNode(std::move(v), {a}, [a](Node& n) {
    Accum(*a, Mat(Mat::Constant(a->value.rows(), a->value.cols(), n.grad(0, 0))));
  });
}

inline NodePtr MeanAll(NodePtr a) {
  double inv = 1.0 / static_cast<double>(a->value.size());
  Mat v = Mat::Constant(1, 1, a->value.sum() * inv);
  return MakeNode(std::move(v), {a}, [a, inv](Node& n) {
    Accum(*a, Mat(Mat::Constant(a->value.rows(), a->value.cols(), n.grad(0, 0) * inv)));
  });
}

// Mean over columns -> C x 1.
inline NodePtr ColMean(NodePtr a) {
  double inv = 1.0 / static_cast<double>(a->value.cols());
  Mat v = a->value.rowwise().mean();
  return MakeNode(std::move(v), {a}, [a, inv](Node& n) {
    Accum(*a, Mat((n.grad * inv).replicate(1, a->value.cols())));
  });
}

inline NodePtr L2NormalizeCol(NodePtr a) {
  if (a->value.cols() != 1) ThrowInternal("L2NormalizeCol: expected a column vector");
  double norm = a->value.norm();
  if (norm < 1e-12) ThrowInternal("L2NormalizeCol: zero vector");
  Mat v = a->value / norm;
  Mat vc = v;
  return MakeNode(std::move(v), {a}, [a, vc, norm](Node& n) {
    Mat g = (n.grad - vc * (vc.transpose() * n.grad)(0, 0)) / norm;
    Accum(*a, g);
  });
}

// ------------------------------ convolutions -------------------------------

inline int ConvOutLength(int t, int k, int stride, int pad, int dilation) {
  int span = dilation * (k - 1) + 1;
  return (t + 2 * pad - span) / stride + 1;
}

inline Mat Im2Col(const Mat& x, int k, int stride, int pad, int dilation) {
  int cin = static_cast<int>(x.rows());
  int t_in = static_cast<int>(x.cols());
  int t_out = ConvOutLength(t_in, k, stride, pad, dilation);
  if (t_out <= 0) ThrowInternal("Im2Col: non-positive output length");
  Mat col = Mat::Zero(static_cast<Eigen::Index>(cin) * k, t_out);
  for (int t = 0; t < t_out; ++t) {
    for (int j = 0; j < k; ++j) {
      int src = t * stride + j * dilation - pad;
      if (src < 0 || src >= t_in) continue;
      col.block(static_cast<Eigen::Index>(j) * cin, t, cin, 1) = x.col(src);
    }
  }
  return col;
}

inline Mat Col2Im(const Mat& col, int cin, int t_in, int k, int stride, int pad, int dilation) {
  Mat x = Mat::Zero(cin, t_in);
  int t_out = static_cast<int>(col.cols());
  for (int t = 0; t < t_out; ++t) {
    for (int j = 0; j < k; ++j) {
      int dst = t * stride + j * dilation - pad;
      if (dst < 0 || dst >= t_in) continue;
      x.col(dst) += col.block(static_cast<Eigen::Index>(j) * cin, t, cin, 1);
    }
  }
  return x;
}

// 1-D convolution over the time axis. W is (Cout x Cin*K) with kernel taps
// laid out tap-major (tap j occupies rows/cols [j*Cin, (j+1)*Cin)); b is
// (Cout x 1).
inline NodePtr Conv1d(NodePtr x, NodePtr w, NodePtr b, int k, int stride = 1, int pad = 0,
                      int dilation = 1) {
  int cin = static_cast<int>(x->value.rows());
  if (w->value.cols() != static_cast<Eigen::Index>(cin) * k)
    ThrowInternal("Conv1d: weight shape mismatch");
  Mat col = Im2Col(x->value, k, stride, pad, dilation);
  Mat v = w->value * col;
  v.colwise() += Eigen::VectorXd(b->value.col(0));
  auto col_cache = std::make_shared<Mat>(std::move(col));
  return MakeNode(std::move(v), {x, w, b},
                  [x, w, b, col_cache, k, stride, pad, dilation, cin](Node& n) {
                    Accum(*w, Mat(n.grad * col_cache->transpose()));
                    Accum(*b, Mat(n.grad.rowwise().sum()));
                    if (x->requires_grad) {
                      Mat dcol = w->value.transpose() * n.grad;
                      Accum(*x, Col2Im(dcol, cin, static_cast<int>(x->value.cols()), k, stride,
                                       pad, dilation));
                    }
                  });
}

// Transposed 1-D convolution (fractionally strided). W is (Cout*K x Cin);
// output length is (T-1)*stride + k - 2*pad.
inline NodePtr ConvTranspose1d(NodePtr x, NodePtr w, NodePtr b, int cout, int k, int stride,
                               int pad) {
  int t_in = static_cast<int>(x->value.cols());
  if (w->value.rows() != static_cast<Eigen::Index>(cout) * k ||
      w->value.cols() != x->value.rows())
    ThrowInternal("ConvTranspose1d: weight shape mismatch");
  int t_out = (t_in - 1) * stride + k - 2 * pad;
  if (t_out <= 0) ThrowInternal("ConvTranspose1d: non-positive output length");
  Mat tmp = w->value * x->value;  // (Cout*K) x T_in
  Mat v = Col2Im(tmp, cout, t_out, k, stride, pad, 1);
  v.colwise() += Eigen::VectorXd(b->value.col(0));
  return MakeNode(std::move(v), {x, w, b}, [x, w, b, cout, k, stride, pad](Node& n) {
    Mat dtmp = Im2Col(n.grad, k, stride, pad, 1);  // (Cout*K) x T_in
    Accum(*w, Mat(dtmp * x->value.transpose()));
    Accum(*b, Mat(n.grad.rowwise().sum()));
    if (x->requires_grad) Accum(*x, Mat(w->value.transpose() * dtmp));
  });
}

// Strided windowing of a 1 x N signal into a (win x T) frame matrix; the
// differentiable front half of the mel-spectrogram path.
inline NodePtr Frames(NodePtr x, int win, int hop) {
  if (x->value.rows() != 1) ThrowInternal("Frames: expected a 1 x N signal");
  int n = static_cast<int>(x->value.cols());
  int t_out = n / hop;
  if (t_out <= 0) ThrowInternal("Frames: signal shorter than one hop");
  Mat v = Mat::Zero(win, t_out);
  for (int t = 0; t < t_out; ++t) {
    int start = t * hop;
    int avail = std::min(win, n - start);
    for (int i = 0; i < avail; ++i) v(i, t) = x->value(0, start + i);
  }
  return MakeNode(std::move(v), {x}, [x, win, hop, n](Node& n_) {
    if (!x->requires_grad) return;
    Mat g = Mat::Zero(1, n);
    int t_out = static_cast<int>(n_.grad.cols());
    for (int t = 0; t < t_out; ++t) {
      int start = t * hop;
      int avail = std::min(win, n - start);
      for (int i = 0; i < avail; ++i) g(0, start + i) += n_.grad(i, t);
    }
    Accum(*x, g);
  });
}

// ------------------------------ loss helpers -------------------------------

inline NodePtr MeanAbsDiff(NodePtr a, NodePtr b) { return MeanAll(Abs(Sub(a, b))); }

inline NodePtr MeanSquare(NodePtr a) { return MeanAll(Square(a)); }

}  // namespace nn
}  // namespace accentforge
