#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace hssc {

/// Numeric mode of a computation. Float64 is used for gradient verification
/// and oracle tests; Float32 is available for training runs. In Float32 mode
/// every op result (and every parameter update) is rounded to the nearest
/// 32-bit float, and checkpoints store 4-byte values.
enum class Precision { Float32, Float64 };

const char* precision_name(Precision p);
Precision precision_from_name(const std::string& name);

namespace detail {

struct TensorData {
  std::vector<int> shape;
  std::vector<double> v;
  std::vector<double> g;  // allocated lazily, same length as v once in use
  bool requires_grad = false;

  std::size_t numel() const { return v.size(); }
  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), 0.0);
  }
  void zero_grad() {
    if (g.size() != v.size())
      g.assign(v.size(), 0.0);
    else
      std::fill(g.begin(), g.end(), 0.0);
  }
};

}  // namespace detail

/// Dense row-major tensor of rank 1 or 2 (scalars are shape {1}). Value
/// semantics over shared storage: copies alias the same buffer, which is what
/// the backward graph relies on for gradient accumulation.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value);
  /// Entries drawn uniformly from [lo, hi].
  static Tensor uniform(std::vector<int> shape, double lo, double hi,
                        std::mt19937_64& rng, bool requires_grad = true);

  bool defined() const { return d_ != nullptr; }
  const std::vector<int>& shape() const { return d_->shape; }
  int rank() const { return static_cast<int>(d_->shape.size()); }
  std::size_t numel() const { return d_->numel(); }
  /// Rows of a rank-2 tensor (or length of a rank-1 tensor).
  int dim(int i) const { return d_->shape.at(static_cast<std::size_t>(i)); }

  std::span<const double> values() const { return d_->v; }
  std::span<double> mutable_values() { return d_->v; }
  double at(int i) const { return d_->v[static_cast<std::size_t>(i)]; }
  double at(int r, int c) const {
    return d_->v[static_cast<std::size_t>(r) * d_->shape[1] + static_cast<std::size_t>(c)];
  }
  double scalar_value() const;

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool b) { d_->requires_grad = b; }
  /// Gradient buffer; allocates zeros on first access for grad-requiring tensors.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad() { d_->zero_grad(); }

  bool shares_storage(const Tensor& other) const { return d_ == other.d_; }

  /// Rounds all stored values to Float32 when p is Float32 (used at init
  /// and by the optimizer so parameters stay representable in the mode).
  void round_to(Precision p);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
  std::shared_ptr<detail::TensorData> d_;
  friend class Graph;
};

std::string shape_str(const std::vector<int>& shape);

/// Define-by-run backward graph. One Graph records one forward pass; ops are
/// methods so every created tensor is registered with the tape that will
/// replay its local gradient rule. A Graph and its tensors are confined to a
/// single thread; independent graphs may run concurrently over shared
/// read-only parameters.
class Graph {
 public:
  explicit Graph(Precision precision = Precision::Float64, bool recording = true)
      : precision_(precision), recording_(recording) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Precision precision() const { return precision_; }
  bool recording() const { return recording_; }
  std::size_t node_count() const { return tape_.size(); }

  // -- ops -----------------------------------------------------------------

  /// [m x k] * [k x n]. Rank-1 operands follow the usual promotion: a vector
  /// on the left is a row, on the right a column, and promoted dims are
  /// dropped from the result ([k]*[k] gives a {1} scalar).
  Tensor matmul(const Tensor& a, const Tensor& b);

  Tensor add(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double c);
  Tensor tanh(const Tensor& x);
  Tensor sigmoid(const Tensor& x);
  Tensor relu(const Tensor& x);

  /// Stable softmax of a rank-1 tensor (max-subtracted).
  Tensor softmax(const Tensor& x);

  /// Concatenates n d-vectors into a [d x n] matrix; column i is input i.
  Tensor concat_seq(const std::vector<Tensor>& columns);

  /// Per-row maximum of a [d x n] matrix. Backward routes each row's gradient
  /// to the first maximal position only.
  Tensor maxpool_seq(const Tensor& x);

  /// -log softmax(logits)[target], computed via log-sum-exp.
  Tensor cross_entropy(const Tensor& logits, int target);

  Tensor sum(const Tensor& x);
  /// Contiguous range [offset, offset+len) of a rank-1 tensor.
  Tensor slice(const Tensor& x, int offset, int len);
  /// Row r of a rank-2 tensor as a vector (embedding lookup).
  Tensor row(const Tensor& matrix, int r);
  /// Inverted dropout: entries kept with probability 1-p are scaled by
  /// 1/(1-p). p = 0 is the identity.
  Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng);

  /// Replays the tape in reverse from a scalar loss. Gradients of every
  /// tensor this graph touched are reset first, so each call computes
  /// d(loss)/d(tensor) from scratch; repeated calls with different losses on
  /// the same graph are valid.
  void backward(const Tensor& loss);

 private:
  double q(double x) const {
    return precision_ == Precision::Float32 ? static_cast<double>(static_cast<float>(x)) : x;
  }
  Tensor make(std::vector<int> shape, bool requires_grad);
  void touch(const Tensor& t);
  void record(const Tensor& out, std::function<void()> backward_fn);
  bool grad_needed(const Tensor& a) const { return recording_ && a.requires_grad(); }
  bool grad_needed(const Tensor& a, const Tensor& b) const {
    return recording_ && (a.requires_grad() || b.requires_grad());
  }

  Precision precision_;
  bool recording_;
  std::vector<std::function<void()>> tape_;
  std::vector<std::shared_ptr<detail::TensorData>> touched_;
  std::unordered_set<const detail::TensorData*> seen_;
};

}  // namespace hssc
