#include "hssc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hssc {

const char* precision_name(Precision p) {
  return p == Precision::Float32 ? "float32" : "float64";
}

Precision precision_from_name(const std::string& name) {
  if (name == "float32") return Precision::Float32;
  if (name == "float64") return Precision::Float64;
  throw std::invalid_argument("unknown precision '" + name + "' (expected float32 or float64)");
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

std::size_t checked_numel(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 2)
    throw std::invalid_argument("tensor rank must be 1 or 2, got shape " + shape_str(shape));
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("non-positive dimension in shape " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto d = std::make_shared<detail::TensorData>();
  std::size_t n = checked_numel(shape);
  d->shape = std::move(shape);
  d->v.assign(n, 0.0);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.d_->v.begin(), t.d_->v.end(), value);
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
  std::size_t n = checked_numel(shape);
  if (values.size() != n)
    throw std::invalid_argument("value count " + std::to_string(values.size()) +
                                " does not fill shape " + shape_str(shape));
  auto d = std::make_shared<detail::TensorData>();
  d->shape = std::move(shape);
  d->v = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::uniform(std::vector<int> shape, double lo, double hi, std::mt19937_64& rng,
                       bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& x : t.d_->v) x = dist(rng);
  return t;
}

double Tensor::scalar_value() const {
  if (numel() != 1)
    throw std::invalid_argument("scalar_value on tensor of shape " + shape_str(shape()));
  return d_->v[0];
}

std::span<const double> Tensor::grad() const {
  d_->ensure_grad();
  return d_->g;
}

std::span<double> Tensor::mutable_grad() {
  d_->ensure_grad();
  return d_->g;
}

void Tensor::round_to(Precision p) {
  if (p != Precision::Float32) return;
  for (double& x : d_->v) x = static_cast<double>(static_cast<float>(x));
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::make(std::vector<int> shape, bool requires_grad) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad && recording_);
  touch(t);
  return t;
}

void Graph::touch(const Tensor& t) {
  if (!recording_ || !t.d_) return;
  if (seen_.insert(t.d_.get()).second) touched_.push_back(t.d_);
}

void Graph::record(const Tensor& out, std::function<void()> backward_fn) {
  if (!recording_ || !out.requires_grad()) return;
  tape_.push_back(std::move(backward_fn));
}

void Graph::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                (loss.defined() ? shape_str(loss.shape()) : std::string("<none>")));
  if (!recording_) throw std::logic_error("backward called on a non-recording graph");
  for (auto& td : touched_)
    if (td->requires_grad) td->zero_grad();
  if (!loss.requires_grad()) return;  // loss independent of any parameter
  loss.d_->ensure_grad();
  loss.d_->g[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
}

// ---------------------------------------------------------------------------
// matmul

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  const bool a_vec = a.rank() == 1;
  const bool b_vec = b.rank() == 1;
  const int m = a_vec ? 1 : a.dim(0);
  const int k = a_vec ? a.dim(0) : a.dim(1);
  const int kb = b_vec ? b.dim(0) : b.dim(0);
  const int n = b_vec ? 1 : b.dim(1);
  if (k != kb)
    throw std::invalid_argument("matmul: inner dimensions differ: " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));

  std::vector<int> out_shape;
  if (a_vec && b_vec)
    out_shape = {1};
  else if (a_vec)
    out_shape = {n};
  else if (b_vec)
    out_shape = {m};
  else
    out_shape = {m, n};

  touch(a);
  touch(b);
  Tensor out = make(std::move(out_shape), grad_needed(a, b));
  const double* av = a.d_->v.data();
  const double* bv = b.d_->v.data();
  double* ov = out.d_->v.data();
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double aik = av[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = bv + static_cast<std::size_t>(kk) * n;
      double* orow = ov + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  if (precision_ == Precision::Float32)
    for (int i = 0; i < m * n; ++i) ov[i] = q(ov[i]);

  record(out, [ad = a.d_, bd = b.d_, od = out.d_, m, k, n, this]() {
    const double* dout = od->g.data();
    if (ad->requires_grad) {
      ad->ensure_grad();
      double* da = ad->g.data();
      const double* bv = bd->v.data();
      // dA = dC * B^T
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          const double* drow = dout + static_cast<std::size_t>(i) * n;
          const double* brow = bv + static_cast<std::size_t>(kk) * n;
          for (int j = 0; j < n; ++j) acc += drow[j] * brow[j];
          da[i * k + kk] = q(da[i * k + kk] + acc);
        }
    }
    if (bd->requires_grad) {
      bd->ensure_grad();
      double* db = bd->g.data();
      const double* av = ad->v.data();
      // dB = A^T * dC
      for (int kk = 0; kk < k; ++kk)
        for (int i = 0; i < m; ++i) {
          const double aik = av[i * k + kk];
          if (aik == 0.0) continue;
          const double* drow = dout + static_cast<std::size_t>(i) * n;
          double* brow = db + static_cast<std::size_t>(kk) * n;
          for (int j = 0; j < n; ++j) brow[j] = q(brow[j] + aik * drow[j]);
        }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// elementwise

namespace {
void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": operand shapes differ: " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}
}  // namespace

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  touch(a);
  touch(b);
  Tensor out = make(a.shape(), grad_needed(a, b));
  const std::size_t n = a.numel();
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = q(a.d_->v[i] + b.d_->v[i]);
  record(out, [ad = a.d_, bd = b.d_, od = out.d_, n, this]() {
    if (ad->requires_grad) {
      ad->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ad->g[i] = q(ad->g[i] + od->g[i]);
    }
    if (bd->requires_grad) {
      bd->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bd->g[i] = q(bd->g[i] + od->g[i]);
    }
  });
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  touch(a);
  touch(b);
  Tensor out = make(a.shape(), grad_needed(a, b));
  const std::size_t n = a.numel();
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = q(a.d_->v[i] * b.d_->v[i]);
  record(out, [ad = a.d_, bd = b.d_, od = out.d_, n, this]() {
    if (ad->requires_grad) {
      ad->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ad->g[i] = q(ad->g[i] + od->g[i] * bd->v[i]);
    }
    if (bd->requires_grad) {
      bd->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bd->g[i] = q(bd->g[i] + od->g[i] * ad->v[i]);
    }
  });
  return out;
}

Tensor Graph::scale(const Tensor& a, double c) {
  touch(a);
  Tensor out = make(a.shape(), grad_needed(a));
  const std::size_t n = a.numel();
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = q(a.d_->v[i] * c);
  record(out, [ad = a.d_, od = out.d_, n, c, this]() {
    if (!ad->requires_grad) return;
    ad->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) ad->g[i] = q(ad->g[i] + od->g[i] * c);
  });
  return out;
}

Tensor Graph::tanh(const Tensor& x) {
  touch(x);
  Tensor out = make(x.shape(), grad_needed(x));
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = q(std::tanh(x.d_->v[i]));
  record(out, [xd = x.d_, od = out.d_, n, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double y = od->v[i];
      xd->g[i] = q(xd->g[i] + od->g[i] * (1.0 - y * y));
    }
  });
  return out;
}

Tensor Graph::sigmoid(const Tensor& x) {
  touch(x);
  Tensor out = make(x.shape(), grad_needed(x));
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.d_->v[i];
    // branch keeps exp() argument non-positive for either sign
    const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    out.d_->v[i] = q(s);
  }
  record(out, [xd = x.d_, od = out.d_, n, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double y = od->v[i];
      xd->g[i] = q(xd->g[i] + od->g[i] * y * (1.0 - y));
    }
  });
  return out;
}

Tensor Graph::relu(const Tensor& x) {
  touch(x);
  Tensor out = make(x.shape(), grad_needed(x));
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = x.d_->v[i] > 0.0 ? x.d_->v[i] : 0.0;
  record(out, [xd = x.d_, od = out.d_, n, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      if (xd->v[i] > 0.0) xd->g[i] = q(xd->g[i] + od->g[i]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// softmax / cross entropy

Tensor Graph::softmax(const Tensor& x) {
  if (x.rank() != 1)
    throw std::invalid_argument("softmax expects a rank-1 tensor, got " + shape_str(x.shape()));
  touch(x);
  const std::size_t n = x.numel();
  Tensor out = make(x.shape(), grad_needed(x));
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x.d_->v[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.d_->v[i] = std::exp(x.d_->v[i] - mx);
    z += out.d_->v[i];
  }
  for (std::size_t i = 0; i < n; ++i) out.d_->v[i] = q(out.d_->v[i] / z);
  record(out, [xd = x.d_, od = out.d_, n, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += od->g[i] * od->v[i];
    for (std::size_t i = 0; i < n; ++i)
      xd->g[i] = q(xd->g[i] + od->v[i] * (od->g[i] - dot));
  });
  return out;
}

Tensor Graph::cross_entropy(const Tensor& logits, int target) {
  if (logits.rank() != 1)
    throw std::invalid_argument("cross_entropy expects rank-1 logits, got " +
                                shape_str(logits.shape()));
  const int n = logits.dim(0);
  if (target < 0 || target >= n)
    throw std::out_of_range("cross_entropy target " + std::to_string(target) +
                            " out of range for " + std::to_string(n) + " classes");
  touch(logits);
  Tensor out = make({1}, grad_needed(logits));
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, logits.d_->v[static_cast<std::size_t>(i)]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(logits.d_->v[static_cast<std::size_t>(i)] - mx);
  const double lse = mx + std::log(z);
  out.d_->v[0] = q(std::max(0.0, lse - logits.d_->v[static_cast<std::size_t>(target)]));
  record(out, [xd = logits.d_, od = out.d_, n, target, mx, z, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    const double dy = od->g[0];
    for (int i = 0; i < n; ++i) {
      const double p = std::exp(xd->v[static_cast<std::size_t>(i)] - mx) / z;
      const double delta = i == target ? 1.0 : 0.0;
      xd->g[static_cast<std::size_t>(i)] =
          q(xd->g[static_cast<std::size_t>(i)] + dy * (p - delta));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// sequence ops

Tensor Graph::concat_seq(const std::vector<Tensor>& columns) {
  if (columns.empty()) throw std::invalid_argument("concat_seq: no input vectors");
  const int d = columns.front().rank() == 1
                    ? columns.front().dim(0)
                    : throw std::invalid_argument("concat_seq expects rank-1 inputs");
  bool needs = false;
  for (const auto& c : columns) {
    if (c.rank() != 1 || c.dim(0) != d)
      throw std::invalid_argument("concat_seq: input shape " + shape_str(c.shape()) +
                                  " does not match first input [" + std::to_string(d) + "]");
    touch(c);
    needs = needs || c.requires_grad();
  }
  const int n = static_cast<int>(columns.size());
  Tensor out = make({d, n}, recording_ && needs);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < d; ++r)
      out.d_->v[static_cast<std::size_t>(r) * n + i] = columns[static_cast<std::size_t>(i)].d_->v[static_cast<std::size_t>(r)];
  std::vector<std::shared_ptr<detail::TensorData>> srcs;
  srcs.reserve(columns.size());
  for (const auto& c : columns) srcs.push_back(c.d_);
  record(out, [srcs = std::move(srcs), od = out.d_, d, n, this]() {
    for (int i = 0; i < n; ++i) {
      auto& sd = srcs[static_cast<std::size_t>(i)];
      if (!sd->requires_grad) continue;
      sd->ensure_grad();
      for (int r = 0; r < d; ++r)
        sd->g[static_cast<std::size_t>(r)] =
            q(sd->g[static_cast<std::size_t>(r)] + od->g[static_cast<std::size_t>(r) * n + i]);
    }
  });
  return out;
}

Tensor Graph::maxpool_seq(const Tensor& x) {
  if (x.rank() != 2)
    throw std::invalid_argument("maxpool_seq expects a [d x n] matrix, got " +
                                shape_str(x.shape()));
  const int d = x.dim(0);
  const int n = x.dim(1);
  touch(x);
  Tensor out = make({d}, grad_needed(x));
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(d), 0);
  for (int r = 0; r < d; ++r) {
    const double* rowv = x.d_->v.data() + static_cast<std::size_t>(r) * n;
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (rowv[i] > rowv[best]) best = i;  // strict: first max wins ties
    (*argmax)[static_cast<std::size_t>(r)] = best;
    out.d_->v[static_cast<std::size_t>(r)] = rowv[best];
  }
  record(out, [xd = x.d_, od = out.d_, argmax, n, d, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (int r = 0; r < d; ++r) {
      const std::size_t idx =
          static_cast<std::size_t>(r) * n + (*argmax)[static_cast<std::size_t>(r)];
      xd->g[idx] = q(xd->g[idx] + od->g[static_cast<std::size_t>(r)]);
    }
  });
  return out;
}

Tensor Graph::sum(const Tensor& x) {
  touch(x);
  Tensor out = make({1}, grad_needed(x));
  double acc = 0.0;
  for (double v : x.d_->v) acc += v;
  out.d_->v[0] = q(acc);
  record(out, [xd = x.d_, od = out.d_, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (std::size_t i = 0; i < xd->g.size(); ++i) xd->g[i] = q(xd->g[i] + od->g[0]);
  });
  return out;
}

Tensor Graph::slice(const Tensor& x, int offset, int len) {
  if (x.rank() != 1)
    throw std::invalid_argument("slice expects a rank-1 tensor, got " + shape_str(x.shape()));
  if (offset < 0 || len <= 0 || offset + len > x.dim(0))
    throw std::invalid_argument("slice [" + std::to_string(offset) + ", " +
                                std::to_string(offset + len) + ") out of range for " +
                                shape_str(x.shape()));
  touch(x);
  Tensor out = make({len}, grad_needed(x));
  for (int i = 0; i < len; ++i)
    out.d_->v[static_cast<std::size_t>(i)] = x.d_->v[static_cast<std::size_t>(offset + i)];
  record(out, [xd = x.d_, od = out.d_, offset, len, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (int i = 0; i < len; ++i) {
      const std::size_t j = static_cast<std::size_t>(offset + i);
      xd->g[j] = q(xd->g[j] + od->g[static_cast<std::size_t>(i)]);
    }
  });
  return out;
}

Tensor Graph::row(const Tensor& matrix, int r) {
  if (matrix.rank() != 2)
    throw std::invalid_argument("row expects a rank-2 tensor, got " + shape_str(matrix.shape()));
  const int rows = matrix.dim(0);
  const int cols = matrix.dim(1);
  if (r < 0 || r >= rows)
    throw std::out_of_range("row " + std::to_string(r) + " out of range for " +
                            shape_str(matrix.shape()));
  touch(matrix);
  Tensor out = make({cols}, grad_needed(matrix));
  const std::size_t base = static_cast<std::size_t>(r) * cols;
  for (int c = 0; c < cols; ++c) out.d_->v[static_cast<std::size_t>(c)] = matrix.d_->v[base + c];
  record(out, [md = matrix.d_, od = out.d_, base, cols, this]() {
    if (!md->requires_grad) return;
    md->ensure_grad();
    for (int c = 0; c < cols; ++c)
      md->g[base + c] = q(md->g[base + c] + od->g[static_cast<std::size_t>(c)]);
  });
  return out;
}

Tensor Graph::dropout(const Tensor& x, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("dropout rate must be in [0, 1), got " + std::to_string(p));
  if (p == 0.0) return x;
  touch(x);
  const std::size_t n = x.numel();
  Tensor out = make(x.shape(), grad_needed(x));
  auto mask = std::make_shared<std::vector<double>>(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i) {
    if (u(rng) >= p) (*mask)[i] = keep_scale;
    out.d_->v[i] = q(x.d_->v[i] * (*mask)[i]);
  }
  record(out, [xd = x.d_, od = out.d_, mask, n, this]() {
    if (!xd->requires_grad) return;
    xd->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) xd->g[i] = q(xd->g[i] + od->g[i] * (*mask)[i]);
  });
  return out;
}

}  // namespace hssc
