#include "xmotion/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace xmotion {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

int shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("tensor extents must be positive");
    n *= d;
  }
  return n;
}

void check_finite(const std::vector<double>& data, const char* op) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value in result of ") + op);
    }
  }
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string("undefined tensor passed to ") + op);
}

Tape* common_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape() && b.tape() && a.tape() != b.tape()) {
    throw ContractError(std::string("operands of ") + op + " live on different tapes");
  }
  return a.tape() ? a.tape() : b.tape();
}

// Maps a rank-1 or rank-2 tensor plus a softmax axis onto (slices, stride,
// span): iterate `slices` groups of `span` entries `stride` apart.
struct AxisView {
  int slices, span, slice_stride, step;
};

AxisView axis_view(const Tensor& t, int axis) {
  if (t.rank() == 1) {
    if (axis != 0) throw DimensionError("softmax: axis out of range");
    return {1, t.size(), 0, 1};
  }
  if (t.rank() != 2) throw DimensionError("softmax supports rank-1 and rank-2 tensors");
  const int r = t.shape()[0], c = t.shape()[1];
  if (axis == 0) return {c, r, 1, c};  // normalize down each column
  if (axis == 1) return {r, c, c, 1};  // normalize along each row
  throw DimensionError("softmax: axis out of range");
}

}  // namespace

// --- Tensor ---

Tensor Tensor::zeros(std::vector<int> shape) {
  int n = shape_size(shape);
  return from_data(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  int n = shape_size(shape);
  return from_data(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data) {
  int n = shape_size(shape);
  if (n != static_cast<int>(data.size())) {
    throw DimensionError("data length does not match shape product");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.storage_ = std::make_shared<const std::vector<double>>(std::move(data));
  return t;
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

Tensor Tensor::identity(int n) {
  std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) d[static_cast<size_t>(i) * n + i] = 1.0;
  return from_data({n, n}, std::move(d));
}

int Tensor::rows() const {
  if (rank() == 1) return 1;
  if (rank() == 2) return shape_[0];
  throw DimensionError("rows() needs a rank-1 or rank-2 tensor");
}

int Tensor::cols() const {
  if (rank() == 1) return shape_[0];
  if (rank() == 2) return shape_[1];
  throw DimensionError("cols() needs a rank-1 or rank-2 tensor");
}

double Tensor::at(int i) const { return (*storage_)[static_cast<size_t>(i)]; }

double Tensor::at(int i, int j) const {
  return (*storage_)[static_cast<size_t>(i) * cols() + j];
}

// --- Tape ---

Tensor Tape::watch(const Tensor& value, std::string name) {
  require_defined(value, "watch");
  Tensor tracked = value;
  tracked.tape_ = this;
  tracked.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{tracked, {}});
  leaves_.emplace_back(std::move(name), tracked.node_);
  return tracked;
}

Tensor Tape::record(Tensor value, std::function<void(Tape&, int)> backward_fn) {
  value.tape_ = this;
  value.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{value, std::move(backward_fn)});
  return value;
}

void Tape::accumulate(int node, const double* values, int n) {
  if (node < 0) return;  // constant operand
  auto& buf = grads_[static_cast<size_t>(node)];
  if (buf.empty()) buf.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) buf[static_cast<size_t>(i)] += values[i];
}

bool Tape::has_grad(int node) const {
  return node >= 0 && node < static_cast<int>(grads_.size()) &&
         !grads_[static_cast<size_t>(node)].empty();
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape() != this || loss.node() < 0) {
    throw ContractError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) throw ContractError("backward: loss must be scalar");
  grads_.assign(nodes_.size(), {});
  grads_[static_cast<size_t>(loss.node())] = {1.0};
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[static_cast<size_t>(i)].backward_fn && has_grad(i)) {
      nodes_[static_cast<size_t>(i)].backward_fn(*this, i);
    }
  }
}

Tensor Tape::grad(const Tensor& tracked) const {
  if (tracked.tape() != this || tracked.node() < 0) {
    throw ContractError("grad: tensor is not tracked on this tape");
  }
  if (has_grad(tracked.node())) {
    return Tensor::from_data(tracked.shape(), grads_[static_cast<size_t>(tracked.node())]);
  }
  return Tensor::zeros(tracked.shape());
}

// --- ops ---

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul needs rank-2 tensors");
  const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (k != b.shape()[0]) throw DimensionError("matmul inner extents differ");

  std::vector<double> out(static_cast<size_t>(m) * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data(), m, k) * ConstMap(b.data(), k, n);
  check_finite(out, "matmul");

  Tensor result = Tensor::from_data({m, n}, std::move(out));
  Tape* tape = common_tape(a, b, "matmul");
  if (!tape) return result;
  const int an = a.node(), bn = b.node();
  return tape->record(result, [a, b, an, bn, m, k, n](Tape& t, int self) {
    ConstMap g(t.grad_buffer(self).data(), m, n);
    if (an >= 0) {
      std::vector<double> da(static_cast<size_t>(m) * k);
      MutMap(da.data(), m, k).noalias() = g * ConstMap(b.data(), k, n).transpose();
      t.accumulate(an, da.data(), m * k);
    }
    if (bn >= 0) {
      std::vector<double> db(static_cast<size_t>(k) * n);
      MutMap(db.data(), k, n).noalias() = ConstMap(a.data(), m, k).transpose() * g;
      t.accumulate(bn, db.data(), k * n);
    }
  });
}

namespace {

enum class BinOp { Add, Sub, Mul };

Tensor binary_elementwise(const Tensor& a, const Tensor& b, BinOp op, const char* name) {
  require_defined(a, name);
  require_defined(b, name);
  const bool a_scalar = a.size() == 1, b_scalar = b.size() == 1;
  if (!(a.shape() == b.shape() || a_scalar || b_scalar)) {
    throw DimensionError(std::string(name) + ": shapes must match or one side be scalar");
  }
  const Tensor& big = a_scalar && !b_scalar ? b : a;
  const int n = big.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double av = a_scalar ? a.at(0) : a.at(i);
    const double bv = b_scalar ? b.at(0) : b.at(i);
    out[static_cast<size_t>(i)] =
        op == BinOp::Add ? av + bv : (op == BinOp::Sub ? av - bv : av * bv);
  }
  check_finite(out, name);

  Tensor result = Tensor::from_data(big.shape(), std::move(out));
  Tape* tape = common_tape(a, b, name);
  if (!tape) return result;
  const int an = a.node(), bn = b.node();
  return tape->record(result, [a, b, an, bn, op, a_scalar, b_scalar, n](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      if (a_scalar && n > 1) {
        double s = 0;
        for (int i = 0; i < n; ++i) {
          const double bv = b_scalar ? b.at(0) : b.at(i);
          s += op == BinOp::Mul ? g[static_cast<size_t>(i)] * bv : g[static_cast<size_t>(i)];
        }
        t.accumulate(an, &s, 1);
      } else {
        std::vector<double> da(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          const double bv = b_scalar ? b.at(0) : b.at(i);
          da[static_cast<size_t>(i)] =
              op == BinOp::Mul ? g[static_cast<size_t>(i)] * bv : g[static_cast<size_t>(i)];
        }
        t.accumulate(an, da.data(), n);
      }
    }
    if (bn >= 0) {
      const double sign = op == BinOp::Sub ? -1.0 : 1.0;
      if (b_scalar && n > 1) {
        double s = 0;
        for (int i = 0; i < n; ++i) {
          const double av = a_scalar ? a.at(0) : a.at(i);
          s += op == BinOp::Mul ? g[static_cast<size_t>(i)] * av
                                : sign * g[static_cast<size_t>(i)];
        }
        t.accumulate(bn, &s, 1);
      } else {
        std::vector<double> db(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          const double av = a_scalar ? a.at(0) : a.at(i);
          db[static_cast<size_t>(i)] = op == BinOp::Mul
                                           ? g[static_cast<size_t>(i)] * av
                                           : sign * g[static_cast<size_t>(i)];
        }
        t.accumulate(bn, db.data(), n);
      }
    }
  });
}

Tensor unary_elementwise(const Tensor& a, const char* name,
                         const std::function<double(double)>& fwd,
                         const std::function<double(double, double)>& dfdx_of_x_y) {
  require_defined(a, name);
  const int n = a.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = fwd(a.at(i));
  check_finite(out, name);

  Tensor result = Tensor::from_data(a.shape(), std::move(out));
  if (!a.tape()) return result;
  const int an = a.node();
  Tensor y = result;  // shares storage
  return a.tape()->record(result, [a, y, an, n, dfdx_of_x_y](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    std::vector<double> da(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      da[static_cast<size_t>(i)] = g[static_cast<size_t>(i)] * dfdx_of_x_y(a.at(i), y.at(i));
    }
    t.accumulate(an, da.data(), n);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::Mul, "mul"); }

Tensor scale(const Tensor& a, double c) {
  return unary_elementwise(
      a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sqrt(const Tensor& a) {
  // d/dx sqrt clamped near zero so an exact-zero residual cannot emit inf
  return unary_elementwise(
      a, "sqrt", [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / std::max(y, 1e-12); });
}

Tensor softmax(const Tensor& a, int axis) {
  require_defined(a, "softmax");
  const AxisView v = axis_view(a, axis);
  std::vector<double> out(static_cast<size_t>(a.size()));
  for (int s = 0; s < v.slices; ++s) {
    const int base = s * v.slice_stride;
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < v.span; ++i) mx = std::max(mx, a.at(base + i * v.step));
    double denom = 0;
    for (int i = 0; i < v.span; ++i) {
      const double e = std::exp(a.at(base + i * v.step) - mx);
      out[static_cast<size_t>(base + i * v.step)] = e;
      denom += e;
    }
    for (int i = 0; i < v.span; ++i) out[static_cast<size_t>(base + i * v.step)] /= denom;
  }
  check_finite(out, "softmax");

  Tensor result = Tensor::from_data(a.shape(), std::move(out));
  if (!a.tape()) return result;
  const int an = a.node();
  Tensor y = result;
  return a.tape()->record(result, [y, an, v](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    std::vector<double> da(g.size());
    for (int s = 0; s < v.slices; ++s) {
      const int base = s * v.slice_stride;
      double dot = 0;
      for (int i = 0; i < v.span; ++i) {
        const int idx = base + i * v.step;
        dot += g[static_cast<size_t>(idx)] * y.at(idx);
      }
      for (int i = 0; i < v.span; ++i) {
        const int idx = base + i * v.step;
        da[static_cast<size_t>(idx)] = y.at(idx) * (g[static_cast<size_t>(idx)] - dot);
      }
    }
    t.accumulate(an, da.data(), static_cast<int>(da.size()));
  });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double s = 0;
  for (int i = 0; i < a.size(); ++i) s += a.at(i);
  if (!std::isfinite(s)) throw NumericError("non-finite value in result of sum");

  Tensor result = Tensor::scalar(s);
  if (!a.tape()) return result;
  const int an = a.node(), n = a.size();
  return a.tape()->record(result, [an, n](Tape& t, int self) {
    std::vector<double> da(static_cast<size_t>(n), t.grad_buffer(self)[0]);
    t.accumulate(an, da.data(), n);
  });
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  require_defined(a, "reshape");
  if (shape_size(shape) != a.size()) throw DimensionError("reshape changes element count");

  Tensor result = Tensor::from_data(std::move(shape), a.to_vector());
  if (!a.tape()) return result;
  const int an = a.node(), n = a.size();
  return a.tape()->record(result, [an, n](Tape& t, int self) {
    t.accumulate(an, t.grad_buffer(self).data(), n);
  });
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.rank() != 2) throw DimensionError("transpose needs a rank-2 tensor");
  const int r = a.shape()[0], c = a.shape()[1];
  std::vector<double> out(static_cast<size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[static_cast<size_t>(j) * r + i] = a.at(i, j);

  Tensor result = Tensor::from_data({c, r}, std::move(out));
  if (!a.tape()) return result;
  const int an = a.node();
  return a.tape()->record(result, [an, r, c](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);  // c x r
    std::vector<double> da(static_cast<size_t>(r) * c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i)
        da[static_cast<size_t>(i) * c + j] = g[static_cast<size_t>(j) * r + i];
    t.accumulate(an, da.data(), r * c);
  });
}

Tensor slice_rows(const Tensor& a, int begin, int end) {
  require_defined(a, "slice_rows");
  if (a.rank() != 2) throw DimensionError("slice_rows needs a rank-2 tensor");
  const int r = a.shape()[0], c = a.shape()[1];
  if (begin < 0 || end > r || begin >= end) throw ContractError("slice_rows: bad row range");
  const int rr = end - begin;
  std::vector<double> out(a.data() + static_cast<size_t>(begin) * c,
                          a.data() + static_cast<size_t>(end) * c);

  Tensor result = Tensor::from_data({rr, c}, std::move(out));
  if (!a.tape()) return result;
  const int an = a.node();
  return a.tape()->record(result, [an, r, c, begin, rr](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    std::vector<double> da(static_cast<size_t>(r) * c, 0.0);
    std::copy(g.begin(), g.end(), da.begin() + static_cast<size_t>(begin) * c);
    t.accumulate(an, da.data(), r * c);
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_defined(a, "concat_cols");
  require_defined(b, "concat_cols");
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[0] != b.shape()[0]) {
    throw DimensionError("concat_cols needs rank-2 tensors with equal row counts");
  }
  const int r = a.shape()[0], ca = a.shape()[1], cb = b.shape()[1];
  std::vector<double> out(static_cast<size_t>(r) * (ca + cb));
  for (int i = 0; i < r; ++i) {
    std::copy(a.data() + static_cast<size_t>(i) * ca, a.data() + static_cast<size_t>(i + 1) * ca,
              out.begin() + static_cast<size_t>(i) * (ca + cb));
    std::copy(b.data() + static_cast<size_t>(i) * cb, b.data() + static_cast<size_t>(i + 1) * cb,
              out.begin() + static_cast<size_t>(i) * (ca + cb) + ca);
  }

  Tensor result = Tensor::from_data({r, ca + cb}, std::move(out));
  Tape* tape = common_tape(a, b, "concat_cols");
  if (!tape) return result;
  const int an = a.node(), bn = b.node();
  return tape->record(result, [an, bn, r, ca, cb](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      std::vector<double> da(static_cast<size_t>(r) * ca);
      for (int i = 0; i < r; ++i)
        std::copy(g.begin() + static_cast<size_t>(i) * (ca + cb),
                  g.begin() + static_cast<size_t>(i) * (ca + cb) + ca,
                  da.begin() + static_cast<size_t>(i) * ca);
      t.accumulate(an, da.data(), r * ca);
    }
    if (bn >= 0) {
      std::vector<double> db(static_cast<size_t>(r) * cb);
      for (int i = 0; i < r; ++i)
        std::copy(g.begin() + static_cast<size_t>(i) * (ca + cb) + ca,
                  g.begin() + static_cast<size_t>(i + 1) * (ca + cb),
                  db.begin() + static_cast<size_t>(i) * cb);
      t.accumulate(bn, db.data(), r * cb);
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no tensors given");
  const int c = parts[0].cols();
  int r = 0;
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    require_defined(p, "concat_rows");
    if (p.rank() != 2 || p.shape()[1] != c) {
      throw DimensionError("concat_rows needs rank-2 tensors with equal column counts");
    }
    r += p.shape()[0];
    if (p.tape()) {
      if (tape && tape != p.tape()) throw ContractError("concat_rows: mixed tapes");
      tape = p.tape();
    }
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(r) * c);
  for (const Tensor& p : parts) out.insert(out.end(), p.data(), p.data() + p.size());

  Tensor result = Tensor::from_data({r, c}, std::move(out));
  if (!tape) return result;
  std::vector<std::pair<int, int>> spans;  // (node, element count)
  spans.reserve(parts.size());
  for (const Tensor& p : parts) spans.emplace_back(p.tape() ? p.node() : -1, p.size());
  return tape->record(result, [spans](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    size_t offset = 0;
    for (const auto& [node, count] : spans) {
      t.accumulate(node, g.data() + offset, count);
      offset += static_cast<size_t>(count);
    }
  });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  require_defined(m, "add_rowvec");
  require_defined(v, "add_rowvec");
  if (m.rank() != 2) throw DimensionError("add_rowvec: matrix must be rank-2");
  const int r = m.shape()[0], c = m.shape()[1];
  if (v.size() != c || v.rows() != 1) {
    throw DimensionError("add_rowvec: vector length must equal matrix columns");
  }
  std::vector<double> out(static_cast<size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[static_cast<size_t>(i) * c + j] = m.at(i, j) + v.at(j);
  check_finite(out, "add_rowvec");

  Tensor result = Tensor::from_data({r, c}, std::move(out));
  Tape* tape = common_tape(m, v, "add_rowvec");
  if (!tape) return result;
  const int mn = m.node(), vn = v.node();
  return tape->record(result, [mn, vn, r, c](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (mn >= 0) t.accumulate(mn, g.data(), r * c);
    if (vn >= 0) {
      std::vector<double> dv(static_cast<size_t>(c), 0.0);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) dv[static_cast<size_t>(j)] += g[static_cast<size_t>(i) * c + j];
      t.accumulate(vn, dv.data(), c);
    }
  });
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  if (eps <= 0) throw ContractError("grad_check: eps must be positive");
  require_defined(x, "grad_check");

  Tape tape;
  Tensor tracked = tape.watch(x, "grad_check_input");
  Tensor loss = f(tracked);
  if (loss.size() != 1) throw ContractError("grad_check: f must be scalar-valued");
  tape.backward(loss);
  Tensor analytic = tape.grad(tracked);

  const std::vector<double> base = x.to_vector();
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    std::vector<double> hi = base, lo = base;
    hi[static_cast<size_t>(i)] += eps;
    lo[static_cast<size_t>(i)] -= eps;
    const double fp = f(Tensor::from_data(x.shape(), std::move(hi))).at(0);
    const double fm = f(Tensor::from_data(x.shape(), std::move(lo))).at(0);
    const double fd = (fp - fm) / (2.0 * eps);
    const double err = std::abs(analytic.at(i) - fd) / std::max(1.0, std::abs(analytic.at(i)));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace xmotion
