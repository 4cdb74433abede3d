#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "xmotion/errors.hpp"

namespace xmotion {

class Tape;

// Dense row-major tensor of 64-bit floats. Values are immutable after
// construction; copies share storage. A tensor produced while a tape is
// active carries a handle (tape pointer + node index) so later ops keep
// recording on the same tape.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data);
  static Tensor scalar(double value);
  static Tensor identity(int n);

  bool defined() const { return storage_ != nullptr; }
  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const { return storage_ ? static_cast<int>(storage_->size()) : 0; }

  // Rank-2 accessors; rank-1 tensors count as a single row.
  int rows() const;
  int cols() const;

  double at(int i) const;
  double at(int i, int j) const;
  const double* data() const { return storage_->data(); }
  std::vector<double> to_vector() const { return *storage_; }

  Tape* tape() const { return tape_; }
  int node() const { return node_; }

 private:
  friend class Tape;
  std::shared_ptr<const std::vector<double>> storage_;
  std::vector<int> shape_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Records differentiable ops in execution order (define-by-run) and replays
// them in exact reverse order on backward(). Single-threaded: one tape per
// training step. Leaves accumulate (sum) gradients over all their uses.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers `value` as a leaf and returns a tracked handle to it.
  Tensor watch(const Tensor& value, std::string name = "");

  // Seeds d(loss)/d(loss) = 1 and walks the op record backwards.
  // `loss` must be a scalar recorded on this tape.
  void backward(const Tensor& loss);

  // Gradient of the last backward() w.r.t. a tracked tensor (usually a
  // leaf). All-zeros if the tensor did not contribute to the loss.
  Tensor grad(const Tensor& tracked) const;

  const std::vector<std::pair<std::string, int>>& leaves() const { return leaves_; }

  // --- used by op implementations ---
  // backward_fn(tape, self) reads grad_buffer(self) and accumulates into the
  // op's input nodes.
  Tensor record(Tensor value, std::function<void(Tape&, int)> backward_fn);
  void accumulate(int node, const double* values, int n);
  const std::vector<double>& grad_buffer(int node) const { return grads_[node]; }
  bool has_grad(int node) const;

 private:
  struct Node {
    Tensor value;
    std::function<void(Tape&, int)> backward_fn;  // empty for leaves
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  std::vector<std::pair<std::string, int>> leaves_;  // (name, node index)
};

// --- differentiable ops ---
// Each op computes eagerly, validates that the result is finite, and records
// itself when an argument is tracked on a tape. Binary elementwise ops accept
// equal shapes or a size-1 operand broadcast against the other side.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor softmax(const Tensor& a, int axis);
Tensor sum(const Tensor& a);  // -> shape {1}
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor transpose(const Tensor& a);
// rows `begin` (inclusive) .. `end` (exclusive) of a rank-2 tensor
Tensor slice_rows(const Tensor& a, int begin, int end);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& parts);
// m: r x c, v: c entries added to every row
Tensor add_rowvec(const Tensor& m, const Tensor& v);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued function of one tensor.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps);

}  // namespace xmotion
