#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace leq::diff {

namespace detail {
struct TensorRec {
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until the tensor joins a gradient path
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major 64-bit tensor with shared-payload handle semantics.
/// Copying a Tensor aliases the same storage; optimizers and tape closures
/// rely on that to see each other's writes.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> data,
         bool requires_grad = false);

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor scalar(double v);
  /// 1 x n row tensor.
  static Tensor row(std::vector<double> v);

  bool defined() const { return rec_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return rec_->shape; }
  std::size_t size() const { return rec_->value.size(); }
  /// First dimension (1 for rank-0/rank-1 scalars).
  std::size_t rows() const;
  /// Last dimension.
  std::size_t cols() const;

  std::vector<double>& values() { return rec_->value; }
  const std::vector<double>& values() const { return rec_->value; }
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  bool requires_grad() const { return rec_->requires_grad; }
  /// True once gradient storage exists (parameter leaf or tape intermediate).
  bool tracked() const { return !rec_->grad.empty(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void ensure_grad();
  void zero_grad();

  /// Value-only copy with no gradient linkage.
  Tensor detached() const;

  bool same_storage(const Tensor& o) const { return rec_ == o.rec_; }

  std::string shape_str() const;

  /// Throws std::runtime_error if any value is NaN/Inf.
  void check_finite(const char* context) const;

 private:
  std::shared_ptr<detail::TensorRec> rec_;
};

/// Reverse-mode tape: operations are appended in execution order, which is a
/// valid topological order by construction; backward replays them in reverse.
/// Single-use per forward pass and confined to one thread.
class Tape {
 public:
  /// Allocates gradient storage for `out` if any input participates in a
  /// gradient path, and registers the reverse closure. Returns `out`.
  Tensor track(Tensor out, std::initializer_list<const Tensor*> inputs,
               std::function<void()> backward);
  Tensor track_many(Tensor out, const std::vector<Tensor>& inputs,
                    std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and runs all closures in reverse order.
  /// Throws std::invalid_argument if loss is not a tracked scalar.
  void backward(const Tensor& loss);

  std::size_t num_nodes() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

}  // namespace leq::diff
