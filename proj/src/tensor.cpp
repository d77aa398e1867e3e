#include "leq/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace leq::diff {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (const std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data,
               bool requires_grad) {
  if (shape_product(shape) != data.size()) {
    std::ostringstream os;
    os << "tensor: shape product " << shape_product(shape)
       << " != data length " << data.size();
    throw std::invalid_argument(os.str());
  }
  rec_ = std::make_shared<detail::TensorRec>();
  rec_->shape = std::move(shape);
  rec_->value = std::move(data);
  rec_->requires_grad = requires_grad;
  if (requires_grad) rec_->grad.assign(rec_->value.size(), 0.0);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::vector<double> data(shape_product(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

std::size_t Tensor::rows() const {
  return rec_->shape.size() >= 2 ? rec_->shape[0] : 1;
}

std::size_t Tensor::cols() const {
  return rec_->shape.empty() ? 1 : rec_->shape.back();
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return rec_->value[r * cols() + c];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return rec_->value[r * cols() + c];
}

std::vector<double>& Tensor::grad() {
  if (rec_->grad.empty()) {
    throw std::logic_error("tensor: gradient storage not allocated");
  }
  return rec_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (rec_->grad.empty()) {
    throw std::logic_error("tensor: gradient storage not allocated");
  }
  return rec_->grad;
}

void Tensor::ensure_grad() {
  if (rec_->grad.empty()) rec_->grad.assign(rec_->value.size(), 0.0);
}

void Tensor::zero_grad() {
  if (!rec_->grad.empty()) rec_->grad.assign(rec_->value.size(), 0.0);
}

Tensor Tensor::detached() const {
  return Tensor(rec_->shape, rec_->value, false);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < rec_->shape.size(); ++i) {
    if (i) os << "x";
    os << rec_->shape[i];
  }
  os << "]";
  return os.str();
}

void Tensor::check_finite(const char* context) const {
  for (const double v : rec_->value) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(context) +
                               ": non-finite value in tensor");
    }
  }
}

Tensor Tape::track(Tensor out, std::initializer_list<const Tensor*> inputs,
                   std::function<void()> backward) {
  bool any_tracked = false;
  for (const Tensor* in : inputs) {
    if (in->defined() && in->tracked()) {
      any_tracked = true;
      break;
    }
  }
  if (any_tracked) {
    out.ensure_grad();
    nodes_.push_back(std::move(backward));
  }
  return out;
}

Tensor Tape::track_many(Tensor out, const std::vector<Tensor>& inputs,
                        std::function<void()> backward) {
  bool any_tracked = false;
  for (const Tensor& in : inputs) {
    if (in.defined() && in.tracked()) {
      any_tracked = true;
      break;
    }
  }
  if (any_tracked) {
    out.ensure_grad();
    nodes_.push_back(std::move(backward));
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("tape: backward requires a scalar loss");
  }
  if (!loss.tracked()) {
    throw std::invalid_argument("tape: loss is not connected to the tape");
  }
  const_cast<Tensor&>(loss).grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

}  // namespace leq::diff
