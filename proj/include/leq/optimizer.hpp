#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leq::train {

struct TrainConfig {
  double lr_peak = 1e-3;
  int warmup_epochs = 5;
  int epochs = 50;
  int t0 = 4;
  int t_mult = 2;
  double weight_decay = 0.01;
  int batch_size = 16;
  int folds = 5;
  std::uint64_t seed = 0;
  /// Selects the best epoch on test metrics instead of validation.
  bool select_on_test = false;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json_text(const std::string& text);
};

/// Epoch learning rate: linear warmup to lr_peak, then cosine annealing with
/// warm restarts (cycle lengths t0, t0*t_mult, ...), lr_min = 0.
double lr_at(int epoch, const TrainConfig& cfg);

/// Decoupled-decay Adam on flat parameter vectors.
class AdamW {
 public:
  AdamW(std::size_t n_params, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8);

  /// theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * weight_decay * theta,
  /// with bias-corrected moments. Throws on size mismatch.
  void step(std::span<double> params, std::span<const double> grads, double lr,
            double weight_decay);

  int t() const { return t_; }

 private:
  std::vector<double> m_, v_;
  double beta1_, beta2_, eps_;
  int t_ = 0;
};

}  // namespace leq::train
