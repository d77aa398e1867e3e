#include "leq/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace leq::train {

void TrainConfig::validate() const {
  if (!(lr_peak > 0.0)) throw std::invalid_argument("train: lr_peak must be > 0");
  if (warmup_epochs < 0) {
    throw std::invalid_argument("train: warmup_epochs must be >= 0");
  }
  if (epochs <= warmup_epochs) {
    throw std::invalid_argument("train: epochs must exceed warmup_epochs");
  }
  if (t0 < 1 || t_mult < 1) {
    throw std::invalid_argument("train: t0 and t_mult must be >= 1");
  }
  if (weight_decay < 0.0) {
    throw std::invalid_argument("train: weight_decay must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (folds < 1) throw std::invalid_argument("train: folds must be >= 1");
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr_peak"] = lr_peak;
  j["warmup_epochs"] = warmup_epochs;
  j["epochs"] = epochs;
  j["t0"] = t0;
  j["t_mult"] = t_mult;
  j["weight_decay"] = weight_decay;
  j["batch_size"] = batch_size;
  j["folds"] = folds;
  j["seed"] = seed;
  j["select_on_test"] = select_on_test;
  return j.dump();
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TrainConfig cfg;
  static const char* known[] = {"lr_peak", "warmup_epochs", "epochs",
                                "t0", "t_mult", "weight_decay",
                                "batch_size", "folds", "seed", "select_on_test"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) ok = true;
    }
    if (!ok) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  if (j.contains("lr_peak")) cfg.lr_peak = j["lr_peak"].get<double>();
  if (j.contains("warmup_epochs")) cfg.warmup_epochs = j["warmup_epochs"].get<int>();
  if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
  if (j.contains("t0")) cfg.t0 = j["t0"].get<int>();
  if (j.contains("t_mult")) cfg.t_mult = j["t_mult"].get<int>();
  if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
  if (j.contains("folds")) cfg.folds = j["folds"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("select_on_test")) cfg.select_on_test = j["select_on_test"].get<bool>();
  cfg.validate();
  return cfg;
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::out_of_range("lr_at: epoch outside [0, epochs)");
  }
  if (epoch < cfg.warmup_epochs) {
    return cfg.lr_peak * static_cast<double>(epoch + 1) /
           static_cast<double>(cfg.warmup_epochs);
  }
  int t = epoch - cfg.warmup_epochs;  // position past warmup
  int cycle_len = cfg.t0;
  while (t >= cycle_len) {
    t -= cycle_len;
    cycle_len *= cfg.t_mult;
  }
  constexpr double kPi = 3.14159265358979323846;
  const double frac = static_cast<double>(t) / static_cast<double>(cycle_len);
  return cfg.lr_peak * 0.5 * (1.0 + std::cos(kPi * frac));
}

AdamW::AdamW(std::size_t n_params, double beta1, double beta2, double eps)
    : m_(n_params, 0.0), v_(n_params, 0.0), beta1_(beta1), beta2_(beta2),
      eps_(eps) {}

void AdamW::step(std::span<double> params, std::span<const double> grads,
                 double lr, double weight_decay) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("adamw: parameter/gradient size mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    // both terms act on the pre-step value
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_) +
                 lr * weight_decay * params[i];
  }
}

}  // namespace leq::train
