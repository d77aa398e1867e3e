#pragma once

#include <functional>
#include <string>
#include <vector>

#include "leq/data.hpp"
#include "leq/metrics.hpp"
#include "leq/model.hpp"
#include "leq/optimizer.hpp"

namespace leq::train {

struct EvalResult {
  double accuracy = 0.0;
  double auc = 0.0;
  double loss = 0.0;
  Rejection rej03;
  Rejection rej05;
  std::vector<double> scores;  // class-1 probability per sample
  std::vector<int> labels;
};

/// Eval-mode metrics over the graphs selected by `indices`. Forward passes run
/// in parallel; score order follows `indices`, so results are
/// scheduling-independent.
EvalResult evaluate(const LorentzEqgnn& model,
                    const std::vector<data::JetGraph>& graphs,
                    const std::vector<int>& indices);

struct TrainResult {
  int best_epoch = 0;
  std::vector<double> best_params;
  EvalResult test;                  // metrics of the selected checkpoint
  std::vector<double> val_accuracy;  // per epoch
  std::vector<double> train_loss;    // per epoch mean batch loss
};

/// Trains in place for cfg.epochs epochs with AdamW and the warmup+cosine
/// schedule, evaluating after every epoch; keeps the parameters of the epoch
/// with the highest validation accuracy (earliest on ties) and reports that
/// checkpoint's test metrics. The model is left at the selected checkpoint.
TrainResult train_single(LorentzEqgnn& model,
                         const std::vector<data::JetGraph>& graphs,
                         const std::vector<int>& train_idx,
                         const std::vector<int>& val_idx,
                         const std::vector<int>& test_idx,
                         const TrainConfig& cfg);

struct FoldResult {
  int fold = 0;
  int epoch_best = 0;
  double accuracy = 0.0;
  double auc = 0.0;
  double loss = 0.0;
  Rejection rej03;
  Rejection rej05;
  // carried for optional ROC emission; not serialized into the report JSON
  std::vector<double> scores;
  std::vector<int> labels;
};

struct MetricsReport {
  std::string config_digest;
  std::vector<FoldResult> folds;
  std::string to_json() const;  // {config_digest, folds, mean, std}
};

using ModelFactory = std::function<LorentzEqgnn(std::uint64_t seed)>;

/// Deterministic stratified folds: fold f is the validation set, the rest
/// train. When `test_idx` is empty each fold's validation set doubles as its
/// test set.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels,
                                               const std::vector<int>& pool,
                                               int folds, std::uint64_t seed);

using FoldObserver = std::function<void(int fold, const LorentzEqgnn& best)>;

MetricsReport run_kfold(const ModelFactory& factory,
                        const std::vector<data::JetGraph>& dataset,
                        const std::vector<int>& pool_idx,
                        const std::vector<int>& test_idx, const TrainConfig& cfg,
                        const std::string& config_digest,
                        const FoldObserver& on_fold = {});

/// FNV-1a hex digest used to stamp reports and manifests.
std::string digest_hex(const std::string& text);

}  // namespace leq::train
