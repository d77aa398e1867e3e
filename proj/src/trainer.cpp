#include "leq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "leq/ops.hpp"
#include "leq/parallel.hpp"
#include "leq/rng.hpp"

namespace leq::train {

namespace {

using nlohmann::ordered_json;

ordered_json rejection_json(const Rejection& r) {
  ordered_json j;
  j["value"] = r.infinite ? ordered_json(nullptr) : ordered_json(r.value);
  j["infinite"] = r.infinite;
  return j;
}

}  // namespace

EvalResult evaluate(const LorentzEqgnn& model,
                    const std::vector<data::JetGraph>& graphs,
                    const std::vector<int>& indices) {
  EvalResult res;
  const std::size_t n = indices.size();
  res.scores.resize(n);
  res.labels.resize(n);
  std::vector<double> losses(n);
  std::vector<int> preds(n);
  parallel_for(n, [&](std::size_t i) {
    const data::JetGraph& jet = graphs[static_cast<std::size_t>(indices[i])];
    diff::Tape tape;
    const auto out = model.forward(tape, jet, /*training=*/false, 0);
    res.scores[i] = out.probs[1];
    res.labels[i] = jet.label;
    preds[i] = out.probs[1] > out.probs[0] ? 1 : 0;
    losses[i] = -std::log(std::max(out.probs[static_cast<std::size_t>(jet.label)],
                                   1e-300));
  });
  double correct = 0.0, loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i] == res.labels[i]) correct += 1.0;
    loss_sum += losses[i];
  }
  res.accuracy = n ? correct / static_cast<double>(n) : 0.0;
  res.loss = n ? loss_sum / static_cast<double>(n) : 0.0;
  res.auc = roc_auc(res.scores, res.labels);
  res.rej03 = background_rejection(res.scores, res.labels, 0.3);
  res.rej05 = background_rejection(res.scores, res.labels, 0.5);
  return res;
}

TrainResult train_single(LorentzEqgnn& model,
                         const std::vector<data::JetGraph>& graphs,
                         const std::vector<int>& train_idx,
                         const std::vector<int>& val_idx,
                         const std::vector<int>& test_idx,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train_idx.empty() || val_idx.empty()) {
    throw std::invalid_argument("train: empty training or validation split");
  }
  const std::size_t n_params = model.count_params();
  AdamW opt(n_params);
  TrainResult result;
  double best_acc = -1.0;

  std::vector<int> order = train_idx;
  std::vector<double> master = model.flat_params();
  const ModelConfig model_cfg = model.config();

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, "epoch_shuffle",
                                static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bsz = end - begin;

      // per-jet gradients on model clones, merged in jet order
      std::vector<std::vector<double>> grads(bsz);
      std::vector<double> losses(bsz, 0.0);
      const std::uint64_t step_seed = derive_seed(cfg.seed, "dropout", step);
      parallel_for(bsz, [&](std::size_t b) {
        LorentzEqgnn worker(model_cfg, 0);
        worker.set_flat_params(master);
        const data::JetGraph& jet =
            graphs[static_cast<std::size_t>(order[begin + b])];
        diff::Tape tape;
        const auto out = worker.forward(
            tape, jet, /*training=*/true,
            derive_seed(step_seed, "jet", static_cast<std::uint64_t>(order[begin + b])));
        auto [loss, probs] = diff::softmax_xent(tape, out.logits, {jet.label});
        tape.backward(loss);
        losses[b] = loss.values()[0];
        grads[b] = worker.flat_grads();
      });

      std::vector<double> grad(n_params, 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < bsz; ++b) {
        for (std::size_t i = 0; i < n_params; ++i) grad[i] += grads[b][i];
        batch_loss += losses[b];
      }
      const double inv = 1.0 / static_cast<double>(bsz);
      for (double& g : grad) g *= inv;
      batch_loss *= inv;

      opt.step(master, grad, lr, cfg.weight_decay);
      epoch_loss += batch_loss;
      ++epoch_batches;
      ++step;
    }
    model.set_flat_params(master);
    result.train_loss.push_back(epoch_batches ? epoch_loss / epoch_batches : 0.0);

    const EvalResult val = evaluate(model, graphs, val_idx);
    result.val_accuracy.push_back(val.accuracy);
    const double select_acc =
        cfg.select_on_test && !test_idx.empty()
            ? evaluate(model, graphs, test_idx).accuracy
            : val.accuracy;
    if (select_acc > best_acc) {
      best_acc = select_acc;
      result.best_epoch = epoch;
      result.best_params = master;
    }
  }

  model.set_flat_params(result.best_params);
  const std::vector<int>& final_idx = test_idx.empty() ? val_idx : test_idx;
  result.test = evaluate(model, graphs, final_idx);
  return result;
}

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels,
                                               const std::vector<int>& pool,
                                               int folds, std::uint64_t seed) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  std::vector<int> classes;
  for (const int i : pool) {
    if (std::find(classes.begin(), classes.end(), labels[i]) == classes.end()) {
      classes.push_back(labels[i]);
    }
  }
  std::sort(classes.begin(), classes.end());
  for (const int cls : classes) {
    std::vector<int> idx;
    for (const int i : pool) {
      if (labels[i] == cls) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, "fold_split", static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[k % static_cast<std::size_t>(folds)].push_back(idx[k]);
    }
  }
  return out;
}

MetricsReport run_kfold(const ModelFactory& factory,
                        const std::vector<data::JetGraph>& dataset,
                        const std::vector<int>& pool_idx,
                        const std::vector<int>& test_idx, const TrainConfig& cfg,
                        const std::string& config_digest,
                        const FoldObserver& on_fold) {
  cfg.validate();
  std::vector<int> labels(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset[i].label;
  const auto folds = stratified_folds(labels, pool_idx, cfg.folds, cfg.seed);

  MetricsReport report;
  report.config_digest = config_digest;
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<int> train_idx;
    for (int g = 0; g < cfg.folds; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    const std::vector<int>& val_idx = folds[static_cast<std::size_t>(f)];
    if (train_idx.empty()) {
      // single-fold case: train and validate on the same pool
      train_idx = val_idx;
    }
    LorentzEqgnn model =
        factory(derive_seed(cfg.seed, "fold", static_cast<std::uint64_t>(f)));
    TrainResult tr;
    try {
      tr = train_single(model, dataset, train_idx, val_idx, test_idx, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(f) + ": " + e.what());
    }
    FoldResult fr;
    fr.fold = f;
    fr.epoch_best = tr.best_epoch;
    fr.accuracy = tr.test.accuracy;
    fr.auc = tr.test.auc;
    fr.loss = tr.test.loss;
    fr.rej03 = tr.test.rej03;
    fr.rej05 = tr.test.rej05;
    fr.scores = tr.test.scores;
    fr.labels = tr.test.labels;
    report.folds.push_back(fr);
    if (on_fold) on_fold(f, model);
  }
  return report;
}

std::string MetricsReport::to_json() const {
  ordered_json j;
  j["config_digest"] = config_digest;
  j["folds"] = ordered_json::array();
  for (const auto& f : folds) {
    ordered_json jf;
    jf["fold"] = f.fold;
    jf["epoch_best"] = f.epoch_best;
    jf["accuracy"] = f.accuracy;
    jf["auc"] = f.auc;
    jf["loss"] = f.loss;
    jf["rej03"] = rejection_json(f.rej03);
    jf["rej05"] = rejection_json(f.rej05);
    j["folds"].push_back(jf);
  }
  auto stats = [&](auto getter) {
    double mean = 0.0, sd = 0.0;
    for (const auto& f : folds) mean += getter(f);
    mean /= folds.empty() ? 1.0 : static_cast<double>(folds.size());
    for (const auto& f : folds) {
      const double d = getter(f) - mean;
      sd += d * d;
    }
    sd = folds.size() > 1 ? std::sqrt(sd / static_cast<double>(folds.size() - 1))
                          : 0.0;
    return std::make_pair(mean, sd);
  };
  const auto [acc_m, acc_s] = stats([](const FoldResult& f) { return f.accuracy; });
  const auto [auc_m, auc_s] = stats([](const FoldResult& f) { return f.auc; });
  const auto [loss_m, loss_s] = stats([](const FoldResult& f) { return f.loss; });
  bool rej03_inf = false, rej05_inf = false;
  for (const auto& f : folds) {
    rej03_inf = rej03_inf || f.rej03.infinite;
    rej05_inf = rej05_inf || f.rej05.infinite;
  }
  const auto [r3_m, r3_s] = stats([](const FoldResult& f) {
    return f.rej03.infinite ? 0.0 : f.rej03.value;
  });
  const auto [r5_m, r5_s] = stats([](const FoldResult& f) {
    return f.rej05.infinite ? 0.0 : f.rej05.value;
  });
  ordered_json mean, sd;
  mean["accuracy"] = acc_m;
  sd["accuracy"] = acc_s;
  mean["auc"] = auc_m;
  sd["auc"] = auc_s;
  mean["loss"] = loss_m;
  sd["loss"] = loss_s;
  mean["rej03"] = rej03_inf ? ordered_json(nullptr) : ordered_json(r3_m);
  sd["rej03"] = rej03_inf ? ordered_json(nullptr) : ordered_json(r3_s);
  mean["rej05"] = rej05_inf ? ordered_json(nullptr) : ordered_json(r5_m);
  sd["rej05"] = rej05_inf ? ordered_json(nullptr) : ordered_json(r5_s);
  j["mean"] = mean;
  j["std"] = sd;
  return j.dump(2);
}

std::string digest_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace leq::train
