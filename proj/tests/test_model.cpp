#include <stdexcept>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "leq/model.hpp"
#include "leq/ops.hpp"
#include "leq/rng.hpp"
#include "leq/verify.hpp"
#include "oracles.hpp"

using namespace leq;
using diff::Tape;

namespace {

data::JetGraph make_jet(std::uint64_t seed, int n) {
  return verify::random_graph_corpus(seed, 1, n, n)[0];
}

data::JetGraph boost_jet(const data::JetGraph& jet, const LorentzTransform& t) {
  data::JetGraph out = jet;
  for (auto& p : out.momenta) p = t.apply(p);
  return out;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("config validation") {
  ModelConfig cfg;
  cfg.validate();
  cfg.n_hidden = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelConfig::from_json_text("{\"bogus\": 1}"),
                  std::invalid_argument);
}

TEST_CASE("input embedding") {
  const ModelConfig cfg;
  const LorentzEqgnn model(cfg, 7);
  data::JetGraph jet = make_jet(1, 5);
  Tape tape;
  const BlockState s = model.embed_inputs(tape, jet);

  // raw momenta pass through bit-exactly
  for (std::size_t i = 0; i < jet.n_nodes(); ++i) {
    CHECK(s.x.at(i, 0) == jet.momenta[i].e);
    CHECK(s.x.at(i, 1) == jet.momenta[i].px);
    CHECK(s.x.at(i, 2) == jet.momenta[i].py);
    CHECK(s.x.at(i, 3) == jet.momenta[i].pz);
  }

  // massless particles embed the zero scalar: h rows equal the bias row
  data::JetGraph massless = jet;
  for (auto& p : massless.momenta) {
    const double norm = std::sqrt(p.px * p.px + p.py * p.py + p.pz * p.pz);
    p.e = norm;
  }
  Tape tape2;
  const BlockState sm = model.embed_inputs(tape2, massless);
  for (std::size_t i = 1; i < massless.n_nodes(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(sm.h.at(i, c) == doctest::Approx(sm.h.at(0, c)).epsilon(1e-12));
    }
  }

  // boosting leaves h^0 unchanged (mass invariance)
  const data::JetGraph bj = boost_jet(jet, random_lorentz(3, 2.0));
  Tape tape3;
  const BlockState sb = model.embed_inputs(tape3, bj);
  for (std::size_t i = 0; i < jet.n_nodes(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(std::fabs(sb.h.at(i, c) - s.h.at(i, c)) < 1e-9);
    }
  }

  data::JetGraph tiny;
  tiny.momenta = {FourVector{1, 0, 0, 0}};
  CHECK_THROWS_AS(model.embed_inputs(tape, tiny), std::invalid_argument);
}

TEST_CASE("eval forward is deterministic and produces a distribution") {
  const LorentzEqgnn model(ModelConfig{}, 11);
  const data::JetGraph jet = make_jet(5, 8);
  Tape t1, t2;
  const auto a = model.forward(t1, jet, false, 0);
  const auto b = model.forward(t2, jet, false, 0);
  CHECK(a.logits.values() == b.logits.values());
  CHECK(a.probs[0] == b.probs[0]);
  CHECK(a.probs[0] > 0.0);
  CHECK(a.probs[1] > 0.0);
  CHECK(std::fabs(a.probs[0] + a.probs[1] - 1.0) < 1e-12);
}

TEST_CASE("logits are invariant under boosts and permutations") {
  const LorentzEqgnn model(ModelConfig{}, 13);
  const data::JetGraph jet = make_jet(9, 10);
  Tape tape;
  const auto base = model.forward(tape, jet, false, 0);

  for (std::uint64_t t = 0; t < 20; ++t) {
    const data::JetGraph bj = boost_jet(jet, random_lorentz(40 + t, 2.0));
    Tape tape2;
    const auto moved = model.forward(tape2, bj, false, 0);
    const double scale = std::max(
        {std::fabs(base.logits.values()[0]), std::fabs(base.logits.values()[1]), 1e-12});
    CHECK(std::fabs(moved.logits.values()[0] - base.logits.values()[0]) / scale < 1e-6);
    CHECK(std::fabs(moved.logits.values()[1] - base.logits.values()[1]) / scale < 1e-6);
  }

  Rng rng(55);
  data::JetGraph shuffled = jet;
  std::vector<int> perm(jet.n_nodes());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  rng.shuffle(perm);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.momenta[i] = jet.momenta[static_cast<std::size_t>(perm[i])];
  }
  Tape tape3;
  const auto moved = model.forward(tape3, shuffled, false, 0);
  CHECK(std::fabs(moved.logits.values()[0] - base.logits.values()[0]) < 1e-9);
  CHECK(std::fabs(moved.logits.values()[1] - base.logits.values()[1]) < 1e-9);
}

TEST_CASE("parameter accounting") {
  const LorentzEqgnn model(ModelConfig{}, 17);
  // default shapes: embed 1*4+4, block 44+36+4*8+5+4, decoder 20+10
  const std::size_t embed = 1 * 4 + 4;
  const std::size_t block = (10 * 4 + 4) + (8 * 4 + 4) + 4 * (2 * 4) + (4 + 1) + 4;
  const std::size_t decoder = (4 * 4 + 4) + (4 * 2 + 2);
  CHECK(model.count_params() == embed + block + decoder);
  CHECK(model.count_params() == 159);

  for (const auto& p : model.parameters()) {
    if (p.name.find("phi_") != std::string::npos &&
        p.name.find("weights") != std::string::npos) {
      CHECK(p.tensor.size() == 8);  // q_depth * n_qubits
    }
  }

  ModelConfig two;
  two.n_layers = 2;
  const LorentzEqgnn deeper(two, 17);
  CHECK(deeper.count_params() == embed + 2 * block + decoder);
}

TEST_CASE("loss gradients match finite differences on a 5-node jet") {
  ModelConfig cfg;
  cfg.n_layers = 2;  // exercises the coordinate chain into the next block
  const data::JetGraph jet = make_jet(21, 5);
  LorentzEqgnn model(cfg, 23);

  auto loss_at = [&](std::span<const double> params) {
    LorentzEqgnn probe(cfg, 0);
    probe.set_flat_params(params);
    Tape tape;
    const auto out = probe.forward(tape, jet, false, 0);
    auto [loss, probs] = diff::softmax_xent(tape, out.logits, {jet.label});
    return loss.values()[0];
  };

  model.zero_grads();
  Tape tape;
  const auto out = model.forward(tape, jet, false, 0);
  auto [loss, probs] = diff::softmax_xent(tape, out.logits, {jet.label});
  tape.backward(loss);
  const auto analytic = model.flat_grads();
  std::vector<double> params = model.flat_params();

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    const double h = 1e-5;
    params[i] = orig + h;
    const double fp = loss_at(params);
    params[i] = orig - h;
    const double fm = loss_at(params);
    params[i] = orig;
    const double fd = (fp - fm) / (2 * h);
    const double rel = std::fabs(analytic[i] - fd) / std::max(std::fabs(fd), 1e-6);
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("checkpoint round trip is byte-stable") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(LEQ_TEST_TMP) / "model";
  fs::create_directories(dir);
  const LorentzEqgnn model(ModelConfig{}, 29);
  const std::string text = checkpoint_json(model);
  const LorentzEqgnn loaded = checkpoint_from_json(text);
  CHECK(checkpoint_json(loaded) == text);
  CHECK(loaded.flat_params() == model.flat_params());

  const fs::path path = dir / "ck.json";
  save_checkpoint(model, path.string());
  const LorentzEqgnn from_disk = load_checkpoint(path.string());
  CHECK(from_disk.flat_params() == model.flat_params());

  CHECK_THROWS_AS(checkpoint_from_json("{\"format_version\": 2}"),
                  std::runtime_error);
}

TEST_CASE("coordinate-decoding fixture breaks Lorentz invariance") {
  ModelConfig cfg;
  cfg.decode_coordinates = true;
  const LorentzEqgnn model(cfg, 31);
  const data::JetGraph jet = make_jet(33, 8);
  Tape tape;
  const auto base = model.forward(tape, jet, false, 0);
  const data::JetGraph bj = boost_jet(jet, random_lorentz(99, 2.0));
  Tape tape2;
  const auto moved = model.forward(tape2, bj, false, 0);
  const double dev =
      std::max(std::fabs(moved.logits.values()[0] - base.logits.values()[0]),
               std::fabs(moved.logits.values()[1] - base.logits.values()[1]));
  CHECK(dev > 1e-6);
}

}  // TEST_SUITE
