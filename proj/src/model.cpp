#include "leq/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "leq/ops.hpp"
#include "leq/rng.hpp"

namespace leq {

namespace {

using nlohmann::ordered_json;

diff::Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> w(fan_in * fan_out);
  for (double& v : w) v = rng.uniform(-limit, limit);
  return diff::Tensor({fan_in, fan_out}, std::move(w), true);
}

}  // namespace

void ModelConfig::validate() const {
  if (n_layers < 1) throw std::invalid_argument("config: n_layers must be >= 1");
  if (n_hidden != n_qubits) {
    throw std::invalid_argument("config: n_hidden must equal n_qubits");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw std::invalid_argument("config: dropout_p must be in [0, 1)");
  }
  if (n_scalar_in < 1) {
    throw std::invalid_argument("config: n_scalar_in must be >= 1");
  }
  if (!(c > 0.0)) throw std::invalid_argument("config: c must be positive");
  if (q_depth < 1 || q_depth > 8) {
    throw std::invalid_argument("config: q_depth must be in [1, 8]");
  }
  if (n_qubits < 2 || n_qubits > 12) {
    throw std::invalid_argument("config: n_qubits must be in [2, 12]");
  }
}

std::string ModelConfig::to_json() const {
  ordered_json j;
  j["n_layers"] = n_layers;
  j["n_hidden"] = n_hidden;
  j["n_qubits"] = n_qubits;
  j["q_depth"] = q_depth;
  j["c"] = c;
  j["dropout_p"] = dropout_p;
  j["irc_safe"] = irc_safe;
  j["n_scalar_in"] = n_scalar_in;
  j["q_delta"] = q_delta;
  j["decode_coordinates"] = decode_coordinates;
  return j.dump();
}

ModelConfig ModelConfig::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModelConfig cfg;
  static const char* known[] = {"n_layers", "n_hidden", "n_qubits",
                                "q_depth", "c", "dropout_p", "irc_safe",
                                "n_scalar_in", "q_delta", "decode_coordinates"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) ok = true;
    }
    if (!ok) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  if (j.contains("n_layers")) cfg.n_layers = j["n_layers"].get<int>();
  if (j.contains("n_hidden")) cfg.n_hidden = j["n_hidden"].get<int>();
  if (j.contains("n_qubits")) cfg.n_qubits = j["n_qubits"].get<int>();
  if (j.contains("q_depth")) cfg.q_depth = j["q_depth"].get<int>();
  if (j.contains("c")) cfg.c = j["c"].get<double>();
  if (j.contains("dropout_p")) cfg.dropout_p = j["dropout_p"].get<double>();
  if (j.contains("irc_safe")) cfg.irc_safe = j["irc_safe"].get<bool>();
  if (j.contains("n_scalar_in")) cfg.n_scalar_in = j["n_scalar_in"].get<int>();
  if (j.contains("q_delta")) cfg.q_delta = j["q_delta"].get<double>();
  if (j.contains("decode_coordinates")) {
    cfg.decode_coordinates = j["decode_coordinates"].get<bool>();
  }
  cfg.validate();
  return cfg;
}

LorentzEqgnn::LorentzEqgnn(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "model_init"));
  const std::size_t h = static_cast<std::size_t>(cfg.n_hidden);
  embed_w_ = xavier(static_cast<std::size_t>(cfg.n_scalar_in), h, rng);
  embed_b_ = diff::Tensor({h}, std::vector<double>(h, 0.0), true);
  blocks_.reserve(static_cast<std::size_t>(cfg.n_layers));
  for (int l = 0; l < cfg.n_layers; ++l) {
    blocks_.emplace_back(cfg.n_hidden, cfg.n_qubits, cfg.q_depth, cfg.q_delta,
                         cfg.c, rng);
  }
  dec1_w_ = xavier(h, h, rng);
  dec1_b_ = diff::Tensor({h}, std::vector<double>(h, 0.0), true);
  dec2_w_ = xavier(h, 2, rng);
  dec2_b_ = diff::Tensor({2}, {0.0, 0.0}, true);
}

BlockState LorentzEqgnn::embed_inputs(diff::Tape& tape,
                                      const data::JetGraph& jet) const {
  const std::size_t n = jet.n_nodes();
  if (n < 2) {
    throw std::invalid_argument("model: degenerate graph with fewer than 2 nodes");
  }
  std::vector<double> xbuf;
  xbuf.reserve(n * 4);
  for (const auto& p : jet.momenta) {
    xbuf.push_back(p.e);
    xbuf.push_back(p.px);
    xbuf.push_back(p.py);
    xbuf.push_back(p.pz);
  }
  diff::Tensor x({n, 4}, std::move(xbuf));

  const std::size_t s_in = static_cast<std::size_t>(cfg_.n_scalar_in);
  std::vector<double> sbuf(n * s_in, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sbuf[i * s_in] = signed_log1p(invariant_mass2(jet.momenta[i]));
    if (!jet.scalars.empty()) {
      const auto& extra = jet.scalars[i];
      if (extra.size() + 1 > s_in) {
        std::ostringstream os;
        os << "model: node scalars of width " << extra.size() + 1
           << " exceed n_scalar_in " << s_in;
        throw std::invalid_argument(os.str());
      }
      for (std::size_t k = 0; k < extra.size(); ++k) {
        sbuf[i * s_in + 1 + k] = extra[k];
      }
    }
  }
  diff::Tensor s({n, s_in}, std::move(sbuf));
  diff::Tensor h0 = diff::affine(tape, s, embed_w_, embed_b_);
  return {x, h0};
}

LorentzEqgnn::Output LorentzEqgnn::forward(diff::Tape& tape,
                                           const data::JetGraph& jet,
                                           bool training,
                                           std::uint64_t dropout_seed) const {
  BlockState state = embed_inputs(tape, jet);
  const EdgeIndex edges = make_full_edges(static_cast<int>(jet.n_nodes()));
  for (auto& block : blocks_) {
    state = block_forward(tape, block, state, edges, cfg_.irc_safe);
  }
  diff::Tensor pooled = diff::mean_rows(tape, state.h);
  if (cfg_.decode_coordinates) {
    pooled = diff::add(tape, pooled, diff::mean_rows(tape, state.x));
  }
  pooled = diff::dropout(tape, pooled, cfg_.dropout_p, training,
                         derive_seed(dropout_seed, "dropout", 0));
  diff::Tensor hidden = diff::affine(tape, pooled, dec1_w_, dec1_b_);
  hidden = diff::activate(tape, hidden, diff::Activation::kRelu);
  hidden = diff::dropout(tape, hidden, cfg_.dropout_p, training,
                         derive_seed(dropout_seed, "dropout", 1));
  diff::Tensor logits = diff::affine(tape, hidden, dec2_w_, dec2_b_);

  const double l0 = logits.values()[0];
  const double l1 = logits.values()[1];
  const double mx = std::max(l0, l1);
  const double e0 = std::exp(l0 - mx);
  const double e1 = std::exp(l1 - mx);
  return {logits, {e0 / (e0 + e1), e1 / (e0 + e1)}};
}

std::vector<NamedParam> LorentzEqgnn::parameters() const {
  std::vector<NamedParam> out;
  out.push_back({"embed.w", embed_w_});
  out.push_back({"embed.b", embed_b_});
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    auto& b = blocks_[l];
    out.push_back({p + "reducer_e.w", b.reducer_e_w});
    out.push_back({p + "reducer_e.b", b.reducer_e_b});
    out.push_back({p + "reducer_h.w", b.reducer_h_w});
    out.push_back({p + "reducer_h.b", b.reducer_h_b});
    out.push_back({p + "phi_e.weights", b.phi_e.weights});
    out.push_back({p + "phi_h.weights", b.phi_h.weights});
    out.push_back({p + "phi_m.weights", b.phi_m.weights});
    out.push_back({p + "phi_m.head_w", b.phi_m_head_w});
    out.push_back({p + "phi_m.head_b", b.phi_m_head_b});
    out.push_back({p + "phi_x.weights", b.phi_x.weights});
    out.push_back({p + "phi_x.head_w", b.phi_x_head_w});
  }
  out.push_back({"decoder.w1", dec1_w_});
  out.push_back({"decoder.b1", dec1_b_});
  out.push_back({"decoder.w2", dec2_w_});
  out.push_back({"decoder.b2", dec2_b_});
  return out;
}

std::size_t LorentzEqgnn::count_params() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor.size();
  return total;
}

std::vector<double> LorentzEqgnn::flat_params() const {
  std::vector<double> out;
  out.reserve(count_params());
  for (const auto& p : parameters()) {
    const auto& v = p.tensor.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void LorentzEqgnn::set_flat_params(std::span<const double> values) {
  std::size_t off = 0;
  for (auto& p : parameters()) {
    auto& v = const_cast<diff::Tensor&>(p.tensor).values();
    if (off + v.size() > values.size()) {
      throw std::invalid_argument("set_flat_params: value vector too short");
    }
    std::copy(values.begin() + off, values.begin() + off + v.size(), v.begin());
    off += v.size();
  }
  if (off != values.size()) {
    throw std::invalid_argument("set_flat_params: value vector too long");
  }
}

std::vector<double> LorentzEqgnn::flat_grads() const {
  std::vector<double> out;
  out.reserve(count_params());
  for (const auto& p : parameters()) {
    const auto& g = p.tensor.grad();
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

void LorentzEqgnn::zero_grads() {
  for (auto& p : parameters()) const_cast<diff::Tensor&>(p.tensor).zero_grad();
}

std::string checkpoint_json(const LorentzEqgnn& model) {
  ordered_json j;
  j["format_version"] = 1;
  j["config"] = ordered_json::parse(model.config().to_json());
  ordered_json params;
  for (const auto& p : model.parameters()) {
    params[p.name] = p.tensor.values();
  }
  j["params"] = params;
  return j.dump(2);
}

void save_checkpoint(const LorentzEqgnn& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << checkpoint_json(model) << "\n";
}

LorentzEqgnn checkpoint_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported format_version");
  }
  const ModelConfig cfg = ModelConfig::from_json_text(j["config"].dump());
  LorentzEqgnn model(cfg, /*seed=*/0);
  const auto& params = j["params"];
  for (auto& p : model.parameters()) {
    if (!params.contains(p.name)) {
      throw std::runtime_error("checkpoint: missing parameter " + p.name);
    }
    const auto vals = params[p.name].get<std::vector<double>>();
    auto& dst = const_cast<diff::Tensor&>(p.tensor).values();
    if (vals.size() != dst.size()) {
      throw std::runtime_error("checkpoint: size mismatch for " + p.name);
    }
    dst = vals;
  }
  return model;
}

LorentzEqgnn load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace leq
