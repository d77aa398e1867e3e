#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leq/data.hpp"
#include "leq/lgeqb.hpp"
#include "leq/tensor.hpp"

namespace leq {

struct ModelConfig {
  int n_layers = 1;
  int n_hidden = 4;
  int n_qubits = 4;
  int q_depth = 2;
  double c = 1e-3;
  double dropout_p = 0.2;
  bool irc_safe = false;
  int n_scalar_in = 1;
  double q_delta = 0.01;
  /// Symmetry-breaking fixture: mixes pooled coordinates into the decoder
  /// input so the verify command has a known-violating model to reject.
  bool decode_coordinates = false;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json_text(const std::string& text);
};

struct NamedParam {
  std::string name;
  diff::Tensor tensor;
};

/// End-to-end network: scalar embedding, a stack of equivariant quantum
/// blocks, average-pool decoding into two class logits.
class LorentzEqgnn {
 public:
  LorentzEqgnn(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  /// x^0 = raw 4-momenta; h^0 = embed([slog(mass^2), extra scalars]).
  /// Throws for graphs with fewer than 2 nodes.
  BlockState embed_inputs(diff::Tape& tape, const data::JetGraph& jet) const;

  struct Output {
    diff::Tensor logits;        // [1 x 2]
    std::array<double, 2> probs;
  };

  /// Dropout is active only when training; `dropout_seed` should fold in the
  /// step index so masks differ across steps but not across threads.
  Output forward(diff::Tape& tape, const data::JetGraph& jet, bool training,
                 std::uint64_t dropout_seed) const;

  /// Stable-ordered list of all trainable tensors.
  std::vector<NamedParam> parameters() const;
  std::size_t count_params() const;

  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> values);
  std::vector<double> flat_grads() const;
  void zero_grads();

  std::vector<LgeqbParams>& blocks() { return blocks_; }

 private:
  ModelConfig cfg_;
  diff::Tensor embed_w_, embed_b_;
  mutable std::vector<LgeqbParams> blocks_;
  diff::Tensor dec1_w_, dec1_b_, dec2_w_, dec2_b_;
};

/// Checkpoint is a single JSON document {format_version, config, params} with
/// byte-stable key ordering.
std::string checkpoint_json(const LorentzEqgnn& model);
void save_checkpoint(const LorentzEqgnn& model, const std::string& path);
LorentzEqgnn load_checkpoint(const std::string& path);
LorentzEqgnn checkpoint_from_json(const std::string& text);

}  // namespace leq
