#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leq/data.hpp"
#include "leq/model.hpp"

namespace leq::verify {

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool informational = false;  // reported but never failing (diagnostics)
};

/// Random jets with multiplicity uniform in [n_min, n_max]; massless
/// collimated sprays suitable for the invariance corpora.
std::vector<data::JetGraph> random_graph_corpus(std::uint64_t seed, int count,
                                                int n_min, int n_max);

/// Model-logit invariance and block-level coordinate equivariance under
/// random proper transforms (rapidity <= max_rapidity).
std::vector<CheckResult> suite_lorentz(const LorentzEqgnn& model,
                                       std::uint64_t seed, int n_graphs = 100,
                                       int n_transforms = 20,
                                       double max_rapidity = 2.0);

std::vector<CheckResult> suite_permutation(const LorentzEqgnn& model,
                                           std::uint64_t seed,
                                           int n_graphs = 100);

/// Soft-emission scaling of the attention prefactor and weighted messages,
/// plus the collinear additivity residual (informational).
std::vector<CheckResult> suite_irc(const LorentzEqgnn& model,
                                   std::uint64_t seed, int n_jets = 50);

/// Parameter-shift vs finite differences on random circuits, and end-to-end
/// model gradients vs finite differences on a small jet.
std::vector<CheckResult> suite_gradients(const LorentzEqgnn& model,
                                         std::uint64_t seed);

/// Gate kernels vs the dense-matrix reference on 2-3 qubit registers, and
/// norm drift over random 50-gate programs.
std::vector<CheckResult> suite_unitarity(std::uint64_t seed);

/// Dispatch by name: lorentz | permutation | irc | gradients | unitarity | all.
std::vector<CheckResult> run_suite(const std::string& name,
                                   const LorentzEqgnn& model,
                                   std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace leq::verify
