#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "leq/metrics.hpp"
#include "leq/rng.hpp"
#include "oracles.hpp"

using namespace leq;

TEST_SUITE("metrics") {

TEST_CASE("roc auc on separated and random scores") {
  const std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> lab{1, 1, 0, 0};
  CHECK(train::roc_auc(sep, lab) == doctest::Approx(1.0));

  Rng rng(3);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 10000; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(static_cast<int>(rng.uniform_int(2)));
  }
  CHECK(std::fabs(train::roc_auc(scores, labels) - 0.5) < 0.02);
}

TEST_CASE("roc auc matches the all-pairs oracle including ties") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(181));  // up to 200
    std::vector<double> scores;
    std::vector<int> labels;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      // coarse grid forces ties
      scores.push_back(std::round(rng.uniform() * 10) / 10.0);
      const int l = (i < 2) ? i : static_cast<int>(rng.uniform_int(2));
      ones += l;
      labels.push_back(l);
    }
    const double got = train::roc_auc(scores, labels);
    const double want = oracles::pairwise_auc(scores, labels);
    CHECK(std::fabs(got - want) < 1e-12);
  }
}

TEST_CASE("roc auc antisymmetry and error cases") {
  Rng rng(11);
  std::vector<double> scores;
  std::vector<int> labels, flipped;
  for (int i = 0; i < 500; ++i) {
    scores.push_back(rng.uniform());
    const int l = (i < 2) ? i : static_cast<int>(rng.uniform_int(2));
    labels.push_back(l);
    flipped.push_back(1 - l);
  }
  const double a = train::roc_auc(scores, labels);
  const double b = train::roc_auc(scores, flipped);
  CHECK(std::fabs(a + b - 1.0) < 1e-12);
  CHECK(a >= 0.0);
  CHECK(a <= 1.0);

  const std::vector<int> single(10, 1);
  CHECK_THROWS_AS(train::roc_auc(std::vector<double>(10, 0.5), single),
                  std::invalid_argument);
}

TEST_CASE("background rejection near the random-score diagonal") {
  Rng rng(13);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 10000; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(static_cast<int>(rng.uniform_int(2)));
  }
  const auto rej = train::background_rejection(scores, labels, 0.3);
  CHECK(!rej.infinite);
  CHECK(std::fabs(rej.value - 1.0 / 0.3) < 0.15 * (1.0 / 0.3));
}

TEST_CASE("perfect separation flags infinite rejection") {
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.2, 0.1, 0.05};
  const std::vector<int> labels{1, 1, 1, 0, 0, 0};
  const auto rej = train::background_rejection(scores, labels, 0.5);
  CHECK(rej.infinite);
}

TEST_CASE("rejection matches the exhaustive threshold sweep") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(181));
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      scores.push_back(std::round(rng.uniform() * 20) / 20.0);
      labels.push_back((i < 2) ? i : static_cast<int>(rng.uniform_int(2)));
    }
    for (const double eps_s : {0.3, 0.5}) {
      const double want_eps_b = oracles::sweep_eps_b(scores, labels, eps_s);
      const auto got = train::background_rejection(scores, labels, eps_s);
      if (want_eps_b == 0.0) {
        CHECK(got.infinite);
      } else {
        CHECK(got.value == doctest::Approx(1.0 / want_eps_b).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("rejection is monotone in the efficiency target") {
  Rng rng(19);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) {
      const int l = (i < 2) ? i : static_cast<int>(rng.uniform_int(2));
      scores.push_back(rng.uniform() + 0.3 * l);
      labels.push_back(l);
    }
    const auto r3 = train::background_rejection(scores, labels, 0.3);
    const auto r5 = train::background_rejection(scores, labels, 0.5);
    if (!r3.infinite && !r5.infinite) CHECK(r5.value <= r3.value + 1e-12);
  }
}

TEST_CASE("rejection rejects degenerate inputs") {
  const std::vector<double> s{0.1, 0.9};
  const std::vector<int> l{0, 1};
  CHECK_THROWS_AS(train::background_rejection(s, l, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(train::background_rejection(s, l, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(train::background_rejection(s, std::vector<int>{1, 1}, 0.5),
                  std::invalid_argument);
}

}  // TEST_SUITE
