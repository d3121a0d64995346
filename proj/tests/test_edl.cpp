#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "evitrack/checks.hpp"
#include "evitrack/edl.hpp"
#include "evitrack/reference.hpp"
#include "evitrack/rng.hpp"

using namespace evitrack;

TEST_CASE("zero evidence gives the uniform prediction at full uncertainty") {
  const DirichletEvidence ev({0.0, 0.0});
  CHECK(ev.strength() == 2.0);
  CHECK(ev.uncertainty() == 1.0);
  const auto pred = predict(ev);
  CHECK(pred.probabilities[0] == 0.5);
  CHECK(pred.probabilities[1] == 0.5);
  CHECK(pred.uncertainty == 1.0);
}

TEST_CASE("the (3, 1) evidence fixture") {
  const DirichletEvidence ev({3.0, 1.0});
  CHECK(ev.strength() == 6.0);
  const auto pred = predict(ev);
  CHECK(pred.probabilities[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(pred.probabilities[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(pred.uncertainty == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("loss fixtures in closed form") {
  const ClassLabel target(0, 2);
  CHECK(edl_loss(DirichletEvidence({0.0, 0.0}), target) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(edl_loss(DirichletEvidence({3.0, 1.0}), target) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-14));
}

TEST_CASE("gradient fixture at zero evidence") {
  const auto grad = edl_loss_grad(DirichletEvidence({0.0, 0.0}), ClassLabel(0, 2));
  CHECK(grad[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(grad[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("probabilities always sum to one") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int k = rng.uniform_int(2, 6);
    std::vector<double> e(static_cast<std::size_t>(k));
    for (auto& v : e) v = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.0, 50.0);
    const auto pred = predict(DirichletEvidence(e));
    double sum = 0.0;
    for (const double p : pred.probabilities) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(pred.uncertainty > 0.0);
    CHECK(pred.uncertainty <= 1.0);
  }
}

TEST_CASE("relu turns logits into evidence and rejects non-finite input") {
  const auto ev = evidence_from_logits({-2.0, 0.0, 3.5});
  CHECK(ev.evidence() == std::vector<double>{0.0, 0.0, 3.5});
  CHECK_THROWS_AS(evidence_from_logits({1.0, std::nan("")}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evidence_from_logits({}), std::invalid_argument);
}

TEST_CASE("evidence construction rejects bad vectors") {
  CHECK_THROWS_AS(DirichletEvidence({1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DirichletEvidence(std::vector<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DirichletEvidence(std::vector<double>{4.0}),
                  std::invalid_argument);
}

TEST_CASE("label construction checks its range") {
  CHECK_THROWS_AS(ClassLabel(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(ClassLabel(-1, 2), std::invalid_argument);
  CHECK_THROWS_AS(ClassLabel(0, 1), std::invalid_argument);
  const ClassLabel ok(1, 3);
  CHECK(ok.onehot() == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("loss and evidence dimensions must agree") {
  CHECK_THROWS_AS(edl_loss(DirichletEvidence({1.0, 2.0}), ClassLabel(0, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(edl_loss_grad(DirichletEvidence({1.0, 2.0, 3.0}), ClassLabel(0, 2)),
                  std::invalid_argument);
}

TEST_CASE("more true-class evidence always shrinks the loss") {
  const ClassLabel target(0, 2);
  double prev = edl_loss(DirichletEvidence({0.0, 4.0}), target);
  for (double e = 0.5; e <= 20.0; e += 0.5) {
    const double cur = edl_loss(DirichletEvidence({e, 4.0}), target);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("gradient pushes evidence toward the true class") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const int k = rng.uniform_int(2, 5);
    const int c = rng.uniform_int(0, k - 1);
    std::vector<double> e(static_cast<std::size_t>(k));
    for (auto& v : e) v = rng.uniform(0.0, 30.0);
    const auto grad = edl_loss_grad(DirichletEvidence(e), ClassLabel(c, k));
    for (int j = 0; j < k; ++j) {
      if (j == c) {
        CHECK(grad[static_cast<std::size_t>(j)] < 0.0);
      } else {
        CHECK(grad[static_cast<std::size_t>(j)] > 0.0);
      }
    }
  }
}

TEST_CASE("judge fixtures and threshold semantics") {
  const DirichletEvidence confident({19.0, 1.0});  // u = 2/22
  const DirichletEvidence shaky({3.0, 1.0});       // u = 1/3
  CHECK(judge(confident, 0.2) == Decision::ContinueTracking);
  CHECK(judge(shaky, 0.2) == Decision::SwitchToDetection);
  // Ties fail safe even under a permissive threshold.
  CHECK(judge(DirichletEvidence({5.0, 5.0}), 1.0) == Decision::SwitchToDetection);
  // u equal to the threshold is not strictly below it.
  CHECK(judge(shaky, 1.0 / 3.0) == Decision::SwitchToDetection);
}

TEST_CASE("judge at the threshold endpoints") {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> e{rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0)};
    const DirichletEvidence ev(e);
    // u > 0 always, so 0 can never admit tracking.
    CHECK(judge(ev, 0.0) == Decision::SwitchToDetection);
    // At 1 the uncertainty test only rejects u == 1 (zero evidence), so the
    // probability vote decides.
    const auto pred = predict(ev);
    const auto want = pred.probabilities[0] > pred.probabilities[1] &&
                              pred.uncertainty < 1.0
                          ? Decision::ContinueTracking
                          : Decision::SwitchToDetection;
    CHECK(judge(ev, 1.0) == want);
  }
}

TEST_CASE("raising the threshold never flips a verdict back to detection") {
  Rng rng(47);
  for (int i = 0; i < 100; ++i) {
    const DirichletEvidence ev(
        {rng.uniform(0.0, 40.0), rng.uniform(0.0, 40.0)});
    bool tracking_seen = false;
    for (const double theta : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const bool tracking = judge(ev, theta) == Decision::ContinueTracking;
      if (tracking_seen) CHECK(tracking);
      tracking_seen = tracking_seen || tracking;
    }
  }
}

TEST_CASE("judge validates its inputs") {
  CHECK_THROWS_AS(judge(DirichletEvidence({1.0, 1.0, 1.0}), 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(judge(DirichletEvidence({1.0, 1.0}), -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(judge(DirichletEvidence({1.0, 1.0}), 1.5),
                  std::invalid_argument);
}

TEST_CASE("self-check agrees with finite differences on a quick run") {
  const auto report = check_edl(300, 2);
  CHECK(report.cases_run == 300);
  CHECK(report.failures == 0);
  CHECK(report.passed());
}

TEST_CASE("self-check catches a scaled gradient") {
  // The loss probe sees finite-difference points with slightly negative
  // components, so it must run on raw vectors.
  const RawLossFn loss = [](const std::vector<double>& e, int c) {
    return reference::edl_loss_raw(e, c);
  };
  const RawGradFn bad_grad = [](const std::vector<double>& e, int c) {
    auto g = edl_loss_grad(DirichletEvidence(e),
                           ClassLabel(c, static_cast<int>(e.size())));
    for (auto& v : g) v *= 1.0 + 5e-5;
    return g;
  };
  const auto report = check_edl_against(loss, bad_grad, 400, 2);
  CHECK(report.failures == report.cases_run);
}

TEST_CASE("self-check catches a shifted loss") {
  const RawLossFn loss = [](const std::vector<double>& e, int c) {
    return 0.5 + reference::edl_loss_raw(e, c);
  };
  const RawGradFn grad = [](const std::vector<double>& e, int c) {
    return edl_loss_grad(DirichletEvidence(e),
                         ClassLabel(c, static_cast<int>(e.size())));
  };
  const auto report = check_edl_against(loss, grad, 400, 2);
  CHECK(report.failures == report.cases_run);
}
