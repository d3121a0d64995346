#pragma once

#include <vector>

namespace evitrack {

// Binary target-vs-background convention used by the tracking judge.
inline constexpr int kTargetClass = 0;
inline constexpr int kBackgroundClass = 1;

// Nonnegative evidence vector over K classes. Evidence e parameterizes a
// Dirichlet distribution with alpha_k = e_k + 1; its strength is
// S = sum(alpha) = K + sum(e), so the predictive uncertainty u = K/S always
// lies in (0, 1] and equals 1 exactly at zero evidence.
class DirichletEvidence {
 public:
  explicit DirichletEvidence(std::vector<double> evidence);

  int num_classes() const { return static_cast<int>(evidence_.size()); }
  const std::vector<double>& evidence() const { return evidence_; }
  double alpha(int k) const { return evidence_[static_cast<std::size_t>(k)] + 1.0; }
  double strength() const;
  double uncertainty() const { return static_cast<double>(num_classes()) / strength(); }
  std::vector<double> probabilities() const;

 private:
  std::vector<double> evidence_;
};

// One-hot ground-truth label over K classes, stored as the true-class index.
class ClassLabel {
 public:
  ClassLabel(int true_class, int num_classes);

  int true_class() const { return true_class_; }
  int num_classes() const { return num_classes_; }
  std::vector<double> onehot() const;

 private:
  int true_class_;
  int num_classes_;
};

// ReLU of raw logits; throws on non-finite input.
DirichletEvidence evidence_from_logits(const std::vector<double>& logits);

struct EvidencePrediction {
  std::vector<double> probabilities;  // alpha_k / S, sums to 1
  double uncertainty;                 // K / S
};

EvidencePrediction predict(const DirichletEvidence& ev);

// log(S) - log(alpha_c) for the true class c. Nonnegative since alpha_c <= S.
double edl_loss(const DirichletEvidence& ev, const ClassLabel& label);

// Analytic gradient w.r.t. each evidence component:
// dL/de_k = 1/S - [k == c]/alpha_c.
std::vector<double> edl_loss_grad(const DirichletEvidence& ev, const ClassLabel& label);

enum class Decision { ContinueTracking, SwitchToDetection };

// Tracking verdict for K = 2 evidence: keep tracking only when the target
// class wins the probability vote outright and u < theta_eh. Ties at 0.5/0.5
// fail safe toward re-detection. theta_eh is accepted on [0, 1]; at 0 the
// verdict is always SwitchToDetection because u > 0 for all valid evidence.
Decision judge(const DirichletEvidence& ev, double theta_eh);

}  // namespace evitrack
