#include "evitrack/edl.hpp"

#include <cmath>
#include <stdexcept>

namespace evitrack {

DirichletEvidence::DirichletEvidence(std::vector<double> evidence)
    : evidence_(std::move(evidence)) {
  if (evidence_.size() < 2) throw std::invalid_argument("evidence needs at least 2 classes");
  for (const double e : evidence_)
    if (!std::isfinite(e) || e < 0.0)
      throw std::invalid_argument("evidence components must be finite and nonnegative");
}

double DirichletEvidence::strength() const {
  double s = static_cast<double>(num_classes());
  for (const double e : evidence_) s += e;
  return s;
}

std::vector<double> DirichletEvidence::probabilities() const {
  const double s = strength();
  std::vector<double> p(evidence_.size());
  for (std::size_t k = 0; k < evidence_.size(); ++k) p[k] = (evidence_[k] + 1.0) / s;
  return p;
}

ClassLabel::ClassLabel(int true_class, int num_classes)
    : true_class_(true_class), num_classes_(num_classes) {
  if (num_classes < 2) throw std::invalid_argument("label needs at least 2 classes");
  if (true_class < 0 || true_class >= num_classes)
    throw std::invalid_argument("true class out of range");
}

std::vector<double> ClassLabel::onehot() const {
  std::vector<double> y(static_cast<std::size_t>(num_classes_), 0.0);
  y[static_cast<std::size_t>(true_class_)] = 1.0;
  return y;
}

DirichletEvidence evidence_from_logits(const std::vector<double>& logits) {
  std::vector<double> e(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) throw std::invalid_argument("logits must be finite");
    e[k] = logits[k] > 0.0 ? logits[k] : 0.0;
  }
  return DirichletEvidence(std::move(e));
}

EvidencePrediction predict(const DirichletEvidence& ev) {
  return {ev.probabilities(), ev.uncertainty()};
}

double edl_loss(const DirichletEvidence& ev, const ClassLabel& label) {
  if (label.num_classes() != ev.num_classes())
    throw std::invalid_argument("label and evidence class counts differ");
  return std::log(ev.strength()) - std::log(ev.alpha(label.true_class()));
}

std::vector<double> edl_loss_grad(const DirichletEvidence& ev, const ClassLabel& label) {
  if (label.num_classes() != ev.num_classes())
    throw std::invalid_argument("label and evidence class counts differ");
  const double inv_s = 1.0 / ev.strength();
  std::vector<double> g(static_cast<std::size_t>(ev.num_classes()), inv_s);
  g[static_cast<std::size_t>(label.true_class())] -= 1.0 / ev.alpha(label.true_class());
  return g;
}

Decision judge(const DirichletEvidence& ev, double theta_eh) {
  if (ev.num_classes() != 2)
    throw std::invalid_argument("judge expects binary target/background evidence");
  if (!std::isfinite(theta_eh) || theta_eh < 0.0 || theta_eh > 1.0)
    throw std::invalid_argument("theta_eh must lie in [0, 1]");
  const auto p = ev.probabilities();
  const bool target_wins = p[kTargetClass] > p[kBackgroundClass];
  if (target_wins && ev.uncertainty() < theta_eh) return Decision::ContinueTracking;
  return Decision::SwitchToDetection;
}

}  // namespace evitrack
