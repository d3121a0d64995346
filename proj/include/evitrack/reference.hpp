#pragma once

#include <utility>
#include <vector>

#include "evitrack/metric.hpp"
#include "evitrack/rdm.hpp"

// Straight-line transcriptions used as oracles by the property suites. These
// deliberately share no code with the main implementations: plain loops,
// extended precision where it matters, no shared helpers. Keep them dumb.
namespace evitrack::reference {

// Sequence score computed in extended precision directly from its defining
// formula, including a from-scratch IoU.
long double acc_literal(const std::vector<FrameAnnotation>& annotations,
                        const std::vector<FramePrediction>& predictions,
                        double alpha, double beta);

// log(S) - log(alpha_c) on raw evidence, without the nonnegativity guard, so
// finite-difference probes may step slightly below zero.
double edl_loss_raw(const std::vector<double>& evidence, int true_class);

// Central difference gradient of f at x with half-step h.
template <typename F>
std::vector<double> central_difference(F&& f, const std::vector<double>& x,
                                       double h) {
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

// The full decoupled-attention block on nested vectors, hand-looped.
std::pair<std::vector<std::vector<double>>, std::vector<std::vector<double>>>
rdm_forward_reference(const std::vector<std::vector<double>>& template_tokens,
                      const std::vector<std::vector<double>>& search_tokens,
                      const RdmWeights& weights);

}  // namespace evitrack::reference
