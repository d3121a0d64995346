#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace evitrack {

// Outcome of one randomized property suite.
struct CheckReport {
  std::string name;
  int cases_run = 0;
  int failures = 0;
  std::vector<std::string> messages;  // first few failing cases

  bool passed() const { return cases_run > 0 && failures == 0; }
};

// Sequence scoring vs the extended-precision transcription, on random
// sequences (lengths 1 to 500) with mixed visibility, hits, misses, and
// absence predictions. Boxes land on a 1/64 px grid so both precisions agree
// on exact-zero overlaps. Tolerance 1e-12.
CheckReport check_metric(int cases = 10000, std::uint64_t seed = 1);

// Loss/gradient pair under test, on raw evidence vectors (the loss must
// tolerate slightly negative components from finite-difference probes).
using RawLossFn = std::function<double(const std::vector<double>&, int)>;
using RawGradFn =
    std::function<std::vector<double>(const std::vector<double>&, int)>;

// Dirichlet math: probabilities sum to 1 (1e-12), uncertainty in (0,1], the
// production loss agrees with `loss` at the center point (1e-12), and `grad`
// matches central differences of `loss` within relative error 1e-6.
// K cycles through {2, 3, 5}.
CheckReport check_edl_against(const RawLossFn& loss, const RawGradFn& grad,
                              int cases, std::uint64_t seed);

// check_edl_against wired to the production loss's transcription and the
// analytic gradient.
CheckReport check_edl(int cases = 10000, std::uint64_t seed = 2);

// Attention properties: rows of the weight matrix sum to 1 (1e-12) and lie
// in [0,1], outputs stay inside the per-channel value envelope (1e-9 slack),
// cross-attention with an empty template is bit-identical to search
// self-attention, and the full block matches the hand-looped reference
// within 1e-10.
CheckReport check_rdm(int cases = 1000, std::uint64_t seed = 3);

}  // namespace evitrack
