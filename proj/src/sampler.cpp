#include "lem/sampler.hpp"

namespace lem {

PositionMask position_mask(int position) {
  switch (position) {
    case 0:
      return {0, kTypeBase, kGameOverToken};
    case 1:
    case 2:
    case 3:
      return {position, 0, 1};
    case 4:
    case 5:
    case 6:
      return {position, 0, 100};
    default:
      throw Error("position out of range 0..6: " + std::to_string(position));
  }
}

std::vector<double> masked_distribution(const ProbVector& p, const PositionMask& mask,
                                        SamplerDiagnostics* diag) {
  std::vector<double> q(kVocabSize, 0.0);
  double total = 0.0;
  for (TokenId t = mask.lo; t <= mask.hi; ++t) {
    const double v = p[t] > 0.0f ? static_cast<double>(p[t]) : 0.0;
    q[t] = v;
    total += v;
  }
  if (total <= 0.0) {
    if (diag != nullptr) diag->zero_mass_fallbacks += 1;
    const double u = 1.0 / mask.size();
    for (TokenId t = mask.lo; t <= mask.hi; ++t) q[t] = u;
    return q;
  }
  for (TokenId t = mask.lo; t <= mask.hi; ++t) q[t] /= total;
  return q;
}

TokenId sample(const std::vector<double>& q, RngStream& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  TokenId last = 0;
  for (TokenId t = 0; t < q.size(); ++t) {
    if (q[t] <= 0.0) continue;
    cum += q[t];
    last = t;
    if (u < cum) return t;
  }
  return last;  // u landed in the rounding slack past the final bucket
}

TokenId sample_masked(const ProbVector& p, const PositionMask& mask, RngStream& rng,
                      SamplerDiagnostics* diag) {
  double total = 0.0;
  for (TokenId t = mask.lo; t <= mask.hi; ++t) {
    if (p[t] > 0.0f) total += static_cast<double>(p[t]);
  }
  const double u = rng.next_double();
  if (total <= 0.0) {
    if (diag != nullptr) diag->zero_mass_fallbacks += 1;
    const double w = 1.0 / mask.size();
    double cum = 0.0;
    for (TokenId t = mask.lo; t <= mask.hi; ++t) {
      cum += w;
      if (u < cum) return t;
    }
    return mask.hi;
  }
  double cum = 0.0;
  TokenId last = mask.lo;
  for (TokenId t = mask.lo; t <= mask.hi; ++t) {
    if (p[t] <= 0.0f) continue;
    cum += static_cast<double>(p[t]) / total;
    last = t;
    if (u < cum) return t;
  }
  return last;
}

}  // namespace lem
