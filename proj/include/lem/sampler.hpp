#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lem/codec.hpp"
#include "lem/model.hpp"
#include "lem/rng.hpp"

namespace lem {

// Prediction order within an event: type, isGoal, isAccurate, isHome,
// timeElapsed, x, y.
enum class Position : int {
  Type = 0,
  IsGoal = 1,
  IsAccurate = 2,
  IsHome = 3,
  TimeElapsed = 4,
  X = 5,
  Y = 6,
};

// Legal token range for one predicted position. All masks are contiguous:
// position 0 allows 101..139 (37 types + both boundary markers), binary
// positions allow 0..1, numeric positions allow 0..100. <NaN> is never legal.
struct PositionMask {
  int position;
  TokenId lo;
  TokenId hi;  // inclusive

  bool contains(TokenId t) const { return t >= lo && t <= hi; }
  int size() const { return hi - lo + 1; }
};

PositionMask position_mask(int position);

// Incremented when a masked distribution sums to zero after clamping and the
// sampler falls back to uniform over the allowed set.
struct SamplerDiagnostics {
  std::uint64_t zero_mass_fallbacks = 0;

  SamplerDiagnostics& operator+=(const SamplerDiagnostics& o) {
    zero_mass_fallbacks += o.zero_mass_fallbacks;
    return *this;
  }
};

// q_t = p_t / sum over allowed, zero elsewhere; uniform fallback on zero mass.
std::vector<double> masked_distribution(const ProbVector& p, const PositionMask& mask,
                                        SamplerDiagnostics* diag = nullptr);

// Inverse-CDF draw over ascending token id. `q` must sum to 1.
TokenId sample(const std::vector<double>& q, RngStream& rng);

// Fused renormalize-and-draw used by the simulator hot path; identical draw
// sequence to masked_distribution + sample.
TokenId sample_masked(const ProbVector& p, const PositionMask& mask, RngStream& rng,
                      SamplerDiagnostics* diag = nullptr);

}  // namespace lem
