#pragma once

#include <optional>
#include <vector>

#include "lacelab/model.hpp"

namespace lace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  double center() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
};

// b_n, c_n, v_n at one z, indices 0..n with v_0 = b_0 = 1, c_0 = 0.
struct SequenceState {
  double z = 1.0;
  Vec b;
  Vec c;
  Vec v;

  int n() const { return static_cast<int>(v.size()) - 1; }
};

// Throws DegenerateError (with witness n) when 1 + c_n <= 0.
SequenceState sequences(const ModelSequences& model, double z, int n);

// z_0 = z_1 = 1, z_{j+1} = 1 - sum_{m=2}^{j+1} g_m(0; z_j).
struct ZSequence {
  Vec z;           // z_0..z_n
  Vec increment;   // |z_j - z_{j-1}|, index 0 unused
};

ZSequence z_sequence(const ModelSequences& model, int n);

// I_j = [z_j - K1 beta j^{1-theta}, z_j + K1 beta j^{1-theta}], j = 1..n.
// Element 0 is left empty-valued so indices match j.
std::vector<Interval> induction_intervals(const ZSequence& zs, double K1, double beta, double theta);

// First index j >= 2 with I_j not contained in I_{j-1}; nullopt when nested.
std::optional<int> first_nesting_failure(const std::vector<Interval>& intervals);

struct CriticalConstants {
  double z_c = 1.0;
  double A = 1.0;
  double v = 1.0;
  int M = 0;
  double residual = 0.0;
  std::optional<double> tail_estimate;
  Interval bracket;
  bool bracket_widened = false;
  int iterations = 0;
};

struct ZcOptions {
  double tol = 1e-10;
  // Half-width of the starting bracket [1 - w, 1 + w]; K1 beta when the
  // induction constants are known.
  double bracket_half_width = 0.1;
};

// Truncated fixed point 1 = sum_{m<=M} g_m(0; z_c) and the quotient formulas
// for A and v. Throws NoRootError, listing the sampled residuals, when no
// sign change is found even after one widening of the bracket.
CriticalConstants solve_zc(const ModelSequences& model, int M, const ZcOptions& options = {});

// sum_{m=1}^{M} g_m(0; z)
double truncated_g_sum(const ModelSequences& model, int M, double z);

}  // namespace lace
