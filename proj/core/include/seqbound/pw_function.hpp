#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seqbound {

// Absolute tolerance for structural comparisons; scaled by the magnitude of the operands.
inline constexpr double kTolerance = 1e-9;

// a <= b up to kTolerance scaled by max(1, |a|, |b|).
bool approx_le(double a, double b);
bool approx_eq(double a, double b);

// Exact frequency vector of a column, sorted by non-increasing frequency. Rank i (1-based) holds the
// frequency of the i-th most frequent value.
class DegreeSequence {
 public:
  DegreeSequence() = default;

  // Frequencies must be positive and non-increasing.
  explicit DegreeSequence(std::vector<uint64_t> frequencies);

  // Sorts descending and drops zero counts.
  static DegreeSequence from_counts(std::vector<uint64_t> counts);

  const std::vector<uint64_t>& frequencies() const {
    return _frequencies;
  }

  size_t distinct_count() const {
    return _frequencies.size();
  }

  uint64_t cardinality() const {
    return _cardinality;
  }

  bool empty() const {
    return _frequencies.empty();
  }

  // 1-based rank; 0 past the last rank.
  uint64_t at_rank(size_t rank) const;

  bool operator==(const DegreeSequence&) const = default;

 private:
  std::vector<uint64_t> _frequencies;
  uint64_t _cardinality{0};
};

// Step function on the real rank domain (0, right_edge_last]. Segment j covers (right_edge_{j-1}, right_edge_j].
// Values are non-negative and non-increasing, so the function is itself a (fractional) degree sequence.
class PiecewiseConstantFn {
 public:
  struct Segment {
    double right_edge;
    double value;

    bool operator==(const Segment&) const = default;
  };

  // The zero function on (0, 1].
  PiecewiseConstantFn();

  // Drops zero-width segments and merges equal neighbours. Throws InvariantError on violated invariants.
  explicit PiecewiseConstantFn(std::vector<Segment> segments);

  static PiecewiseConstantFn zero(double domain_end = 1.0);

  const std::vector<Segment>& segments() const {
    return _segments;
  }

  size_t segment_count() const {
    return _segments.size();
  }

  double domain_end() const {
    return _segments.back().right_edge;
  }

  // Value of the segment containing x. Ranks at or below 0 read the first segment; ranks past the domain read 0.
  double value_at(double x) const;

  double integral() const;

  bool operator==(const PiecewiseConstantFn&) const = default;

 private:
  std::vector<Segment> _segments;
};

// Continuous, non-decreasing piecewise linear function with F(0) = 0, stored as its knots. A cumulative degree
// sequence additionally is concave; that is checked by is_concave() rather than enforced, because raw pointwise
// maxima are legitimately non-concave before envelope repair.
class PiecewiseLinearFn {
 public:
  struct Knot {
    double x;
    double y;

    bool operator==(const Knot&) const = default;
  };

  // Segment l covers (left_edge, right_edge] with value slope * (x - left_edge) + intercept.
  struct Segment {
    double left_edge;
    double right_edge;
    double slope;
    double intercept;
  };

  // The zero function on (0, 1].
  PiecewiseLinearFn();

  // Knots must start at (0, 0) with strictly increasing x and non-decreasing y (within tolerance). Collinear
  // interior knots are removed.
  explicit PiecewiseLinearFn(std::vector<Knot> knots);

  static PiecewiseLinearFn zero(double domain_end = 1.0);

  const std::vector<Knot>& knots() const {
    return _knots;
  }

  std::vector<Segment> segments() const;

  size_t segment_count() const {
    return _knots.size() - 1;
  }

  double domain_end() const {
    return _knots.back().x;
  }

  // F at the end of the domain: the cardinality this CDS describes.
  double total() const {
    return _knots.back().y;
  }

  double slope(size_t segment) const;

  bool is_concave() const;

  // Smallest x at which the function reaches its total. The function is flat on (flat_start, domain_end].
  double flat_start() const;

  // Throws DomainError for x outside [0, domain_end].
  double evaluate(double x) const;

  // Flat continuation past the domain end; 0 for x <= 0.
  double evaluate_extended(double x) const;

  // Smallest x with F(x) >= y. Throws RangeError for y > total().
  double inverse(double y) const;

  bool operator==(const PiecewiseLinearFn&) const = default;

 private:
  std::vector<Knot> _knots;
};

double evaluate(const PiecewiseLinearFn& cds, double x);

double inverse(const PiecewiseLinearFn& cds, double y);

// Running integral of a step function.
PiecewiseLinearFn cumulate(const PiecewiseConstantFn& ds);

// Slopes of a concave CDS as a step function. Throws InvariantError for non-concave input.
PiecewiseConstantFn discrete_derivative(const PiecewiseLinearFn& cds);

// Pointwise product over the shorter of the two domains.
PiecewiseConstantFn pw_multiply(const PiecewiseConstantFn& lhs, const PiecewiseConstantFn& rhs);

// i -> f_child(F_other^{-1}(F_anchor(i))) over the anchor's domain: the factor a child unary contributes to a
// star join after its ranks are mapped through the relation's two CDSs. Where F_anchor is flat (zero degree) the
// factor is 0. Throws CatalogInconsistencyError when the anchor carries more mass than F_other.
PiecewiseConstantFn compose_beta_factor(const PiecewiseConstantFn& child, const PiecewiseLinearFn& other_cds,
                                        const PiecewiseLinearFn& anchor_cds);

// Pointwise combinators over the longest input domain; shorter inputs continue flat. Throw ArgumentError on empty
// input. pw_max returns the raw maximum, which need not be concave; see upper_concave_envelope.
PiecewiseLinearFn pw_min(std::span<const PiecewiseLinearFn> functions);
PiecewiseLinearFn pw_max(std::span<const PiecewiseLinearFn> functions);
PiecewiseLinearFn pw_sum(std::span<const PiecewiseLinearFn> functions);

PiecewiseLinearFn pw_min(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs);
PiecewiseLinearFn pw_max(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs);
PiecewiseLinearFn pw_sum(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs);

// Smallest concave function above the input (upper hull of its knots).
PiecewiseLinearFn upper_concave_envelope(const PiecewiseLinearFn& function);

// pw_max followed by envelope repair: the smallest valid CDS dominating all inputs.
PiecewiseLinearFn concave_max(std::span<const PiecewiseLinearFn> functions);

// min(F(x), cap).
PiecewiseLinearFn truncate_cds(const PiecewiseLinearFn& cds, double cap);

}  // namespace seqbound
