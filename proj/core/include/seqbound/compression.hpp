#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "seqbound/pw_function.hpp"

namespace seqbound {

struct CompressionConfig {
  // Per-segment budget, as a fraction of the exact self-join size, for the extra self-join mass a segment may add.
  double accuracy{0.01};
  // Caps the number of sloped segments. Once reached, the remaining ranks extend the last sloped segment.
  std::optional<size_t> max_segments{};

  // Throws ConfigError.
  void validate() const;
};

// Sum of squared frequencies: the exact self-join size of the column.
uint64_t self_join_bound(const DegreeSequence& sequence);

// Run-length encoding of the sequence; exact at every integer rank.
PiecewiseConstantFn lossless_compress(const DegreeSequence& sequence);

// The exact CDS, as a piecewise linear function with a knot at every change of frequency.
PiecewiseLinearFn exact_cds(const DegreeSequence& sequence);

// Greedy single pass over the ranks. Each sloped segment starts with the slope of its first rank and is stretched
// by f(i) / slope per rank, so the CDS value at the segment end equals the exact CDS at the current rank. A new
// segment opens once the current one would add at least accuracy * self_join_bound to the self-join. A final flat
// segment at the cardinality closes the domain at the distinct count.
PiecewiseLinearFn valid_compress(const DegreeSequence& sequence, const CompressionConfig& config = {});

struct ValidityReport {
  enum class Violation { None, NotDegreeSequence, NotDominating, CardinalityChanged };

  Violation violation{Violation::None};
  std::string detail;

  bool valid() const {
    return violation == Violation::None;
  }

  explicit operator bool() const {
    return valid();
  }
};

// Checks that the compressed CDS is concave, dominates the exact CDS at every integer rank and at its own knots,
// and reaches the exact cardinality (1e-6 relative) at the distinct count.
ValidityReport is_valid_compression(const DegreeSequence& sequence, const PiecewiseLinearFn& compressed);

// Sum over integer ranks 1..ceil(max(end, domain_end)) of (F(i) - F(i-1))^2, with F continued flat.
double sum_squared_increments(const PiecewiseLinearFn& cds, double end = 0.0);

// Self-join error of replacing both CDSs with their pointwise maximum, normalised by each CDS's own self-join.
// Symmetric, at least 2, and exactly 2 for identical inputs. Throws ArgumentError on zero self-join mass.
double compression_distance(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs);

}  // namespace seqbound
