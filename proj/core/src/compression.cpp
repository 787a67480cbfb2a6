#include "seqbound/compression.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "seqbound/errors.hpp"

namespace seqbound {

void CompressionConfig::validate() const {
  if (!(accuracy > 0.0) || !std::isfinite(accuracy)) {
    throw ConfigError("compression accuracy must be positive");
  }
  if (max_segments && *max_segments < 2) {
    throw ConfigError("max_segments must be at least 2");
  }
}

uint64_t self_join_bound(const DegreeSequence& sequence) {
  auto sum = uint64_t{0};
  for (const auto frequency : sequence.frequencies()) {
    sum += frequency * frequency;
  }
  return sum;
}

PiecewiseConstantFn lossless_compress(const DegreeSequence& sequence) {
  if (sequence.empty()) {
    return PiecewiseConstantFn::zero();
  }
  auto segments = std::vector<PiecewiseConstantFn::Segment>{};
  const auto& frequencies = sequence.frequencies();
  for (auto rank = size_t{1}; rank <= frequencies.size(); ++rank) {
    const auto value = static_cast<double>(frequencies[rank - 1]);
    if (!segments.empty() && segments.back().value == value) {
      segments.back().right_edge = static_cast<double>(rank);
    } else {
      segments.push_back({static_cast<double>(rank), value});
    }
  }
  return PiecewiseConstantFn{std::move(segments)};
}

PiecewiseLinearFn exact_cds(const DegreeSequence& sequence) {
  return cumulate(lossless_compress(sequence));
}

PiecewiseLinearFn valid_compress(const DegreeSequence& sequence, const CompressionConfig& config) {
  config.validate();
  if (sequence.empty()) {
    return PiecewiseLinearFn::zero();
  }
  const auto& f = sequence.frequencies();
  const auto distinct = static_cast<double>(f.size());
  const auto threshold = config.accuracy * static_cast<double>(self_join_bound(sequence));

  auto knots = std::vector<PiecewiseLinearFn::Knot>{{0.0, 0.0}};
  auto segment_count = size_t{1};
  auto error = 0.0;
  auto slope = static_cast<double>(f.front());
  auto divider = 0.0;
  // Exact CDS at the current rank; the knot value at the current divider equals it by construction.
  auto mass = uint64_t{0};

  for (const auto frequency_int : f) {
    const auto frequency = static_cast<double>(frequency_int);
    error = error + slope * slope * (frequency / slope) - frequency * frequency;
    const auto may_open = !config.max_segments || segment_count + 1 < *config.max_segments;
    if (error >= threshold && may_open) {
      knots.push_back({divider, static_cast<double>(mass)});
      ++segment_count;
      error = 0.0;
      slope = frequency;
    }
    divider = divider + frequency / slope;
    mass += frequency_int;
  }
  divider = std::min(divider, distinct);
  knots.push_back({divider, static_cast<double>(mass)});
  if (divider < distinct) {
    knots.push_back({distinct, static_cast<double>(mass)});
  }
  return PiecewiseLinearFn{std::move(knots)};
}

ValidityReport is_valid_compression(const DegreeSequence& sequence, const PiecewiseLinearFn& compressed) {
  using Violation = ValidityReport::Violation;
  if (!compressed.is_concave()) {
    return {Violation::NotDegreeSequence, "derivative of the compressed CDS is not non-increasing"};
  }

  const auto exact = exact_cds(sequence);
  auto running = uint64_t{0};
  for (auto rank = size_t{1}; rank <= sequence.distinct_count(); ++rank) {
    running += sequence.at_rank(rank);
    const auto bound = compressed.evaluate_extended(static_cast<double>(rank));
    if (!approx_le(static_cast<double>(running), bound)) {
      auto detail = std::ostringstream{};
      detail << "F(" << rank << ") = " << running << " exceeds compressed value " << bound;
      return {Violation::NotDominating, detail.str()};
    }
  }
  for (const auto& knot : compressed.knots()) {
    const auto exact_value = exact.evaluate_extended(knot.x);
    if (!approx_le(exact_value, knot.y)) {
      auto detail = std::ostringstream{};
      detail << "exact CDS " << exact_value << " exceeds compressed value " << knot.y << " at divider " << knot.x;
      return {Violation::NotDominating, detail.str()};
    }
  }

  const auto cardinality = static_cast<double>(sequence.cardinality());
  const auto end_value = compressed.evaluate_extended(static_cast<double>(sequence.distinct_count()));
  if (std::abs(end_value - cardinality) > 1e-6 * std::max(1.0, cardinality)) {
    auto detail = std::ostringstream{};
    detail << "cardinality " << end_value << " differs from exact " << cardinality;
    return {Violation::CardinalityChanged, detail.str()};
  }
  return {};
}

double sum_squared_increments(const PiecewiseLinearFn& cds, double end) {
  const auto last_rank = static_cast<int64_t>(std::ceil(std::max(end, cds.domain_end()) - 1e-12));
  auto sum = 0.0;

  // Unit intervals (i-1, i] containing a non-integer knot in their interior are evaluated directly.
  auto straddling = std::set<int64_t>{};
  for (const auto& knot : cds.knots()) {
    const auto floor = std::floor(knot.x);
    if (knot.x != floor) {
      const auto rank = static_cast<int64_t>(floor) + 1;
      if (rank <= last_rank) {
        straddling.insert(rank);
      }
    }
  }
  for (const auto rank : straddling) {
    const auto delta = cds.evaluate_extended(static_cast<double>(rank)) - cds.evaluate_extended(static_cast<double>(rank - 1));
    sum += delta * delta;
  }

  // Remaining unit intervals lie inside a single segment and increase by its slope.
  for (auto index = size_t{0}; index < cds.segment_count(); ++index) {
    const auto left = cds.knots()[index].x;
    const auto right = cds.knots()[index + 1].x;
    const auto first = static_cast<int64_t>(std::ceil(left)) + 1;
    const auto last = std::min(static_cast<int64_t>(std::floor(right)), last_rank);
    if (last >= first) {
      const auto slope = cds.slope(index);
      sum += static_cast<double>(last - first + 1) * slope * slope;
    }
  }
  return sum;
}

double compression_distance(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs) {
  const auto end = std::max(lhs.domain_end(), rhs.domain_end());
  const auto lhs_mass = sum_squared_increments(lhs, end);
  const auto rhs_mass = sum_squared_increments(rhs, end);
  if (!(lhs_mass > 0.0) || !(rhs_mass > 0.0)) {
    throw ArgumentError("compression distance is undefined for an empty sequence");
  }
  const auto joint = sum_squared_increments(pw_max(lhs, rhs), end);
  return joint / lhs_mass + joint / rhs_mass;
}

}  // namespace seqbound
