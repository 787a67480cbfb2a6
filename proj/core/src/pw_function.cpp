#include "seqbound/pw_function.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

double scale_of(double a, double b) {
  return std::max({1.0, std::abs(a), std::abs(b)});
}

// Knots whose x differ by less than this (relative) are treated as the same point.
constexpr double kKnotMergeTolerance = 1e-12;

bool collinear(const PiecewiseLinearFn::Knot& a, const PiecewiseLinearFn::Knot& b, const PiecewiseLinearFn::Knot& c) {
  const auto dx1 = b.x - a.x;
  const auto dy1 = b.y - a.y;
  const auto dx2 = c.x - a.x;
  const auto dy2 = c.y - a.y;
  const auto cross = dx1 * dy2 - dy1 * dx2;
  return std::abs(cross) <= 1e-12 * (std::abs(dx1 * dy2) + std::abs(dy1 * dx2));
}

// Union of the knot abscissae of both functions, up to the larger domain end.
std::vector<double> merged_abscissae(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs) {
  auto xs = std::vector<double>{};
  xs.reserve(lhs.knots().size() + rhs.knots().size());
  for (const auto& knot : lhs.knots()) {
    xs.push_back(knot.x);
  }
  for (const auto& knot : rhs.knots()) {
    xs.push_back(knot.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Pointwise min or max of two continuous piecewise linear functions, inserting crossing points.
PiecewiseLinearFn pointwise_select(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs, bool take_max) {
  const auto xs = merged_abscissae(lhs, rhs);
  const auto pick = [&](double a, double b) { return take_max ? std::max(a, b) : std::min(a, b); };

  auto knots = std::vector<PiecewiseLinearFn::Knot>{};
  knots.reserve(xs.size() * 2);
  auto previous_x = xs.front();
  auto previous_diff = lhs.evaluate_extended(previous_x) - rhs.evaluate_extended(previous_x);
  knots.push_back({0.0, 0.0});
  for (auto index = size_t{1}; index < xs.size(); ++index) {
    const auto x = xs[index];
    const auto a = lhs.evaluate_extended(x);
    const auto b = rhs.evaluate_extended(x);
    const auto diff = a - b;
    if ((previous_diff < 0.0 && diff > 0.0) || (previous_diff > 0.0 && diff < 0.0)) {
      const auto t = previous_diff / (previous_diff - diff);
      const auto crossing = previous_x + (x - previous_x) * t;
      if (crossing > previous_x && crossing < x) {
        knots.push_back({crossing, pick(lhs.evaluate_extended(crossing), rhs.evaluate_extended(crossing))});
      }
    }
    knots.push_back({x, pick(a, b)});
    previous_x = x;
    previous_diff = diff;
  }
  return PiecewiseLinearFn{std::move(knots)};
}

template <typename Fold>
PiecewiseLinearFn fold_functions(std::span<const PiecewiseLinearFn> functions, const char* name, Fold&& fold) {
  if (functions.empty()) {
    throw ArgumentError(std::string{name} + " requires at least one function");
  }
  auto result = functions.front();
  for (auto index = size_t{1}; index < functions.size(); ++index) {
    result = fold(result, functions[index]);
  }
  return result;
}

}  // namespace

bool approx_le(double a, double b) {
  return a <= b + kTolerance * scale_of(a, b);
}

bool approx_eq(double a, double b) {
  return std::abs(a - b) <= kTolerance * scale_of(a, b);
}

// --- DegreeSequence ---

DegreeSequence::DegreeSequence(std::vector<uint64_t> frequencies) : _frequencies(std::move(frequencies)) {
  for (auto index = size_t{0}; index < _frequencies.size(); ++index) {
    if (_frequencies[index] == 0) {
      throw InvariantError("degree sequence frequencies must be positive");
    }
    if (index > 0 && _frequencies[index] > _frequencies[index - 1]) {
      throw InvariantError("degree sequence must be non-increasing");
    }
    _cardinality += _frequencies[index];
  }
}

DegreeSequence DegreeSequence::from_counts(std::vector<uint64_t> counts) {
  std::erase(counts, uint64_t{0});
  std::sort(counts.begin(), counts.end(), std::greater<>{});
  return DegreeSequence{std::move(counts)};
}

uint64_t DegreeSequence::at_rank(size_t rank) const {
  if (rank == 0 || rank > _frequencies.size()) {
    return 0;
  }
  return _frequencies[rank - 1];
}

// --- PiecewiseConstantFn ---

PiecewiseConstantFn::PiecewiseConstantFn() : _segments{{1.0, 0.0}} {}

PiecewiseConstantFn::PiecewiseConstantFn(std::vector<Segment> segments) {
  _segments.reserve(segments.size());
  auto previous_edge = 0.0;
  for (auto segment : segments) {
    if (!(segment.right_edge > previous_edge)) {
      continue;
    }
    if (!std::isfinite(segment.value) || !std::isfinite(segment.right_edge)) {
      throw InvariantError("piecewise constant function must be finite");
    }
    if (segment.value < 0.0) {
      if (!approx_le(0.0, segment.value)) {
        throw InvariantError("piecewise constant function must be non-negative");
      }
      segment.value = 0.0;
    }
    if (!_segments.empty()) {
      auto& last = _segments.back();
      if (segment.value > last.value) {
        if (!approx_le(segment.value, last.value)) {
          throw InvariantError("piecewise constant function must be non-increasing");
        }
        segment.value = last.value;
      }
      if (segment.value == last.value) {
        last.right_edge = segment.right_edge;
        previous_edge = segment.right_edge;
        continue;
      }
    }
    _segments.push_back(segment);
    previous_edge = segment.right_edge;
  }
  if (_segments.empty()) {
    _segments.push_back({1.0, 0.0});
  }
}

PiecewiseConstantFn PiecewiseConstantFn::zero(double domain_end) {
  return PiecewiseConstantFn{{{domain_end > 0.0 ? domain_end : 1.0, 0.0}}};
}

double PiecewiseConstantFn::value_at(double x) const {
  if (x > domain_end()) {
    return 0.0;
  }
  const auto it = std::lower_bound(_segments.begin(), _segments.end(), x,
                                   [](const Segment& segment, double rank) { return segment.right_edge < rank; });
  return it == _segments.end() ? 0.0 : it->value;
}

double PiecewiseConstantFn::integral() const {
  auto sum = 0.0;
  auto left = 0.0;
  for (const auto& segment : _segments) {
    sum += segment.value * (segment.right_edge - left);
    left = segment.right_edge;
  }
  return sum;
}

// --- PiecewiseLinearFn ---

PiecewiseLinearFn::PiecewiseLinearFn() : _knots{{0.0, 0.0}, {1.0, 0.0}} {}

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<Knot> knots) {
  if (knots.empty() || knots.front().x != 0.0 || knots.front().y != 0.0) {
    throw InvariantError("piecewise linear CDS must start at (0, 0)");
  }
  _knots.reserve(knots.size());
  _knots.push_back({0.0, 0.0});
  for (auto index = size_t{1}; index < knots.size(); ++index) {
    auto knot = knots[index];
    if (!std::isfinite(knot.x) || !std::isfinite(knot.y)) {
      throw InvariantError("piecewise linear CDS must be finite");
    }
    auto& last = _knots.back();
    if (knot.y < last.y) {
      if (!approx_le(last.y, knot.y)) {
        throw InvariantError("piecewise linear CDS must be non-decreasing");
      }
      knot.y = last.y;
    }
    if (knot.x <= last.x + kKnotMergeTolerance * std::max(1.0, std::abs(knot.x))) {
      if (knot.x < last.x - kKnotMergeTolerance * std::max(1.0, std::abs(knot.x))) {
        throw InvariantError("piecewise linear CDS knots must be increasing in x");
      }
      if (!approx_eq(knot.y, last.y)) {
        throw InvariantError("piecewise linear CDS must be continuous");
      }
      if (_knots.size() > 1) {
        last.x = std::max(last.x, knot.x);
        last.y = std::max(last.y, knot.y);
      }
      continue;
    }
    _knots.push_back(knot);
  }
  if (_knots.size() == 1) {
    _knots.push_back({1.0, 0.0});
  }

  // Drop collinear interior knots.
  auto compact = std::vector<Knot>{};
  compact.reserve(_knots.size());
  for (const auto& knot : _knots) {
    while (compact.size() >= 2 && collinear(compact[compact.size() - 2], compact.back(), knot)) {
      compact.pop_back();
    }
    compact.push_back(knot);
  }
  _knots = std::move(compact);
}

PiecewiseLinearFn PiecewiseLinearFn::zero(double domain_end) {
  return PiecewiseLinearFn{{{0.0, 0.0}, {domain_end > 0.0 ? domain_end : 1.0, 0.0}}};
}

std::vector<PiecewiseLinearFn::Segment> PiecewiseLinearFn::segments() const {
  auto result = std::vector<Segment>{};
  result.reserve(segment_count());
  for (auto index = size_t{0}; index + 1 < _knots.size(); ++index) {
    result.push_back({_knots[index].x, _knots[index + 1].x, slope(index), _knots[index].y});
  }
  return result;
}

double PiecewiseLinearFn::slope(size_t segment) const {
  const auto& left = _knots[segment];
  const auto& right = _knots[segment + 1];
  return (right.y - left.y) / (right.x - left.x);
}

bool PiecewiseLinearFn::is_concave() const {
  for (auto index = size_t{1}; index + 1 < _knots.size(); ++index) {
    if (!approx_le(slope(index), slope(index - 1))) {
      return false;
    }
  }
  return true;
}

double PiecewiseLinearFn::flat_start() const {
  const auto top = total();
  const auto it = std::lower_bound(_knots.begin(), _knots.end(), top,
                                   [](const Knot& knot, double value) { return knot.y < value; });
  return it->x;
}

double PiecewiseLinearFn::evaluate(double x) const {
  if (x < 0.0 || !approx_le(x, domain_end())) {
    throw DomainError("rank " + std::to_string(x) + " outside CDS domain [0, " + std::to_string(domain_end()) + "]");
  }
  return evaluate_extended(x);
}

double PiecewiseLinearFn::evaluate_extended(double x) const {
  if (x <= 0.0) {
    return 0.0;
  }
  if (x >= domain_end()) {
    return total();
  }
  const auto it =
      std::lower_bound(_knots.begin(), _knots.end(), x, [](const Knot& knot, double rank) { return knot.x < rank; });
  if (it->x == x) {
    return it->y;
  }
  const auto& right = *it;
  const auto& left = *(it - 1);
  return left.y + (right.y - left.y) * ((x - left.x) / (right.x - left.x));
}

double PiecewiseLinearFn::inverse(double y) const {
  if (y <= 0.0) {
    return 0.0;
  }
  if (y >= total()) {
    if (!approx_le(y, total())) {
      throw RangeError("value " + std::to_string(y) + " exceeds CDS total " + std::to_string(total()));
    }
    return flat_start();
  }
  const auto it =
      std::lower_bound(_knots.begin(), _knots.end(), y, [](const Knot& knot, double value) { return knot.y < value; });
  if (it->y == y) {
    return it->x;
  }
  const auto& right = *it;
  const auto& left = *(it - 1);
  return left.x + (right.x - left.x) * ((y - left.y) / (right.y - left.y));
}

// --- free functions ---

double evaluate(const PiecewiseLinearFn& cds, double x) {
  return cds.evaluate(x);
}

double inverse(const PiecewiseLinearFn& cds, double y) {
  return cds.inverse(y);
}

PiecewiseLinearFn cumulate(const PiecewiseConstantFn& ds) {
  auto knots = std::vector<PiecewiseLinearFn::Knot>{};
  knots.reserve(ds.segment_count() + 1);
  knots.push_back({0.0, 0.0});
  auto left = 0.0;
  auto running = 0.0;
  for (const auto& segment : ds.segments()) {
    running += segment.value * (segment.right_edge - left);
    knots.push_back({segment.right_edge, running});
    left = segment.right_edge;
  }
  return PiecewiseLinearFn{std::move(knots)};
}

PiecewiseConstantFn discrete_derivative(const PiecewiseLinearFn& cds) {
  if (!cds.is_concave()) {
    throw InvariantError("discrete derivative requires a concave CDS");
  }
  auto segments = std::vector<PiecewiseConstantFn::Segment>{};
  segments.reserve(cds.segment_count());
  auto ceiling = std::numeric_limits<double>::infinity();
  for (auto index = size_t{0}; index < cds.segment_count(); ++index) {
    // Concavity holds within tolerance; clamp so the step function is exactly non-increasing.
    const auto value = std::min(cds.slope(index), ceiling);
    segments.push_back({cds.knots()[index + 1].x, value});
    ceiling = value;
  }
  return PiecewiseConstantFn{std::move(segments)};
}

PiecewiseConstantFn pw_multiply(const PiecewiseConstantFn& lhs, const PiecewiseConstantFn& rhs) {
  const auto end = std::min(lhs.domain_end(), rhs.domain_end());
  const auto& a = lhs.segments();
  const auto& b = rhs.segments();
  auto result = std::vector<PiecewiseConstantFn::Segment>{};
  result.reserve(a.size() + b.size());
  auto ia = size_t{0};
  auto ib = size_t{0};
  while (ia < a.size() && ib < b.size()) {
    const auto edge = std::min({a[ia].right_edge, b[ib].right_edge, end});
    result.push_back({edge, a[ia].value * b[ib].value});
    if (edge >= end) {
      break;
    }
    if (a[ia].right_edge == edge) {
      ++ia;
    }
    if (b[ib].right_edge == edge) {
      ++ib;
    }
  }
  return PiecewiseConstantFn{std::move(result)};
}

PiecewiseConstantFn compose_beta_factor(const PiecewiseConstantFn& child, const PiecewiseLinearFn& other_cds,
                                        const PiecewiseLinearFn& anchor_cds) {
  const auto anchor_mass = anchor_cds.total();
  const auto other_mass = other_cds.total();
  if (anchor_mass > other_mass && std::abs(anchor_mass - other_mass) > 1e-6 * std::max(1.0, other_mass)) {
    throw CatalogInconsistencyError("anchor CDS mass " + std::to_string(anchor_mass) + " exceeds sibling CDS mass " +
                                    std::to_string(other_mass));
  }

  const auto flat_start = anchor_cds.flat_start();
  const auto domain_end = anchor_cds.domain_end();
  // Mass of the sibling column covered by the child's whole domain; if that is (numerically) all of it, the last
  // child segment absorbs any rounding gap against the anchor's mass.
  const auto child_covers_all = approx_le(other_mass, other_cds.evaluate_extended(child.domain_end()));

  auto segments = std::vector<PiecewiseConstantFn::Segment>{};
  segments.reserve(child.segment_count() + 2);
  auto covered = 0.0;
  const auto& child_segments = child.segments();
  for (auto index = size_t{0}; index < child_segments.size() && covered < flat_start; ++index) {
    const auto& segment = child_segments[index];
    const auto is_last = index + 1 == child_segments.size();
    const auto mass = other_cds.evaluate_extended(segment.right_edge);
    auto edge = flat_start;
    if (!(is_last && child_covers_all) && mass < anchor_mass) {
      edge = std::min(anchor_cds.inverse(mass), flat_start);
    }
    if (edge > covered) {
      segments.push_back({edge, segment.value});
      covered = edge;
    }
  }
  if (covered < flat_start) {
    segments.push_back({flat_start, 0.0});
  }
  if (flat_start < domain_end) {
    segments.push_back({domain_end, 0.0});
  }
  if (segments.empty()) {
    return PiecewiseConstantFn::zero(domain_end);
  }
  return PiecewiseConstantFn{std::move(segments)};
}

PiecewiseLinearFn pw_min(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs) {
  return pointwise_select(lhs, rhs, false);
}

PiecewiseLinearFn pw_max(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs) {
  return pointwise_select(lhs, rhs, true);
}

PiecewiseLinearFn pw_sum(const PiecewiseLinearFn& lhs, const PiecewiseLinearFn& rhs) {
  const auto xs = merged_abscissae(lhs, rhs);
  auto knots = std::vector<PiecewiseLinearFn::Knot>{};
  knots.reserve(xs.size());
  for (const auto x : xs) {
    knots.push_back({x, x == 0.0 ? 0.0 : lhs.evaluate_extended(x) + rhs.evaluate_extended(x)});
  }
  return PiecewiseLinearFn{std::move(knots)};
}

PiecewiseLinearFn pw_min(std::span<const PiecewiseLinearFn> functions) {
  return fold_functions(functions, "pw_min", [](const auto& a, const auto& b) { return pw_min(a, b); });
}

PiecewiseLinearFn pw_max(std::span<const PiecewiseLinearFn> functions) {
  return fold_functions(functions, "pw_max", [](const auto& a, const auto& b) { return pw_max(a, b); });
}

PiecewiseLinearFn pw_sum(std::span<const PiecewiseLinearFn> functions) {
  return fold_functions(functions, "pw_sum", [](const auto& a, const auto& b) { return pw_sum(a, b); });
}

PiecewiseLinearFn upper_concave_envelope(const PiecewiseLinearFn& function) {
  if (function.is_concave()) {
    return function;
  }
  auto hull = std::vector<PiecewiseLinearFn::Knot>{};
  hull.reserve(function.knots().size());
  for (const auto& knot : function.knots()) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const auto cross = (b.x - a.x) * (knot.y - a.y) - (b.y - a.y) * (knot.x - a.x);
      if (cross < 0.0) {
        break;
      }
      hull.pop_back();
    }
    hull.push_back(knot);
  }
  return PiecewiseLinearFn{std::move(hull)};
}

PiecewiseLinearFn concave_max(std::span<const PiecewiseLinearFn> functions) {
  return fold_functions(functions, "concave_max",
                        [](const auto& a, const auto& b) { return upper_concave_envelope(pw_max(a, b)); });
}

PiecewiseLinearFn truncate_cds(const PiecewiseLinearFn& cds, double cap) {
  if (cap >= cds.total()) {
    return cds;
  }
  if (cap <= 0.0) {
    return PiecewiseLinearFn::zero(cds.domain_end());
  }
  const auto knee = cds.inverse(cap);
  auto knots = std::vector<PiecewiseLinearFn::Knot>{};
  for (const auto& knot : cds.knots()) {
    if (knot.x >= knee) {
      break;
    }
    knots.push_back(knot);
  }
  knots.push_back({knee, cap});
  if (knee < cds.domain_end()) {
    knots.push_back({cds.domain_end(), cap});
  }
  return PiecewiseLinearFn{std::move(knots)};
}

}  // namespace seqbound
