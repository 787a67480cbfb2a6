#pragma once

// Reference implementations used as independent oracles by the test suites. They work directly on integer
// frequencies and raw knot lists and share no code with the library's arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "seqbound/pw_function.hpp"
#include "seqbound/relation.hpp"

namespace support {

using Frequencies = std::vector<uint64_t>;

// Non-increasing positive frequencies: Zipf-like, uniform, or key-like.
inline Frequencies random_frequencies(std::mt19937_64& rng, size_t max_distinct = 60, uint64_t max_frequency = 200) {
  const auto distinct = std::uniform_int_distribution<size_t>{1, max_distinct}(rng);
  auto frequencies = Frequencies(distinct);
  switch (std::uniform_int_distribution<int>{0, 2}(rng)) {
    case 0: {
      const auto exponent = std::uniform_real_distribution<double>{0.3, 2.0}(rng);
      const auto top = std::uniform_int_distribution<uint64_t>{1, max_frequency}(rng);
      for (auto rank = size_t{0}; rank < distinct; ++rank) {
        frequencies[rank] = std::max<uint64_t>(
            1, static_cast<uint64_t>(std::llround(static_cast<double>(top) / std::pow(rank + 1.0, exponent))));
      }
      break;
    }
    case 1:
      for (auto& frequency : frequencies) {
        frequency = std::uniform_int_distribution<uint64_t>{1, max_frequency}(rng);
      }
      break;
    default:
      std::fill(frequencies.begin(), frequencies.end(), uint64_t{1});
      break;
  }
  std::sort(frequencies.rbegin(), frequencies.rend());
  return frequencies;
}

inline uint64_t cardinality(const Frequencies& frequencies) {
  auto total = uint64_t{0};
  for (const auto frequency : frequencies) {
    total += frequency;
  }
  return total;
}

inline uint64_t sum_of_squares(const Frequencies& frequencies) {
  auto total = uint64_t{0};
  for (const auto frequency : frequencies) {
    total += frequency * frequency;
  }
  return total;
}

// Exact CDS at an integer rank; flat past the last rank.
inline uint64_t prefix_sum(const Frequencies& frequencies, size_t rank) {
  auto total = uint64_t{0};
  for (auto index = size_t{0}; index < std::min(rank, frequencies.size()); ++index) {
    total += frequencies[index];
  }
  return total;
}

// Linear interpolation through raw knots, flat past the last one.
inline double interpolate(const std::vector<seqbound::PiecewiseLinearFn::Knot>& knots, double x) {
  if (x <= 0.0) {
    return 0.0;
  }
  for (auto index = size_t{1}; index < knots.size(); ++index) {
    if (x <= knots[index].x) {
      const auto& left = knots[index - 1];
      const auto& right = knots[index];
      return left.y + (right.y - left.y) * (x - left.x) / (right.x - left.x);
    }
  }
  return knots.back().y;
}

inline double interpolate(const seqbound::PiecewiseLinearFn& cds, double x) {
  return interpolate(cds.knots(), x);
}

// Concave, non-decreasing knots from random non-increasing slopes and random widths.
inline std::vector<seqbound::PiecewiseLinearFn::Knot> random_concave_knots(std::mt19937_64& rng,
                                                                           size_t max_segments = 8) {
  const auto segments = std::uniform_int_distribution<size_t>{1, max_segments}(rng);
  auto slopes = std::vector<double>(segments);
  for (auto& slope : slopes) {
    slope = std::uniform_int_distribution<int>{0, 40}(rng) / 4.0;
  }
  std::sort(slopes.rbegin(), slopes.rend());
  auto knots = std::vector<seqbound::PiecewiseLinearFn::Knot>{{0.0, 0.0}};
  for (const auto slope : slopes) {
    const auto width = std::uniform_int_distribution<int>{1, 16}(rng) / 4.0;
    knots.push_back({knots.back().x + width, knots.back().y + slope * width});
  }
  return knots;
}

inline seqbound::PiecewiseLinearFn random_concave(std::mt19937_64& rng, size_t max_segments = 8) {
  return seqbound::PiecewiseLinearFn{random_concave_knots(rng, max_segments)};
}

// Frequencies of the non-null values of a column among the given rows, by brute force.
inline Frequencies subset_frequencies(const seqbound::Column& column, const std::vector<size_t>& rows) {
  auto counts = std::map<std::string, uint64_t>{};
  for (const auto row : rows) {
    if (!column.is_null(row)) {
      ++counts[seqbound::value_key(column.value(row))];
    }
  }
  auto frequencies = Frequencies{};
  for (const auto& [key, count] : counts) {
    frequencies.push_back(count);
  }
  std::sort(frequencies.rbegin(), frequencies.rend());
  return frequencies;
}

// True when cds >= the exact CDS of the frequencies at every integer rank (relative tolerance).
inline bool dominates(const seqbound::PiecewiseLinearFn& cds, const Frequencies& frequencies) {
  for (auto rank = size_t{1}; rank <= frequencies.size(); ++rank) {
    const auto exact = static_cast<double>(prefix_sum(frequencies, rank));
    if (interpolate(cds, static_cast<double>(rank)) < exact - 1e-6 * std::max(1.0, exact)) {
      return false;
    }
  }
  return true;
}

inline bool close(double lhs, double rhs, double relative = 1e-9) {
  return std::abs(lhs - rhs) <= relative * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace support

namespace support {

struct ColumnData {
  std::string name;
  seqbound::ColumnKind kind;
  std::vector<seqbound::Value> values;
};

inline seqbound::Relation make_relation(const std::string& name, const std::vector<ColumnData>& columns) {
  auto relation = seqbound::Relation{name};
  for (const auto& data : columns) {
    auto column = seqbound::Column{data.name, data.kind};
    for (const auto& value : data.values) {
      column.append(value);
    }
    relation.add_column(std::move(column));
  }
  return relation;
}

inline std::vector<seqbound::Value> numbers(std::initializer_list<double> values) {
  return {values.begin(), values.end()};
}

inline std::vector<seqbound::Value> texts(std::initializer_list<const char*> values) {
  auto out = std::vector<seqbound::Value>{};
  for (const auto* value : values) {
    out.emplace_back(std::string{value});
  }
  return out;
}

}  // namespace support
