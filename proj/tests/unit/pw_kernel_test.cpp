#include <gtest/gtest.h>

#include <random>

#include "../support.hpp"
#include "seqbound/compression.hpp"
#include "seqbound/errors.hpp"
#include "seqbound/pw_function.hpp"

using namespace seqbound;
using Knot = PiecewiseLinearFn::Knot;

namespace {

const std::vector<uint64_t> kSkewed{4, 2, 2, 1, 1, 1};

PiecewiseLinearFn knee_cds() {
  // Slope 4 up to 2.75, then flat at 11.
  return PiecewiseLinearFn{{{0, 0}, {2.75, 11}, {6, 11}}};
}

PiecewiseConstantFn unit_steps(const std::vector<uint64_t>& frequencies) {
  auto segments = std::vector<PiecewiseConstantFn::Segment>{};
  for (auto rank = size_t{0}; rank < frequencies.size(); ++rank) {
    segments.push_back({static_cast<double>(rank + 1), static_cast<double>(frequencies[rank])});
  }
  return PiecewiseConstantFn{segments};
}

}  // namespace

TEST(DegreeSequence, RejectsIncreasingOrZeroFrequencies) {
  EXPECT_THROW(DegreeSequence({1, 2}), InvariantError);
  EXPECT_THROW(DegreeSequence({2, 0}), InvariantError);
  const auto sequence = DegreeSequence::from_counts({1, 0, 4, 2});
  EXPECT_EQ(sequence.frequencies(), (std::vector<uint64_t>{4, 2, 1}));
  EXPECT_EQ(sequence.cardinality(), 7u);
  EXPECT_EQ(sequence.at_rank(1), 4u);
  EXPECT_EQ(sequence.at_rank(4), 0u);
}

TEST(Evaluate, Examples) {
  EXPECT_EQ(evaluate(knee_cds(), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(evaluate(knee_cds(), 6.0), 11.0);
  const auto two_segments = PiecewiseLinearFn{{{0, 0}, {1, 4}, {4, 10}}};
  EXPECT_DOUBLE_EQ(evaluate(two_segments, 2.5), 7.0);
  EXPECT_THROW(evaluate(two_segments, 4.5), DomainError);
  EXPECT_THROW(evaluate(two_segments, -0.5), DomainError);
  EXPECT_DOUBLE_EQ(two_segments.evaluate_extended(9.0), 10.0);
}

TEST(Cumulate, Examples) {
  const auto key = cumulate(PiecewiseConstantFn{{{5.0, 1.0}}});
  EXPECT_DOUBLE_EQ(evaluate(key, 5.0), 5.0);
  EXPECT_EQ(key.segment_count(), 1u);

  const auto exact = cumulate(unit_steps(kSkewed));
  EXPECT_DOUBLE_EQ(evaluate(exact, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(evaluate(exact, 2.0), 6.0);
  EXPECT_DOUBLE_EQ(evaluate(exact, 6.0), 11.0);

  const auto knee = cumulate(PiecewiseConstantFn{{{2.75, 4.0}, {6.0, 0.0}}});
  EXPECT_DOUBLE_EQ(evaluate(knee, 6.0), 11.0);
  EXPECT_EQ(knee, knee_cds());
}

TEST(DiscreteDerivative, Examples) {
  const auto slope_one = PiecewiseLinearFn{{{0, 0}, {5, 5}}};
  EXPECT_EQ(discrete_derivative(slope_one), (PiecewiseConstantFn{{{5.0, 1.0}}}));
  const auto knee = discrete_derivative(knee_cds());
  ASSERT_EQ(knee.segment_count(), 2u);
  EXPECT_DOUBLE_EQ(knee.value_at(1.0), 4.0);
  EXPECT_DOUBLE_EQ(knee.value_at(3.0), 0.0);
  EXPECT_THROW(discrete_derivative(PiecewiseLinearFn{{{0, 0}, {1, 1}, {2, 4}}}), InvariantError);
}

TEST(DiscreteDerivative, RoundTripsThroughCumulate) {
  auto rng = std::mt19937_64{11};
  for (auto trial = 0; trial < 1000; ++trial) {
    const auto knots = support::random_concave_knots(rng);
    const auto cds = PiecewiseLinearFn{knots};
    const auto back = cumulate(discrete_derivative(cds));
    for (auto sample = 0; sample <= 40; ++sample) {
      const auto x = cds.domain_end() * sample / 40.0;
      ASSERT_TRUE(support::close(support::interpolate(back, x), support::interpolate(knots, x)));
    }
  }
}

TEST(Inverse, Examples) {
  const auto slope_four = PiecewiseLinearFn{{{0, 0}, {3, 12}}};
  EXPECT_DOUBLE_EQ(inverse(slope_four, 8.0), 2.0);
  EXPECT_DOUBLE_EQ(inverse(slope_four, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(inverse(knee_cds(), 11.0), 2.75);
  EXPECT_THROW(inverse(knee_cds(), 11.5), RangeError);
}

TEST(Inverse, NeverUndershoots) {
  auto rng = std::mt19937_64{12};
  for (auto trial = 0; trial < 200; ++trial) {
    const auto cds = support::random_concave(rng);
    for (auto sample = 0; sample <= 50; ++sample) {
      const auto y = cds.total() * sample / 50.0;
      const auto x = inverse(cds, y);
      EXPECT_GE(support::interpolate(cds, x), y - 1e-9 * std::max(1.0, y));
      // Smallest preimage: slightly to the left the function is below y.
      if (x > 1e-6 && y > 0) {
        EXPECT_LT(support::interpolate(cds, x - 1e-6), y + 1e-9 * std::max(1.0, y));
      }
    }
  }
}

TEST(PwMultiply, Examples) {
  const auto exact = unit_steps(kSkewed);
  EXPECT_EQ(pw_multiply(exact, PiecewiseConstantFn{{{6.0, 1.0}}}), exact);
  EXPECT_EQ(pw_multiply(exact, exact), unit_steps({16, 4, 4, 1, 1, 1}));
  const auto step = PiecewiseConstantFn{{{2.75, 4.0}, {6.0, 0.0}}};
  EXPECT_EQ(pw_multiply(step, step), (PiecewiseConstantFn{{{2.75, 16.0}, {6.0, 0.0}}}));
}

TEST(PwMultiply, MatchesPointwiseProduct) {
  auto rng = std::mt19937_64{13};
  for (auto trial = 0; trial < 200; ++trial) {
    const auto lhs = discrete_derivative(support::random_concave(rng));
    const auto rhs = discrete_derivative(support::random_concave(rng));
    const auto product = pw_multiply(lhs, rhs);
    EXPECT_LE(product.segment_count(), lhs.segment_count() + rhs.segment_count());
    const auto end = std::min(lhs.domain_end(), rhs.domain_end());
    for (auto sample = 1; sample <= 97; ++sample) {
      const auto x = end * sample / 97.0;
      EXPECT_TRUE(support::close(product.value_at(x), lhs.value_at(x) * rhs.value_at(x)));
    }
  }
}

TEST(ComposeBetaFactor, Examples) {
  const auto anchor = cumulate(unit_steps(kSkewed));
  const auto child = unit_steps(kSkewed);
  EXPECT_EQ(compose_beta_factor(child, anchor, anchor), child);

  const auto key_other = PiecewiseLinearFn{{{0, 0}, {11, 11}}};
  EXPECT_EQ(compose_beta_factor(PiecewiseConstantFn{{{11.0, 1.0}}}, key_other, anchor),
            (PiecewiseConstantFn{{{6.0, 1.0}}}));

  // R(X0, X1) with f_X0 = [2,1] and f_X1 = [3]: every X0 rank maps into X1 rank 1.
  const auto x0 = cumulate(unit_steps({2, 1}));
  const auto x1 = cumulate(unit_steps({3}));
  EXPECT_EQ(compose_beta_factor(unit_steps({3}), x1, x0), (PiecewiseConstantFn{{{2.0, 3.0}}}));

  const auto heavier = cumulate(unit_steps({5, 5}));
  EXPECT_THROW(compose_beta_factor(unit_steps({3}), x1, heavier), CatalogInconsistencyError);
}

TEST(ComposeBetaFactor, SelfCompositionIsIdentity) {
  auto rng = std::mt19937_64{14};
  for (auto trial = 0; trial < 200; ++trial) {
    const auto cds = support::random_concave(rng);
    if (cds.total() == 0.0) {
      continue;
    }
    const auto child = discrete_derivative(cds);
    const auto factor = compose_beta_factor(child, cds, cds);
    for (auto sample = 1; sample < 60; ++sample) {
      const auto x = cds.flat_start() * sample / 60.0;
      EXPECT_TRUE(support::close(factor.value_at(x), child.value_at(x)));
    }
  }
}

TEST(PointwiseCombinators, Examples) {
  const auto line = PiecewiseLinearFn{{{0, 0}, {4, 4}}};
  const auto single = std::vector<PiecewiseLinearFn>{knee_cds()};
  EXPECT_EQ(pw_min(single), knee_cds());
  EXPECT_EQ(pw_sum(std::vector<PiecewiseLinearFn>{line, line, line}), (PiecewiseLinearFn{{{0, 0}, {4, 12}}}));
  EXPECT_THROW(pw_min(std::vector<PiecewiseLinearFn>{}), ArgumentError);
  EXPECT_THROW(pw_max(std::vector<PiecewiseLinearFn>{}), ArgumentError);
  EXPECT_THROW(pw_sum(std::vector<PiecewiseLinearFn>{}), ArgumentError);

  const auto first = PiecewiseLinearFn{{{0, 0}, {2, 8}, {6, 8}}};
  const auto second = PiecewiseLinearFn{{{0, 0}, {5, 10}, {6, 10}}};
  const auto maximum = pw_max(first, second);
  for (auto sample = 0; sample <= 100; ++sample) {
    const auto x = 6.0 * sample / 100.0;
    EXPECT_GE(support::interpolate(maximum, x) + 1e-9,
              std::max(support::interpolate(first, x), support::interpolate(second, x)));
  }
}

TEST(PointwiseCombinators, Properties) {
  auto rng = std::mt19937_64{15};
  for (auto trial = 0; trial < 100; ++trial) {
    const auto lhs = support::random_concave(rng);
    const auto rhs = support::random_concave(rng);
    const auto minimum = pw_min(lhs, rhs);
    const auto maximum = pw_max(lhs, rhs);
    const auto envelope = concave_max(std::vector<PiecewiseLinearFn>{lhs, rhs});
    const auto sum = pw_sum(lhs, rhs);
    EXPECT_TRUE(minimum.is_concave());
    EXPECT_TRUE(sum.is_concave());
    EXPECT_TRUE(envelope.is_concave());
    const auto end = std::max(lhs.domain_end(), rhs.domain_end());
    for (auto sample = 0; sample <= 1000; ++sample) {
      const auto x = end * sample / 1000.0;
      const auto a = support::interpolate(lhs, x);
      const auto b = support::interpolate(rhs, x);
      ASSERT_LE(support::interpolate(minimum, x), std::min(a, b) + 1e-9 * std::max(1.0, std::min(a, b)));
      ASSERT_TRUE(support::close(support::interpolate(minimum, x), std::min(a, b)));
      ASSERT_TRUE(support::close(support::interpolate(maximum, x), std::max(a, b)));
      ASSERT_GE(support::interpolate(envelope, x), std::max(a, b) - 1e-9 * std::max(1.0, std::max(a, b)));
      ASSERT_TRUE(support::close(support::interpolate(sum, x), a + b));
    }
  }
}

TEST(TruncateCds, Examples) {
  EXPECT_EQ(truncate_cds(knee_cds(), 20.0), knee_cds());
  const auto zero = truncate_cds(knee_cds(), 0.0);
  EXPECT_EQ(zero.total(), 0.0);
  const auto capped = truncate_cds(knee_cds(), 6.0);
  EXPECT_DOUBLE_EQ(capped.total(), 6.0);
  EXPECT_DOUBLE_EQ(capped.flat_start(), inverse(knee_cds(), 6.0));
  EXPECT_DOUBLE_EQ(evaluate(capped, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(evaluate(capped, 5.0), 6.0);
}

TEST(UpperConcaveEnvelope, IsSmallestConcaveMajorant) {
  const auto raw = PiecewiseLinearFn{{{0, 0}, {1, 2}, {2, 2}, {3, 6}}};
  const auto envelope = upper_concave_envelope(raw);
  EXPECT_EQ(envelope, (PiecewiseLinearFn{{{0, 0}, {3, 6}}}));
}
