#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "seqbound/compression.hpp"
#include "seqbound/inference.hpp"
#include "seqbound/oracle.hpp"

using namespace seqbound;

namespace {

std::vector<uint64_t> zipf_frequencies(size_t distinct, double exponent, uint64_t top) {
  auto frequencies = std::vector<uint64_t>{};
  for (auto rank = size_t{0}; rank < distinct; ++rank) {
    frequencies.push_back(std::max<uint64_t>(1, static_cast<uint64_t>(top / std::pow(rank + 1.0, exponent))));
  }
  return frequencies;
}

// Six relations with two Zipf-distributed join columns and a filter column each.
std::vector<Relation> chain_database() {
  auto rng = std::mt19937_64{7};
  auto weights = std::vector<double>{};
  for (auto rank = 0; rank < 4000; ++rank) {
    weights.push_back(1.0 / std::pow(rank + 1.0, 1.1));
  }
  auto zipf = std::discrete_distribution<int>{weights.begin(), weights.end()};
  auto relations = std::vector<Relation>{};
  for (auto index = 0; index < 6; ++index) {
    auto columns = std::vector<Column>{Column{"l", ColumnKind::Numeric}, Column{"r", ColumnKind::Numeric},
                                       Column{"a", ColumnKind::Numeric}};
    for (auto row = 0; row < 30000; ++row) {
      columns[0].append(Value{static_cast<double>(zipf(rng))});
      columns[1].append(Value{static_cast<double>(zipf(rng))});
      columns[2].append(Value{static_cast<double>(row % 50)});
    }
    auto& relation = relations.emplace_back("r" + std::to_string(index));
    for (auto& column : columns) {
      relation.add_column(std::move(column));
    }
  }
  return relations;
}

StatisticsCatalog chain_catalog(const std::vector<Relation>& relations, size_t max_segments) {
  auto schema = DatabaseSchema{};
  for (const auto& relation : relations) {
    schema.roles[relation.name()] = {{"l", "r"}, {"a"}};
  }
  schema.parameters.accuracy = 1e-6;
  schema.parameters.max_segments = max_segments;
  schema.parameters.histogram_depth = 3;
  schema.parameters.mcv_size = 10;
  return build_catalog(relations, schema);
}

void BM_BoundQueryFiveJoins(benchmark::State& state) {
  static const auto relations = chain_database();
  const auto catalog = chain_catalog(relations, static_cast<size_t>(state.range(0)));
  const auto query = parse_query(
      "SELECT COUNT(*) FROM r0, r1, r2, r3, r4, r5 WHERE r0.r = r1.l AND r1.r = r2.l AND r2.r = r3.l AND "
      "r3.r = r4.l AND r4.r = r5.l AND r1.a = 7 AND r3.a BETWEEN 10 AND 20");
  auto segments = size_t{0};
  for (auto _ : state) {
    const auto result = bound_query(catalog, query);
    segments = result.input_segments;
    benchmark::DoNotOptimize(result.bound);
  }
  state.counters["K"] = static_cast<double>(segments);
}
BENCHMARK(BM_BoundQueryFiveJoins)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ValidCompress(benchmark::State& state) {
  const auto sequence = DegreeSequence{zipf_frequencies(static_cast<size_t>(state.range(0)), 1.1, 1000000)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(valid_compress(sequence, {0.01, {}}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ValidCompress)->RangeMultiplier(4)->Range(1 << 8, 1 << 16)->Complexity(benchmark::oN);

void BM_LosslessCompress(benchmark::State& state) {
  const auto sequence = DegreeSequence{zipf_frequencies(static_cast<size_t>(state.range(0)), 1.1, 1000000)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(lossless_compress(sequence));
  }
}
BENCHMARK(BM_LosslessCompress)->RangeMultiplier(4)->Range(1 << 8, 1 << 16);

void BM_BuildCatalog(benchmark::State& state) {
  static const auto relations = chain_database();
  for (auto _ : state) {
    benchmark::DoNotOptimize(chain_catalog(relations, 32));
  }
}
BENCHMARK(BM_BuildCatalog)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
