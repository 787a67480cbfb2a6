#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqbound/inference.hpp"
#include "seqbound/pw_function.hpp"
#include "seqbound/query.hpp"
#include "seqbound/relation.hpp"
#include "seqbound/stats_builder.hpp"

namespace seqbound {

// ---------------------------------------------------------------------------------------------------------------------
// Worst-case instances
// ---------------------------------------------------------------------------------------------------------------------

// Columns of integer ranks (1 = most frequent value), all of the same length.
struct WorstCaseInstance {
  std::vector<std::vector<uint64_t>> columns;

  size_t row_count() const {
    return columns.empty() ? 0 : columns.front().size();
  }

  // Numeric relation with the given column names (one per column).
  Relation to_relation(const std::string& name, std::span<const std::string> column_names) const;
};

// Lays every column out independently in frequency order and zips them: row r takes rank i in a column when
// F(i-1) < r <= F(i). Throws ArgumentError if the sequences disagree on their cardinality.
WorstCaseInstance materialize_worst_case(std::span<const DegreeSequence> sequences);

// Integer frequencies ceil(F(i) - F(i-1)) at every integer rank. The result dominates F at integer ranks.
DegreeSequence integerize(const PiecewiseLinearFn& cds);

// Integerizes every column, then pads the lighter columns with frequency-1 ranks up to the heaviest column's
// cardinality so they can be zipped; padding only adds mass, so each column still dominates its input. Throws
// ArgumentError if the input masses differ by more than 1e-6 relative.
WorstCaseInstance materialize_from_compressed(std::span<const PiecewiseLinearFn> cdss);

// Rows whose first rank is <= m1 and second rank is <= m2.
uint64_t value_tensor_probe(const WorstCaseInstance& instance, uint64_t m1, uint64_t m2);

// ---------------------------------------------------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------------------------------------------------

inline constexpr uint64_t kOracleRowCap = 10'000'000;

bool like_matches(std::string_view text, std::string_view pattern);

bool predicate_matches(const Relation& relation, size_t row, const Predicate& predicate);

// Exact bag-semantics COUNT(*) by a sequence of hash joins that project away finished variables. Variables bound to
// one column of one atom constrain nothing and are ignored. Throws OracleTooLargeError past row_cap intermediate
// entries and QueryError for unknown relations or columns.
uint64_t true_cardinality(std::span<const Relation> database, const QueryAst& query,
                          uint64_t row_cap = kOracleRowCap);

struct VerifyReport {
  uint64_t true_cardinality{0};
  uint64_t bound{0};
  // bound / true_cardinality; 1 when both are 0 and +inf when only the truth is 0.
  double ratio{1.0};
  bool pass{true};
  std::string strategy;
};

VerifyReport verify_bound(std::span<const Relation> database, const QueryAst& query, const StatisticsCatalog& catalog);

// Multiplies every stored CDS by factor: a deliberately broken catalog for negative controls.
StatisticsCatalog scale_catalog(const StatisticsCatalog& catalog, double factor);

// ---------------------------------------------------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------------------------------------------------

struct RandomDatabase {
  std::vector<Relation> relations;
  DatabaseSchema schema;
};

struct GeneratorOptions {
  size_t min_relations{2};
  size_t max_relations{4};
  size_t min_rows{10};
  size_t max_rows{200};
  double max_zipf{1.5};
  double key_column_probability{0.2};
};

// Relations r0..rn with an id key, numeric join columns j0..j2 over a shared Zipf-distributed domain (some of them
// key-like), a numeric filter column a and a 3-letter text filter column t. Some join columns stay undeclared and
// some PK-FK edges onto id are declared. Parameters are small so every statistics path gets exercised.
RandomDatabase generate_database(std::mt19937_64& rng, const GeneratorOptions& options = {});

enum class QueryShape { Acyclic, Cyclic, MultiColumn };

// SQL text over the database with 0-4 predicates drawn from every supported kind.
std::string generate_query(std::span<const Relation> database, const DatabaseSchema& schema, QueryShape shape,
                           std::mt19937_64& rng);

}  // namespace seqbound
