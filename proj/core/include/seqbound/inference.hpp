#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqbound/pw_function.hpp"
#include "seqbound/query.hpp"
#include "seqbound/stats_builder.hpp"

namespace seqbound {

// Resolved CDS per (atom index, variable).
using ConditionedSequenceSet = std::map<std::pair<size_t, std::string>, PiecewiseLinearFn>;

struct BoundResult {
  uint64_t bound{0};
  // Unrounded FDSB value.
  double value{0.0};
  // "single-relation", "acyclic" or "min-over-<k>-spanning-trees", followed by "+<fallback>" tags.
  std::string strategy;
  std::vector<std::string> fallbacks;
  std::vector<std::string> trace;
  // Segments over all plan inputs.
  size_t input_segments{0};
};

// CDS of relation.join_column restricted to the rows satisfying the predicate (nullptr: no predicate). Filter
// columns without statistics resolve to the unconditioned CDS. Throws QueryError for an unknown relation or column
// and ArgumentError if join_column is not a declared join column.
PiecewiseLinearFn condition_sequence(const StatisticsCatalog& catalog, const std::string& relation,
                                     const std::string& join_column, const Predicate* predicate);

// Runs the plan over the given inputs and integrates the root unary. Every (atom, variable) of every atom the plan
// touches must be present, and within an atom all inputs must carry the same mass.
BoundResult fdsb(const QueryAst& query, const BoundPlan& plan, const ConditionedSequenceSet& inputs,
                 bool with_trace = false);

struct BoundOptions {
  bool trace{false};
  size_t max_spanning_trees{kMaxSpanningTrees};
};

// Full online pipeline: PK-FK predicate rewriting, multi-column merging, per-atom conditioning, fallback handling
// for undeclared join columns, and the minimum over spanning trees for cyclic queries. Throws QueryError for unknown
// names and UnsupportedQueryError for disconnected queries.
BoundResult bound_query(const StatisticsCatalog& catalog, const QueryAst& query, const BoundOptions& options = {});

// The plan inputs bound_query would use for an acyclic, merged query; exposed for tests and benchmarks.
ConditionedSequenceSet resolve_inputs(const StatisticsCatalog& catalog, const QueryAst& query,
                                      std::vector<std::string>* fallbacks = nullptr);

}  // namespace seqbound
