#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqbound/bloom_filter.hpp"
#include "seqbound/compression.hpp"
#include "seqbound/pw_function.hpp"
#include "seqbound/relation.hpp"

namespace seqbound {

// ---------------------------------------------------------------------------------------------------------------------
// Build configuration
// ---------------------------------------------------------------------------------------------------------------------

// Number of CDS groups per statistics family. Auto: ceil(members / 8), at least 4.
struct ClusterPolicy {
  std::optional<size_t> fixed_count{};

  size_t target_for(size_t member_count) const;
  std::string to_string() const;
  static ClusterPolicy parse(const std::string& text);
};

struct BuildParameters {
  double accuracy{0.01};
  std::optional<size_t> max_segments{};
  uint32_t histogram_depth{7};
  uint32_t mcv_size{1000};
  ClusterPolicy clusters{};
  double bloom_bits_per_value{12.0};

  CompressionConfig compression() const {
    return {accuracy, max_segments};
  }

  void validate() const;

  bool operator==(const BuildParameters& other) const;
};

struct ColumnRole {
  std::vector<std::string> join_columns;
  std::vector<std::string> filter_columns;
};

// fact.fk_column references the unique dim.pk_column.
struct PkFkEdge {
  std::string fact;
  std::string fk_column;
  std::string dim;
  std::string pk_column;

  bool operator==(const PkFkEdge&) const = default;
};

struct DatabaseSchema {
  std::map<std::string, ColumnRole> roles;
  std::vector<PkFkEdge> pk_fk;
  BuildParameters parameters;
};

// Name of the column a PK-FK precomputation adds to the fact relation for dim.column.
std::string propagated_column_name(const std::string& dim, const std::string& column);

// ---------------------------------------------------------------------------------------------------------------------
// CDS groups
// ---------------------------------------------------------------------------------------------------------------------

struct ClusterMember {
  uint32_t id;
  PiecewiseLinearFn cds;
};

struct CdsGroup {
  std::vector<uint32_t> member_ids;
  // Envelope-repaired pointwise maximum of the members.
  PiecewiseLinearFn representative;
  // Holds the keys of the members' filter values; empty for families that are not looked up by value.
  BloomFilter bloom;

  bool operator==(const CdsGroup&) const = default;
};

// Complete-linkage agglomerative clustering under compression_distance, merging the closest pair (lowest ids first
// on ties) until target_count groups remain. Members with zero mass share one extra group with a zero
// representative. Groups are ordered by their smallest member id. Throws ArgumentError for target_count == 0.
std::vector<CdsGroup> cluster_cds_groups(std::span<const ClusterMember> members, size_t target_count);

// Fills each group's filter with the keys of its members; member_keys is indexed by member id.
void build_bloom_index(std::vector<CdsGroup>& groups, std::span<const std::string> member_keys,
                       double bits_per_value);

// ---------------------------------------------------------------------------------------------------------------------
// Conditioned statistics
// ---------------------------------------------------------------------------------------------------------------------

inline constexpr uint32_t kEmptyGroup = std::numeric_limits<uint32_t>::max();

struct EqualityStats {
  // Groups over the MCV values; each group's Bloom filter holds its members' value keys.
  std::vector<CdsGroup> groups;
  // Envelope-repaired maximum over the compressed CDSs of all non-MCV values.
  PiecewiseLinearFn default_cds;
  // Keys of all non-MCV values, so that a lookup can tell "maybe a non-MCV value" from "not in the column".
  BloomFilter default_bloom;
  uint32_t mcv_count{0};

  bool operator==(const EqualityStats&) const = default;
};

// Nested equi-depth histograms with 2^depth, ..., 2 buckets. Level l bucket j spans finest buckets
// [j * 2^(depth-l), (j+1) * 2^(depth-l)). The finest bucket b covers [boundaries[b-1], boundaries[b]) with the
// outer buckets open towards -inf and +inf.
struct RangeStats {
  uint32_t depth{0};
  std::vector<double> boundaries;
  // bucket_groups[l - 1][j]: group id of level-l bucket j, or kEmptyGroup.
  std::vector<std::vector<uint32_t>> bucket_groups;
  std::vector<PiecewiseLinearFn> group_representatives;

  // Finest bucket holding v.
  size_t bucket_of(double value) const;

  bool operator==(const RangeStats&) const = default;
};

struct LikeStats {
  // Lower-cased MCV 3-gram -> group id.
  std::map<std::string, uint32_t> gram_groups;
  std::vector<PiecewiseLinearFn> group_representatives;
  // Envelope-repaired maximum over the CDSs conditioned on each non-MCV 3-gram.
  PiecewiseLinearFn default_cds;

  bool operator==(const LikeStats&) const = default;
};

struct ConditionedStats {
  std::optional<EqualityStats> equality;
  std::optional<RangeStats> range;
  std::optional<LikeStats> like;

  bool operator==(const ConditionedStats&) const = default;
};

struct ColumnSummary {
  ColumnKind kind{ColumnKind::Numeric};
  uint64_t null_count{0};
  uint64_t distinct_count{0};
  // Unconditioned compressed CDS; the fallback for joins on undeclared columns.
  PiecewiseLinearFn cds;

  bool operator==(const ColumnSummary&) const = default;
};

struct RelationStats {
  uint64_t row_count{0};
  std::vector<std::string> join_columns;
  std::vector<std::string> filter_columns;
  std::map<std::string, ColumnSummary> columns;
  // Keyed by (join column, filter column).
  std::map<std::pair<std::string, std::string>, ConditionedStats> conditioned;
  // Propagated column name -> (dim relation, dim column).
  std::map<std::string, std::pair<std::string, std::string>> propagated;

  bool is_join_column(const std::string& column) const;

  bool operator==(const RelationStats&) const = default;
};

struct StatisticsCatalog {
  BuildParameters parameters;
  std::map<std::string, RelationStats> relations;
  std::vector<PkFkEdge> pk_fk;

  // Throws QueryError for unknown relations.
  const RelationStats& relation(const std::string& name) const;

  bool operator==(const StatisticsCatalog&) const = default;
};

// ---------------------------------------------------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------------------------------------------------

// Values of the filter column ranked by frequency (ties by value order), with the rows holding each value.
struct ValueGroup {
  Value value;
  std::vector<uint32_t> rows;
};
std::vector<ValueGroup> group_by_value(const Column& column);

// The first mcv_size groups of group_by_value are the MCVs.
EqualityStats build_equality_stats(const Relation& relation, const std::string& join_column,
                                   const std::string& filter_column, const BuildParameters& parameters);

RangeStats build_range_stats(const Relation& relation, const std::string& join_column,
                             const std::string& filter_column, const BuildParameters& parameters);

LikeStats build_like_stats(const Relation& relation, const std::string& join_column,
                           const std::string& text_filter_column, const BuildParameters& parameters);

// Distinct lower-cased 3-grams of a string.
std::vector<std::string> extract_trigrams(const std::string& text);

std::string to_lower(std::string text);

// Fact relation extended with the given dim columns, matched through fk = pk; unmatched rows get nulls. Throws
// ConfigError if the key is not unique in dim.
Relation precompute_pk_fk(const Relation& fact, const Relation& dim, const std::string& fk_column,
                          const std::string& pk_column, std::span<const std::string> dim_columns);

struct BuildReport {
  struct RelationEntry {
    std::string name;
    double seconds{0.0};
    size_t sequences_before_clustering{0};
    size_t sequences_after_clustering{0};
  };
  std::vector<RelationEntry> relations;
  size_t audited_sequences{0};
};

// Propagates PK-FK filter columns, builds every conditioned family per (join column, filter column), clusters each
// family, and audits every compressed CDS against the exact sequence it summarizes. Throws ConfigError (aggregated)
// for schema problems and InvariantError if the audit fails.
StatisticsCatalog build_catalog(const std::vector<Relation>& database, const DatabaseSchema& schema,
                                BuildReport* report = nullptr);

}  // namespace seqbound
