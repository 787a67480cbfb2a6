#include "seqbound/stats_builder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

// Compresses the join-column sequence of a row subset and checks the result against the exact sequence.
class SubsetCompressor {
 public:
  explicit SubsetCompressor(const BuildParameters& parameters) : _config(parameters.compression()) {}

  PiecewiseLinearFn compress(const Column& join_column, std::span<const uint32_t> rows) {
    return compress(degree_sequence_of(join_column, rows));
  }

  PiecewiseLinearFn compress(const DegreeSequence& sequence) {
    auto cds = valid_compress(sequence, _config);
    const auto report = is_valid_compression(sequence, cds);
    if (!report) {
      throw InvariantError("build audit failed: " + report.detail);
    }
    ++_audited;
    return cds;
  }

  size_t audited() const {
    return _audited;
  }

 private:
  CompressionConfig _config;
  size_t _audited{0};
};

PiecewiseLinearFn fold_concave_max(std::vector<PiecewiseLinearFn>& functions) {
  if (functions.empty()) {
    return PiecewiseLinearFn::zero();
  }
  return concave_max(functions);
}

EqualityStats equality_stats(const Relation& relation, const std::string& join_column,
                             const std::string& filter_column, const BuildParameters& parameters,
                             SubsetCompressor& compressor) {
  const auto& join = relation.column(join_column);
  const auto groups = group_by_value(relation.column(filter_column));
  const auto mcv_count = std::min<size_t>(parameters.mcv_size, groups.size());

  auto members = std::vector<ClusterMember>{};
  auto member_keys = std::vector<std::string>{};
  members.reserve(mcv_count);
  for (auto index = size_t{0}; index < mcv_count; ++index) {
    members.push_back({static_cast<uint32_t>(index), compressor.compress(join, groups[index].rows)});
    member_keys.push_back(value_key(groups[index].value));
  }

  auto stats = EqualityStats{};
  stats.mcv_count = static_cast<uint32_t>(mcv_count);
  if (!members.empty()) {
    stats.groups = cluster_cds_groups(members, parameters.clusters.target_for(members.size()));
    build_bloom_index(stats.groups, member_keys, parameters.bloom_bits_per_value);
  }

  auto defaults = std::vector<PiecewiseLinearFn>{};
  auto default_keys = std::vector<std::string>{};
  for (auto index = mcv_count; index < groups.size(); ++index) {
    defaults.push_back(compressor.compress(join, groups[index].rows));
    default_keys.push_back(value_key(groups[index].value));
  }
  stats.default_cds = fold_concave_max(defaults);
  stats.default_bloom = BloomFilter::build(default_keys, parameters.bloom_bits_per_value);
  return stats;
}

RangeStats range_stats(const Relation& relation, const std::string& join_column, const std::string& filter_column,
                       const BuildParameters& parameters, SubsetCompressor& compressor) {
  const auto& join = relation.column(join_column);
  const auto& filter = relation.column(filter_column);
  if (filter.kind() != ColumnKind::Numeric) {
    throw ConfigError("range statistics need a numeric filter column, got '" + filter_column + "'");
  }
  if (parameters.histogram_depth < 1 || parameters.histogram_depth > 20) {
    throw ConfigError("histogram depth must be in [1, 20]");
  }

  auto stats = RangeStats{};
  stats.depth = parameters.histogram_depth;
  const auto bucket_count = size_t{1} << stats.depth;

  auto sorted = std::vector<double>{};
  sorted.reserve(filter.size());
  for (auto row = size_t{0}; row < filter.size(); ++row) {
    if (!filter.is_null(row)) {
      sorted.push_back(filter.number(row));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  stats.boundaries.resize(bucket_count - 1, 0.0);
  if (!sorted.empty()) {
    for (auto boundary = size_t{1}; boundary < bucket_count; ++boundary) {
      stats.boundaries[boundary - 1] = sorted[boundary * sorted.size() / bucket_count];
    }
  }

  auto finest_rows = std::vector<std::vector<uint32_t>>(bucket_count);
  for (auto row = uint32_t{0}; row < filter.size(); ++row) {
    if (!filter.is_null(row)) {
      finest_rows[stats.bucket_of(filter.number(row))].push_back(row);
    }
  }

  auto members = std::vector<ClusterMember>{};
  auto member_slots = std::vector<std::pair<size_t, size_t>>{};
  stats.bucket_groups.resize(stats.depth);
  for (auto level = stats.depth; level >= 1; --level) {
    const auto buckets = size_t{1} << level;
    const auto span = bucket_count / buckets;
    auto& groups = stats.bucket_groups[level - 1];
    groups.assign(buckets, kEmptyGroup);
    for (auto bucket = size_t{0}; bucket < buckets; ++bucket) {
      auto rows = std::vector<uint32_t>{};
      for (auto finest = bucket * span; finest < (bucket + 1) * span; ++finest) {
        rows.insert(rows.end(), finest_rows[finest].begin(), finest_rows[finest].end());
      }
      if (rows.empty()) {
        continue;
      }
      members.push_back({static_cast<uint32_t>(members.size()), compressor.compress(join, rows)});
      member_slots.emplace_back(level, bucket);
    }
  }

  if (!members.empty()) {
    auto groups = cluster_cds_groups(members, parameters.clusters.target_for(members.size()));
    for (auto group_id = size_t{0}; group_id < groups.size(); ++group_id) {
      for (const auto member : groups[group_id].member_ids) {
        const auto [level, bucket] = member_slots[member];
        stats.bucket_groups[level - 1][bucket] = static_cast<uint32_t>(group_id);
      }
      stats.group_representatives.push_back(std::move(groups[group_id].representative));
    }
  }
  return stats;
}

LikeStats like_stats(const Relation& relation, const std::string& join_column, const std::string& filter_column,
                     const BuildParameters& parameters, SubsetCompressor& compressor) {
  const auto& join = relation.column(join_column);
  const auto& filter = relation.column(filter_column);
  if (filter.kind() != ColumnKind::Text) {
    throw ConfigError("LIKE statistics need a text filter column, got '" + filter_column + "'");
  }

  auto gram_rows = std::map<std::string, std::vector<uint32_t>>{};
  for (auto row = uint32_t{0}; row < filter.size(); ++row) {
    if (filter.is_null(row)) {
      continue;
    }
    for (auto& gram : extract_trigrams(filter.text(row))) {
      gram_rows[std::move(gram)].push_back(row);
    }
  }

  auto ranked = std::vector<const std::pair<const std::string, std::vector<uint32_t>>*>{};
  ranked.reserve(gram_rows.size());
  for (const auto& entry : gram_rows) {
    ranked.push_back(&entry);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto* lhs, const auto* rhs) { return lhs->second.size() > rhs->second.size(); });

  const auto mcv_count = std::min<size_t>(parameters.mcv_size, ranked.size());
  auto members = std::vector<ClusterMember>{};
  for (auto index = size_t{0}; index < mcv_count; ++index) {
    members.push_back({static_cast<uint32_t>(index), compressor.compress(join, ranked[index]->second)});
  }

  auto stats = LikeStats{};
  if (!members.empty()) {
    auto groups = cluster_cds_groups(members, parameters.clusters.target_for(members.size()));
    for (auto group_id = size_t{0}; group_id < groups.size(); ++group_id) {
      for (const auto member : groups[group_id].member_ids) {
        stats.gram_groups[ranked[member]->first] = static_cast<uint32_t>(group_id);
      }
      stats.group_representatives.push_back(std::move(groups[group_id].representative));
    }
  }

  auto defaults = std::vector<PiecewiseLinearFn>{};
  for (auto index = mcv_count; index < ranked.size(); ++index) {
    defaults.push_back(compressor.compress(join, ranked[index]->second));
  }
  stats.default_cds = fold_concave_max(defaults);
  return stats;
}

size_t stored_sequences(const ConditionedStats& stats) {
  auto count = size_t{0};
  if (stats.equality) {
    count += stats.equality->groups.size() + 1;
  }
  if (stats.range) {
    count += stats.range->group_representatives.size();
  }
  if (stats.like) {
    count += stats.like->group_representatives.size() + 1;
  }
  return count;
}

}  // namespace

// ---------------------------------------------------------------------------------------------------------------------

size_t ClusterPolicy::target_for(size_t member_count) const {
  if (fixed_count) {
    return std::max<size_t>(1, *fixed_count);
  }
  return std::max<size_t>(4, (member_count + 7) / 8);
}

std::string ClusterPolicy::to_string() const {
  return fixed_count ? std::to_string(*fixed_count) : "auto";
}

ClusterPolicy ClusterPolicy::parse(const std::string& text) {
  if (text.empty() || text == "auto") {
    return {};
  }
  try {
    auto consumed = size_t{0};
    const auto value = std::stoll(text, &consumed);
    if (consumed != text.size() || value < 1) {
      throw ConfigError("cluster count must be 'auto' or a positive integer, got '" + text + "'");
    }
    return {static_cast<size_t>(value)};
  } catch (const std::logic_error&) {
    throw ConfigError("cluster count must be 'auto' or a positive integer, got '" + text + "'");
  }
}

void BuildParameters::validate() const {
  compression().validate();
  if (histogram_depth < 1 || histogram_depth > 20) {
    throw ConfigError("histogram depth must be in [1, 20]");
  }
  if (mcv_size < 1) {
    throw ConfigError("MCV size must be at least 1");
  }
  if (clusters.fixed_count && *clusters.fixed_count < 1) {
    throw ConfigError("cluster count must be at least 1");
  }
  if (!(bloom_bits_per_value >= 4.0)) {
    throw ConfigError("bloom filters need at least 4 bits per value");
  }
}

bool BuildParameters::operator==(const BuildParameters& other) const {
  return accuracy == other.accuracy && max_segments == other.max_segments &&
         histogram_depth == other.histogram_depth && mcv_size == other.mcv_size &&
         clusters.fixed_count == other.clusters.fixed_count && bloom_bits_per_value == other.bloom_bits_per_value;
}

std::string propagated_column_name(const std::string& dim, const std::string& column) {
  return dim + "." + column;
}

// ---------------------------------------------------------------------------------------------------------------------

std::vector<CdsGroup> cluster_cds_groups(std::span<const ClusterMember> members, size_t target_count) {
  if (target_count == 0) {
    throw ArgumentError("cluster count must be at least 1");
  }

  auto order = std::vector<size_t>(members.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t lhs, size_t rhs) { return members[lhs].id < members[rhs].id; });

  auto zero_members = std::vector<size_t>{};
  auto live = std::vector<size_t>{};
  for (const auto index : order) {
    (members[index].cds.total() > 0.0 ? live : zero_members).push_back(index);
  }

  // clusters[i] holds member indices; index order equals id order, so lower cluster index means lower id.
  const auto count = live.size();
  auto clusters = std::vector<std::vector<size_t>>(count);
  for (auto index = size_t{0}; index < count; ++index) {
    clusters[index] = {live[index]};
  }

  if (count > target_count) {
    auto distance = std::vector<std::vector<double>>(count, std::vector<double>(count, 0.0));
    for (auto i = size_t{0}; i < count; ++i) {
      for (auto j = i + 1; j < count; ++j) {
        const auto value = compression_distance(members[live[i]].cds, members[live[j]].cds);
        distance[i][j] = value;
        distance[j][i] = value;
      }
    }

    auto active = std::vector<bool>(count, true);
    // Nearest active partner with a higher index, per row.
    auto nearest = std::vector<size_t>(count, count);
    const auto refresh = [&](size_t row) {
      nearest[row] = count;
      for (auto column = row + 1; column < count; ++column) {
        if (active[column] && (nearest[row] == count || distance[row][column] < distance[row][nearest[row]])) {
          nearest[row] = column;
        }
      }
    };
    for (auto row = size_t{0}; row < count; ++row) {
      refresh(row);
    }

    for (auto remaining = count; remaining > target_count; --remaining) {
      auto best = count;
      for (auto row = size_t{0}; row < count; ++row) {
        if (active[row] && nearest[row] != count &&
            (best == count || distance[row][nearest[row]] < distance[best][nearest[best]])) {
          best = row;
        }
      }
      const auto keep = best;
      const auto absorb = nearest[best];
      for (auto other = size_t{0}; other < count; ++other) {
        const auto merged = std::max(distance[keep][other], distance[absorb][other]);
        distance[keep][other] = merged;
        distance[other][keep] = merged;
      }
      active[absorb] = false;
      clusters[keep].insert(clusters[keep].end(), clusters[absorb].begin(), clusters[absorb].end());
      clusters[absorb].clear();
      for (auto row = size_t{0}; row < count; ++row) {
        if (active[row] && (row == keep || nearest[row] == keep || nearest[row] == absorb)) {
          refresh(row);
        }
      }
    }
  }

  auto groups = std::vector<CdsGroup>{};
  const auto make_group = [&](const std::vector<size_t>& indices) {
    auto group = CdsGroup{};
    auto functions = std::vector<PiecewiseLinearFn>{};
    for (const auto index : indices) {
      group.member_ids.push_back(members[index].id);
      functions.push_back(members[index].cds);
    }
    std::sort(group.member_ids.begin(), group.member_ids.end());
    group.representative = concave_max(functions);
    return group;
  };
  for (const auto& cluster : clusters) {
    if (!cluster.empty()) {
      groups.push_back(make_group(cluster));
    }
  }
  if (!zero_members.empty()) {
    groups.push_back(make_group(zero_members));
  }
  std::sort(groups.begin(), groups.end(),
            [](const CdsGroup& lhs, const CdsGroup& rhs) { return lhs.member_ids.front() < rhs.member_ids.front(); });
  return groups;
}

void build_bloom_index(std::vector<CdsGroup>& groups, std::span<const std::string> member_keys,
                       double bits_per_value) {
  for (auto& group : groups) {
    auto keys = std::vector<std::string>{};
    keys.reserve(group.member_ids.size());
    for (const auto id : group.member_ids) {
      if (id >= member_keys.size()) {
        throw ArgumentError("member id without a key");
      }
      keys.push_back(member_keys[id]);
    }
    group.bloom = BloomFilter::build(keys, bits_per_value);
  }
}

// ---------------------------------------------------------------------------------------------------------------------

size_t RangeStats::bucket_of(double value) const {
  return static_cast<size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), value) - boundaries.begin());
}

bool RelationStats::is_join_column(const std::string& column) const {
  return std::find(join_columns.begin(), join_columns.end(), column) != join_columns.end();
}

const RelationStats& StatisticsCatalog::relation(const std::string& name) const {
  const auto it = relations.find(name);
  if (it == relations.end()) {
    throw QueryError("unknown relation '" + name + "'");
  }
  return it->second;
}

std::vector<ValueGroup> group_by_value(const Column& column) {
  auto index = std::unordered_map<std::string, size_t>{};
  auto groups = std::vector<ValueGroup>{};
  for (auto row = uint32_t{0}; row < column.size(); ++row) {
    if (column.is_null(row)) {
      continue;
    }
    auto value = column.value(row);
    const auto [it, inserted] = index.try_emplace(value_key(value), groups.size());
    if (inserted) {
      groups.push_back({std::move(value), {}});
    }
    groups[it->second].rows.push_back(row);
  }
  std::sort(groups.begin(), groups.end(), [](const ValueGroup& lhs, const ValueGroup& rhs) {
    if (lhs.rows.size() != rhs.rows.size()) {
      return lhs.rows.size() > rhs.rows.size();
    }
    return value_less(lhs.value, rhs.value);
  });
  return groups;
}

EqualityStats build_equality_stats(const Relation& relation, const std::string& join_column,
                                   const std::string& filter_column, const BuildParameters& parameters) {
  auto compressor = SubsetCompressor{parameters};
  return equality_stats(relation, join_column, filter_column, parameters, compressor);
}

RangeStats build_range_stats(const Relation& relation, const std::string& join_column,
                             const std::string& filter_column, const BuildParameters& parameters) {
  auto compressor = SubsetCompressor{parameters};
  return range_stats(relation, join_column, filter_column, parameters, compressor);
}

LikeStats build_like_stats(const Relation& relation, const std::string& join_column,
                           const std::string& text_filter_column, const BuildParameters& parameters) {
  auto compressor = SubsetCompressor{parameters};
  return like_stats(relation, join_column, text_filter_column, parameters, compressor);
}

std::string to_lower(std::string text) {
  for (auto& character : text) {
    if (character >= 'A' && character <= 'Z') {
      character = static_cast<char>(character - 'A' + 'a');
    }
  }
  return text;
}

std::vector<std::string> extract_trigrams(const std::string& text) {
  const auto lowered = to_lower(text);
  auto grams = std::vector<std::string>{};
  if (lowered.size() < 3) {
    return grams;
  }
  grams.reserve(lowered.size() - 2);
  for (auto start = size_t{0}; start + 3 <= lowered.size(); ++start) {
    grams.push_back(lowered.substr(start, 3));
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

Relation precompute_pk_fk(const Relation& fact, const Relation& dim, const std::string& fk_column,
                          const std::string& pk_column, std::span<const std::string> dim_columns) {
  const auto& pk = dim.column(pk_column);
  const auto& fk = fact.column(fk_column);
  auto pk_rows = std::unordered_map<std::string, size_t>{};
  for (auto row = size_t{0}; row < pk.size(); ++row) {
    if (pk.is_null(row)) {
      continue;
    }
    if (!pk_rows.try_emplace(value_key(pk.value(row)), row).second) {
      throw ConfigError("column '" + dim.name() + "." + pk_column + "' is not unique and cannot serve as a primary key");
    }
  }

  auto result = fact;
  for (const auto& name : dim_columns) {
    const auto& source = dim.column(name);
    auto column = Column{propagated_column_name(dim.name(), name), source.kind()};
    for (auto row = size_t{0}; row < fact.row_count(); ++row) {
      const auto it = fk.is_null(row) ? pk_rows.end() : pk_rows.find(value_key(fk.value(row)));
      if (it == pk_rows.end()) {
        column.append_null();
      } else {
        column.append(source.value(it->second));
      }
    }
    result.add_column(std::move(column));
  }
  return result;
}

StatisticsCatalog build_catalog(const std::vector<Relation>& database, const DatabaseSchema& schema,
                                BuildReport* report) {
  schema.parameters.validate();

  auto by_name = std::map<std::string, const Relation*>{};
  for (const auto& relation : database) {
    if (!by_name.emplace(relation.name(), &relation).second) {
      throw ConfigError("duplicate relation '" + relation.name() + "'");
    }
  }

  auto problems = std::vector<std::string>{};
  const auto check_column = [&](const std::string& relation, const std::string& column, const char* role) {
    const auto it = by_name.find(relation);
    if (it == by_name.end()) {
      problems.push_back("relation '" + relation + "' is not loaded");
    } else if (!it->second->has_column(column)) {
      problems.push_back(std::string{role} + " column '" + relation + "." + column + "' does not exist");
    }
  };
  for (const auto& [relation, role] : schema.roles) {
    if (!by_name.contains(relation)) {
      problems.push_back("relation '" + relation + "' is not loaded");
      continue;
    }
    for (const auto& column : role.join_columns) {
      check_column(relation, column, "join");
    }
    for (const auto& column : role.filter_columns) {
      check_column(relation, column, "filter");
    }
  }
  for (const auto& edge : schema.pk_fk) {
    check_column(edge.fact, edge.fk_column, "foreign key");
    check_column(edge.dim, edge.pk_column, "primary key");
    if (edge.fact == edge.dim) {
      problems.push_back("PK-FK edge on '" + edge.fact + "' references itself");
    }
  }
  if (!problems.empty()) {
    auto message = std::ostringstream{};
    message << problems.size() << " schema problem(s):";
    for (const auto& problem : problems) {
      message << "\n  " << problem;
    }
    throw ConfigError(message.str());
  }

  auto catalog = StatisticsCatalog{};
  catalog.parameters = schema.parameters;
  catalog.pk_fk = schema.pk_fk;
  auto compressor = SubsetCompressor{schema.parameters};

  for (const auto& [name, source] : by_name) {
    const auto started = std::chrono::steady_clock::now();
    const auto audited_before = compressor.audited();
    const auto role_it = schema.roles.find(name);
    const auto role = role_it == schema.roles.end() ? ColumnRole{} : role_it->second;

    auto stats = RelationStats{};
    stats.join_columns = role.join_columns;
    stats.filter_columns = role.filter_columns;

    auto relation = *source;
    for (const auto& edge : schema.pk_fk) {
      if (edge.fact != name) {
        continue;
      }
      const auto& dim = *by_name.at(edge.dim);
      const auto dim_role_it = schema.roles.find(edge.dim);
      auto dim_columns = std::vector<std::string>{};
      if (dim_role_it != schema.roles.end()) {
        for (const auto& column : dim_role_it->second.filter_columns) {
          if (!relation.has_column(propagated_column_name(edge.dim, column))) {
            dim_columns.push_back(column);
          }
        }
      }
      relation = precompute_pk_fk(relation, dim, edge.fk_column, edge.pk_column, dim_columns);
      for (const auto& column : dim_columns) {
        const auto propagated = propagated_column_name(edge.dim, column);
        stats.filter_columns.push_back(propagated);
        stats.propagated[propagated] = {edge.dim, column};
      }
    }
    stats.row_count = relation.row_count();

    for (const auto& column : relation.columns()) {
      auto summary = ColumnSummary{};
      summary.kind = column.kind();
      summary.null_count = column.null_count();
      const auto sequence = degree_sequence_of(column);
      summary.distinct_count = sequence.distinct_count();
      summary.cds = compressor.compress(sequence);
      stats.columns.emplace(column.name(), std::move(summary));
    }

    auto members_before = size_t{0};
    auto stored_after = size_t{0};
    for (const auto& join_column : stats.join_columns) {
      for (const auto& filter_column : stats.filter_columns) {
        const auto audited_start = compressor.audited();
        auto conditioned = ConditionedStats{};
        conditioned.equality = equality_stats(relation, join_column, filter_column, schema.parameters, compressor);
        if (relation.column(filter_column).kind() == ColumnKind::Numeric) {
          conditioned.range = range_stats(relation, join_column, filter_column, schema.parameters, compressor);
        } else {
          conditioned.like = like_stats(relation, join_column, filter_column, schema.parameters, compressor);
        }
        members_before += compressor.audited() - audited_start;
        stored_after += stored_sequences(conditioned);
        stats.conditioned.emplace(std::make_pair(join_column, filter_column), std::move(conditioned));
      }
    }

    catalog.relations.emplace(name, std::move(stats));
    if (report) {
      const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      report->relations.push_back({name, elapsed, members_before, stored_after});
    }
    (void)audited_before;
  }

  if (report) {
    report->audited_sequences = compressor.audited();
  }
  return catalog;
}

}  // namespace seqbound
