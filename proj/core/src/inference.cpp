#include "seqbound/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

class Resolver {
 public:
  Resolver(const RelationStats& stats, std::string relation, std::string join_column)
      : _stats(stats), _relation(std::move(relation)), _join_column(std::move(join_column)),
        _unconditioned(stats.columns.at(_join_column).cds) {}

  PiecewiseLinearFn resolve(const Predicate& predicate) const {
    switch (predicate.kind) {
      case Predicate::Kind::And: {
        auto children = resolve_children(predicate);
        return pw_min(children);
      }
      case Predicate::Kind::Or: {
        auto children = resolve_children(predicate);
        return pw_min(pw_sum(children), _unconditioned);
      }
      case Predicate::Kind::Equality:
        return equality(predicate.column, predicate.value);
      case Predicate::Kind::In: {
        auto seen = std::set<std::string>{};
        auto children = std::vector<PiecewiseLinearFn>{};
        for (const auto& value : predicate.values) {
          if (seen.insert(value_key(value)).second) {
            children.push_back(equality(predicate.column, value));
          }
        }
        return pw_min(pw_sum(children), _unconditioned);
      }
      case Predicate::Kind::Range:
        return range(predicate);
      case Predicate::Kind::Like:
        return like(predicate.column, predicate.pattern);
    }
    throw QueryError("unreachable predicate kind");
  }

 private:
  std::vector<PiecewiseLinearFn> resolve_children(const Predicate& predicate) const {
    auto children = std::vector<PiecewiseLinearFn>{};
    children.reserve(predicate.children.size());
    for (const auto& child : predicate.children) {
      children.push_back(resolve(child));
    }
    return children;
  }

  const ConditionedStats* conditioned(const std::string& filter_column) const {
    const auto it = _stats.conditioned.find({_join_column, filter_column});
    return it == _stats.conditioned.end() ? nullptr : &it->second;
  }

  PiecewiseLinearFn equality(const std::string& column, const Value& value) const {
    const auto* stats = conditioned(column);
    if (!stats || !stats->equality) {
      return _unconditioned;
    }
    const auto key = value_key(value);
    if (key.empty()) {
      return PiecewiseLinearFn::zero();
    }
    // No false negatives: the value's true group, or the non-MCV default, is always among the hits.
    auto hits = std::vector<PiecewiseLinearFn>{};
    for (const auto& group : stats->equality->groups) {
      if (group.bloom.possibly_contains(key)) {
        hits.push_back(group.representative);
      }
    }
    if (stats->equality->default_bloom.possibly_contains(key)) {
      hits.push_back(stats->equality->default_cds);
    }
    if (hits.empty()) {
      return PiecewiseLinearFn::zero();
    }
    return hits.size() == 1 ? std::move(hits.front()) : concave_max(hits);
  }

  PiecewiseLinearFn range(const Predicate& predicate) const {
    const auto* stats = conditioned(predicate.column);
    if (!stats || !stats->range) {
      return _unconditioned;
    }
    const auto* lower = predicate.lower ? std::get_if<double>(&*predicate.lower) : nullptr;
    const auto* upper = predicate.upper ? std::get_if<double>(&*predicate.upper) : nullptr;
    if ((predicate.lower && !lower) || (predicate.upper && !upper)) {
      return _unconditioned;
    }
    if (lower && upper &&
        (*lower > *upper || (*lower == *upper && !(predicate.lower_inclusive && predicate.upper_inclusive)))) {
      return PiecewiseLinearFn::zero();
    }

    const auto& histogram = *stats->range;
    const auto& boundaries = histogram.boundaries;
    const auto finest_last = boundaries.size();
    const auto first = lower ? histogram.bucket_of(*lower) : size_t{0};
    auto last = finest_last;
    if (upper) {
      last = predicate.upper_inclusive
                 ? histogram.bucket_of(*upper)
                 : static_cast<size_t>(std::lower_bound(boundaries.begin(), boundaries.end(), *upper) - boundaries.begin());
    }
    if (first > last) {
      return PiecewiseLinearFn::zero();
    }
    for (auto level = histogram.depth; level >= 1; --level) {
      const auto shift = histogram.depth - level;
      if ((first >> shift) != (last >> shift)) {
        continue;
      }
      const auto group = histogram.bucket_groups[level - 1][first >> shift];
      return group == kEmptyGroup ? PiecewiseLinearFn::zero() : histogram.group_representatives[group];
    }
    return _unconditioned;
  }

  PiecewiseLinearFn like(const std::string& column, const std::string& pattern) const {
    const auto* stats = conditioned(column);
    if (!stats || !stats->like) {
      return _unconditioned;
    }
    // Every matching string contains each literal piece, hence each of its 3-grams.
    auto grams = std::set<std::string>{};
    auto piece = std::string{};
    const auto flush = [&] {
      for (auto& gram : extract_trigrams(piece)) {
        grams.insert(std::move(gram));
      }
      piece.clear();
    };
    for (const auto character : pattern) {
      if (character == '%' || character == '_') {
        flush();
      } else {
        piece.push_back(character);
      }
    }
    flush();
    if (grams.empty()) {
      return _unconditioned;
    }

    auto bounds = std::vector<PiecewiseLinearFn>{};
    auto uses_default = false;
    for (const auto& gram : grams) {
      const auto it = stats->like->gram_groups.find(gram);
      if (it != stats->like->gram_groups.end()) {
        bounds.push_back(stats->like->group_representatives[it->second]);
      } else {
        uses_default = true;
      }
    }
    if (uses_default) {
      bounds.push_back(stats->like->default_cds);
    }
    return pw_min(bounds);
  }

  const RelationStats& _stats;
  std::string _relation;
  std::string _join_column;
  const PiecewiseLinearFn& _unconditioned;
};

void check_columns(const RelationStats& stats, const Atom& atom) {
  const auto check = [&](const std::string& column) {
    if (!stats.columns.contains(column)) {
      throw QueryError("unknown column '" + atom.alias + "." + column + "'");
    }
  };
  for (const auto& [variable, columns] : atom.variables) {
    for (const auto& column : columns) {
      check(column);
    }
  }
  if (atom.predicate) {
    for (const auto& column : atom.predicate->columns()) {
      check(column);
    }
  }
}

// Upper bound on the rows of the atom that satisfy its predicate: each declared join column accounts for them
// through its conditioned mass plus its nulls.
double predicate_row_cap(const StatisticsCatalog& catalog, const Atom& atom) {
  const auto& stats = catalog.relation(atom.relation);
  auto cap = static_cast<double>(stats.row_count);
  if (!atom.predicate) {
    return cap;
  }
  for (const auto& join_column : stats.join_columns) {
    const auto conditioned = condition_sequence(catalog, atom.relation, join_column, &*atom.predicate);
    cap = std::min(cap, conditioned.total() + static_cast<double>(stats.columns.at(join_column).null_count));
  }
  return cap;
}

Predicate rename_columns(Predicate predicate, const std::string& prefix) {
  if (predicate.is_leaf()) {
    predicate.column = propagated_column_name(prefix, predicate.column);
    return predicate;
  }
  for (auto& child : predicate.children) {
    child = rename_columns(std::move(child), prefix);
  }
  return predicate;
}

// Conditions fact atoms on the predicates of the dimension atoms they join through a declared PK-FK edge.
QueryAst push_dimension_predicates(const StatisticsCatalog& catalog, const QueryAst& query) {
  auto result = query;
  for (const auto& edge : catalog.pk_fk) {
    const auto fact_it = catalog.relations.find(edge.fact);
    if (fact_it == catalog.relations.end()) {
      continue;
    }
    const auto& fact_stats = fact_it->second;
    const auto propagated = [&](const Predicate& predicate) {
      const auto columns = predicate.columns();
      return std::all_of(columns.begin(), columns.end(), [&](const std::string& column) {
        return fact_stats.propagated.contains(propagated_column_name(edge.dim, column));
      });
    };

    for (auto& fact : result.atoms) {
      if (fact.relation != edge.fact) {
        continue;
      }
      for (const auto& dim : query.atoms) {
        if (dim.relation != edge.dim || !dim.predicate) {
          continue;
        }
        const auto joined = std::any_of(fact.variables.begin(), fact.variables.end(), [&](const auto& entry) {
          const auto& fact_columns = entry.second;
          const auto dim_it = dim.variables.find(entry.first);
          return dim_it != dim.variables.end() &&
                 std::find(fact_columns.begin(), fact_columns.end(), edge.fk_column) != fact_columns.end() &&
                 std::find(dim_it->second.begin(), dim_it->second.end(), edge.pk_column) != dim_it->second.end();
        });
        if (!joined) {
          continue;
        }
        auto pushed = std::vector<Predicate>{};
        if (propagated(*dim.predicate)) {
          pushed.push_back(rename_columns(*dim.predicate, edge.dim));
        } else if (dim.predicate->kind == Predicate::Kind::And) {
          for (const auto& child : dim.predicate->children) {
            if (propagated(child)) {
              pushed.push_back(rename_columns(child, edge.dim));
            }
          }
        }
        if (pushed.empty()) {
          continue;
        }
        if (fact.predicate) {
          pushed.insert(pushed.begin(), *fact.predicate);
        }
        fact.predicate = Predicate::conjunction(std::move(pushed));
      }
    }
  }
  return result;
}

uint64_t round_bound(double value) {
  if (!(value > 0.0)) {
    return 0;
  }
  // Absorb floating-point noise above an integer before rounding up.
  return static_cast<uint64_t>(std::ceil(value - kTolerance * std::max(1.0, value)));
}

}  // namespace

// ---------------------------------------------------------------------------------------------------------------------

PiecewiseLinearFn condition_sequence(const StatisticsCatalog& catalog, const std::string& relation,
                                     const std::string& join_column, const Predicate* predicate) {
  const auto& stats = catalog.relation(relation);
  if (!stats.is_join_column(join_column)) {
    throw ArgumentError("'" + relation + "." + join_column + "' is not a declared join column");
  }
  if (!predicate) {
    return stats.columns.at(join_column).cds;
  }
  for (const auto& column : predicate->columns()) {
    if (!stats.columns.contains(column)) {
      throw QueryError("unknown column '" + relation + "." + column + "'");
    }
  }
  return Resolver{stats, relation, join_column}.resolve(*predicate);
}

ConditionedSequenceSet resolve_inputs(const StatisticsCatalog& catalog, const QueryAst& query,
                                      std::vector<std::string>* fallbacks) {
  auto inputs = ConditionedSequenceSet{};
  for (auto index = size_t{0}; index < query.atoms.size(); ++index) {
    const auto& atom = query.atoms[index];
    const auto& stats = catalog.relation(atom.relation);
    check_columns(stats, atom);
    const auto* predicate = atom.predicate ? &*atom.predicate : nullptr;
    const auto cap = predicate_row_cap(catalog, atom);

    auto mass = cap;
    auto resolved = std::vector<std::pair<std::string, PiecewiseLinearFn>>{};
    for (const auto& [variable, columns] : atom.variables) {
      auto candidates = std::vector<PiecewiseLinearFn>{};
      for (const auto& column : columns) {
        if (stats.is_join_column(column)) {
          candidates.push_back(condition_sequence(catalog, atom.relation, column, predicate));
        } else {
          candidates.push_back(truncate_cds(stats.columns.at(column).cds, cap));
          if (fallbacks) {
            fallbacks->push_back("undeclared-join-column:" + atom.relation + "." + column);
          }
        }
      }
      auto cds = candidates.size() == 1 ? std::move(candidates.front()) : pw_min(candidates);
      mass = std::min(mass, cds.total());
      resolved.emplace_back(variable, std::move(cds));
    }
    // All sequences of one atom describe the same rows, so none may carry more mass than the smallest.
    for (auto& [variable, cds] : resolved) {
      inputs.emplace(std::make_pair(index, variable), truncate_cds(cds, mass));
    }
  }
  return inputs;
}

BoundResult fdsb(const QueryAst& query, const BoundPlan& plan, const ConditionedSequenceSet& inputs,
                 bool with_trace) {
  const auto input = [&](size_t atom, const std::string& variable) -> const PiecewiseLinearFn& {
    const auto it = inputs.find({atom, variable});
    if (it == inputs.end()) {
      throw ArgumentError("missing plan input for atom " + std::to_string(atom) + " on '" + variable + "'");
    }
    return it->second;
  };

  auto result = BoundResult{};
  for (const auto& [key, cds] : inputs) {
    result.input_segments += cds.segment_count();
  }

  auto unaries = std::vector<PiecewiseConstantFn>{};
  unaries.reserve(plan.steps.size());
  const auto unary = [&](const UnaryRef& ref) -> PiecewiseConstantFn {
    if (ref.kind == UnaryRef::Kind::Step) {
      if (ref.step >= unaries.size()) {
        throw ArgumentError("plan step refers to a later step");
      }
      return unaries[ref.step];
    }
    return discrete_derivative(input(ref.atom, ref.variable));
  };

  for (const auto& step : plan.steps) {
    auto output = PiecewiseConstantFn{};
    if (const auto* alpha = std::get_if<AlphaStep>(&step)) {
      output = unary(alpha->inputs.front());
      for (auto index = size_t{1}; index < alpha->inputs.size(); ++index) {
        output = pw_multiply(output, unary(alpha->inputs[index]));
      }
    } else {
      const auto& beta = std::get<BetaStep>(step);
      const auto& anchor = input(beta.atom, beta.anchor);
      output = discrete_derivative(anchor);
      for (const auto& [variable, child] : beta.children) {
        const auto factor = variable == beta.anchor ? unary(child)
                                                    : compose_beta_factor(unary(child), input(beta.atom, variable), anchor);
        output = pw_multiply(output, factor);
      }
    }
    if (with_trace) {
      auto line = std::ostringstream{};
      line.precision(12);
      line << describe_step(query, step, unaries.size()) << "  [segments=" << output.segment_count()
           << " mass=" << output.integral() << "]";
      result.trace.push_back(line.str());
    }
    unaries.push_back(std::move(output));
  }
  if (plan.root >= unaries.size()) {
    throw ArgumentError("plan has no root step");
  }
  result.value = unaries[plan.root].integral();
  result.bound = round_bound(result.value);
  return result;
}

BoundResult bound_query(const StatisticsCatalog& catalog, const QueryAst& query, const BoundOptions& options) {
  if (query.atoms.empty()) {
    throw QueryError("query has no relations");
  }
  for (const auto& atom : query.atoms) {
    check_columns(catalog.relation(atom.relation), atom);
  }

  auto prepared = push_dimension_predicates(catalog, query);
  prepared = drop_unconstrained_variables(merge_multi_column_joins(prepared));

  auto fallbacks = std::vector<std::string>{};
  auto best = BoundResult{};
  if (prepared.atoms.size() == 1 && prepared.atoms.front().variables.empty()) {
    best.value = predicate_row_cap(catalog, prepared.atoms.front());
    best.bound = round_bound(best.value);
    best.strategy = "single-relation";
    if (options.trace) {
      best.trace.push_back("row cap of " + prepared.atoms.front().alias);
    }
  } else {
    const auto graph = join_graph(prepared);
    if (!graph.connected) {
      throw UnsupportedQueryError("query is disconnected (cross products are not supported)");
    }
    const auto trees = spanning_trees(prepared, options.max_spanning_trees);
    auto trace = std::vector<std::string>{};
    auto found = false;
    for (auto index = size_t{0}; index < trees.size(); ++index) {
      const auto tree = drop_unconstrained_variables(trees[index]);
      const auto inputs = resolve_inputs(catalog, tree, &fallbacks);
      const auto plan = decompose(tree);
      auto result = fdsb(tree, plan, inputs, options.trace);
      if (options.trace) {
        if (trees.size() > 1) {
          trace.push_back("spanning tree " + std::to_string(index) + ": " + print_query(tree));
        }
        trace.insert(trace.end(), result.trace.begin(), result.trace.end());
      }
      if (!found || result.value < best.value) {
        best = std::move(result);
        found = true;
      }
    }
    best.trace = std::move(trace);
    best.strategy = graph.berge_acyclic ? "acyclic" : "min-over-" + std::to_string(trees.size()) + "-spanning-trees";
    if (!join_graph(query).multi_column_pairs.empty()) {
      fallbacks.push_back("multi-column-min");
    }
  }

  std::sort(fallbacks.begin(), fallbacks.end());
  fallbacks.erase(std::unique(fallbacks.begin(), fallbacks.end()), fallbacks.end());
  best.fallbacks = fallbacks;
  for (const auto& fallback : fallbacks) {
    best.strategy += "+" + fallback;
  }
  return best;
}

}  // namespace seqbound
