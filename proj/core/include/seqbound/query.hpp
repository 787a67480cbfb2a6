#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "seqbound/relation.hpp"

namespace seqbound {

// ---------------------------------------------------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------------------------------------------------

// Boolean tree over single-column leaves. Column names are unqualified; the owning atom is implied.
struct Predicate {
  enum class Kind { Equality, Range, Like, In, And, Or };

  Kind kind{Kind::And};
  std::string column;
  // Equality
  Value value{};
  // In
  std::vector<Value> values;
  // Range; an absent bound is unbounded.
  std::optional<Value> lower;
  bool lower_inclusive{true};
  std::optional<Value> upper;
  bool upper_inclusive{true};
  // Like
  std::string pattern;
  // And / Or
  std::vector<Predicate> children;

  static Predicate equality(std::string column, Value value);
  static Predicate range(std::string column, std::optional<Value> lower, bool lower_inclusive,
                         std::optional<Value> upper, bool upper_inclusive);
  static Predicate like(std::string column, std::string pattern);
  static Predicate in(std::string column, std::vector<Value> values);
  // A single child is returned unchanged; nested nodes of the same kind are flattened.
  static Predicate conjunction(std::vector<Predicate> children);
  static Predicate disjunction(std::vector<Predicate> children);

  bool is_leaf() const {
    return kind != Kind::And && kind != Kind::Or;
  }

  // Columns referenced anywhere in the tree, sorted and distinct.
  std::vector<std::string> columns() const;

  bool operator==(const Predicate&) const = default;
};

// One relation occurrence. variables maps a join variable to the columns of this atom bound to it; two columns
// on one variable (R.A = R.B) select the rows where they agree.
struct Atom {
  std::string relation;
  std::string alias;
  std::map<std::string, std::vector<std::string>> variables;
  std::optional<Predicate> predicate;

  bool operator==(const Atom&) const = default;
};

struct QueryAst {
  std::vector<Atom> atoms;

  // Atoms holding the variable, in atom order.
  std::vector<size_t> atoms_with(const std::string& variable) const;

  // All variables, sorted.
  std::vector<std::string> variables() const;

  bool operator==(const QueryAst&) const = default;
};

// SELECT COUNT(*) FROM r1 [AS] a1, ... [WHERE c1 AND c2 ...]. Top-level conjuncts are either column = column join
// conditions or single-relation predicates built from =, <, <=, >, >=, BETWEEN, LIKE, IN, AND, OR and parentheses.
// A join variable is named after the smallest alias.column in its equivalence class. Throws QueryError (with a byte
// offset) on syntax errors and UnsupportedQueryError for negation, cross-relation OR and non-equality joins.
QueryAst parse_query(std::string_view text);

// Inverse of parse_query: parse_query(print_query(q)) == q for every parsed q.
std::string print_query(const QueryAst& query);

std::string print_predicate(const Predicate& predicate, const std::string& alias);

// ---------------------------------------------------------------------------------------------------------------------
// Join structure
// ---------------------------------------------------------------------------------------------------------------------

// Bipartite atom/variable incidence graph.
struct JoinGraph {
  size_t atom_count{0};
  std::vector<std::string> variables;
  // (atom index, variable index)
  std::vector<std::pair<size_t, size_t>> incidences;
  bool berge_acyclic{true};
  bool connected{true};
  // Atom pairs sharing at least two variables.
  std::vector<std::pair<size_t, size_t>> multi_column_pairs;
};

JoinGraph join_graph(const QueryAst& query);

// Merges the variables that two atoms share exclusively (no third atom touches them) into one variable holding all
// of their columns, so multi-column joins become single-variable joins whose sequence is the minimum over columns.
QueryAst merge_multi_column_joins(const QueryAst& query);

// Removes variables that occur in a single atom through a single column: they constrain nothing.
QueryAst drop_unconstrained_variables(const QueryAst& query);

// ---------------------------------------------------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------------------------------------------------

// Either the conditioned sequence of an atom on a variable, or the output of an earlier step.
struct UnaryRef {
  enum class Kind { Base, Step };

  Kind kind{Kind::Base};
  size_t atom{0};
  std::string variable;
  size_t step{0};

  static UnaryRef base(size_t atom, std::string variable) {
    return {Kind::Base, atom, std::move(variable), 0};
  }

  static UnaryRef output_of(size_t step) {
    return {Kind::Step, 0, {}, step};
  }

  bool operator==(const UnaryRef&) const = default;
};

// A(X) = B_1(X) ∧ ... ∧ B_m(X)
struct AlphaStep {
  std::string variable;
  std::vector<UnaryRef> inputs;

  bool operator==(const AlphaStep&) const = default;
};

// B(X0) = R(X0, X1, ..., Xk) ∧ A_1(X1) ∧ ... ∧ A_k(Xk). A child on X0 itself multiplies without rank mapping.
struct BetaStep {
  size_t atom{0};
  std::string anchor;
  std::vector<std::pair<std::string, UnaryRef>> children;

  bool operator==(const BetaStep&) const = default;
};

using PlanStep = std::variant<AlphaStep, BetaStep>;

struct BoundPlan {
  std::vector<PlanStep> steps;
  size_t root{0};

  size_t alpha_count() const;
  size_t beta_count() const;
};

// Roots the join tree at the atom with the most variables (ties: smallest alias) and emits α/β steps bottom-up.
// The root anchor is the root's alphabetically first private variable, or its first variable if none is private.
// Throws ArgumentError for cyclic or disconnected queries and for queries whose root has no variables.
BoundPlan decompose(const QueryAst& query);

std::string describe_step(const QueryAst& query, const PlanStep& step, size_t index);

inline constexpr size_t kMaxSpanningTrees = 64;

// Spanning trees of the incidence graph. Each tree keeps every atom and predicate; a dropped incidence renames the
// variable in that atom to a fresh private variable, which removes that join condition. Acyclic queries yield
// themselves. Beyond max_trees a deterministic sample is returned. Throws UnsupportedQueryError when disconnected.
std::vector<QueryAst> spanning_trees(const QueryAst& query, size_t max_trees = kMaxSpanningTrees);

}  // namespace seqbound
