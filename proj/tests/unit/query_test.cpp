#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../support.hpp"
#include "seqbound/errors.hpp"
#include "seqbound/oracle.hpp"
#include "seqbound/query.hpp"

using namespace seqbound;

namespace {

Atom atom(std::string name, std::vector<std::string> variables) {
  auto result = Atom{};
  result.relation = name;
  result.alias = name;
  for (auto& variable : variables) {
    result.variables[variable] = {variable};
  }
  return result;
}

size_t count_expected_throw(const std::string& sql) {
  try {
    parse_query(sql);
  } catch (const UnsupportedQueryError&) {
    return 2;
  } catch (const QueryError&) {
    return 1;
  }
  return 0;
}

}  // namespace

TEST(ParseQuery, ThreeRelationExample) {
  const auto query = parse_query(
      "SELECT COUNT(*) FROM R, S, T WHERE R.X=S.X AND S.Y=T.Y AND R.A<5 AND R.B=2 AND S.C LIKE '%Abdul%'");
  ASSERT_EQ(query.atoms.size(), 3u);
  EXPECT_EQ(query.variables(), (std::vector<std::string>{"R.X", "S.Y"}));
  EXPECT_EQ(query.atoms[0].variables.at("R.X"), (std::vector<std::string>{"X"}));
  EXPECT_EQ(query.atoms[1].variables.size(), 2u);
  ASSERT_TRUE(query.atoms[0].predicate);
  EXPECT_EQ(query.atoms[0].predicate->kind, Predicate::Kind::And);
  EXPECT_EQ(query.atoms[0].predicate->children.at(0),
            Predicate::range("A", std::nullopt, true, Value{5.0}, false));
  EXPECT_EQ(query.atoms[0].predicate->children.at(1), Predicate::equality("B", 2.0));
  EXPECT_EQ(*query.atoms[1].predicate, Predicate::like("C", "%Abdul%"));
  EXPECT_FALSE(query.atoms[2].predicate);
}

TEST(ParseQuery, SmallForms) {
  const auto single = parse_query("select count(*) from R");
  ASSERT_EQ(single.atoms.size(), 1u);
  EXPECT_TRUE(single.atoms[0].variables.empty());
  EXPECT_FALSE(single.atoms[0].predicate);

  const auto in = parse_query("SELECT COUNT(*) FROM R WHERE R.A IN (1, 2, 3)");
  EXPECT_EQ(*in.atoms[0].predicate, Predicate::in("A", {1.0, 2.0, 3.0}));

  const auto between = parse_query("SELECT COUNT(*) FROM R r WHERE r.A BETWEEN 2 AND 4 AND 7 > r.B");
  EXPECT_EQ(between.atoms[0].predicate->children.at(0), Predicate::range("A", Value{2.0}, true, Value{4.0}, true));
  EXPECT_EQ(between.atoms[0].predicate->children.at(1), Predicate::range("B", std::nullopt, true, Value{7.0}, false));

  const auto unqualified = parse_query("SELECT COUNT(*) FROM R WHERE name = 'O''Hara'");
  EXPECT_EQ(*unqualified.atoms[0].predicate, Predicate::equality("name", std::string{"O'Hara"}));

  const auto transitive = parse_query("SELECT COUNT(*) FROM R a, R b, S WHERE a.x = b.y AND b.y = S.z");
  EXPECT_EQ(transitive.variables(), (std::vector<std::string>{"S.z"}));
  EXPECT_EQ(transitive.atoms_with("S.z").size(), 3u);
}

TEST(ParseQuery, Errors) {
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R WHERE NOT R.A = 1"), 2u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R WHERE R.A <> 1"), 2u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R, S WHERE R.A = 1 OR S.B = 2"), 2u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R, S WHERE R.A < S.B"), 2u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R WHERE R.A = "), 1u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R r, S r"), 1u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R, S WHERE A = 1"), 1u);
  EXPECT_EQ(count_expected_throw("SELECT COUNT(*) FROM R WHERE Q.A = 1"), 1u);
  try {
    parse_query("SELECT COUNT(*) FROM R WHERE NOT R.A = 1");
  } catch (const UnsupportedQueryError& error) {
    EXPECT_NE(std::string{error.what()}.find("negation not supported"), std::string::npos);
  }
  try {
    parse_query("SELECT COUNT(*) FROM R WHERE R.A = 'x");
    FAIL();
  } catch (const QueryError& error) {
    EXPECT_EQ(error.offset(), 35u);
  }
}

TEST(ParseQuery, PrintRoundTripsGeneratedQueries) {
  auto rng = std::mt19937_64{41};
  auto corpus = 0;
  for (auto trial = 0; trial < 60; ++trial) {
    const auto database = generate_database(rng);
    for (const auto shape : {QueryShape::Acyclic, QueryShape::Cyclic, QueryShape::MultiColumn}) {
      const auto parsed = parse_query(generate_query(database.relations, database.schema, shape, rng));
      const auto printed = print_query(parsed);
      ASSERT_EQ(parse_query(printed), parsed) << printed;
      ASSERT_EQ(print_query(parse_query(printed)), printed);
      ++corpus;
    }
  }
  EXPECT_GE(corpus, 50);
}

TEST(JoinGraph, Shapes) {
  const auto chain = parse_query("SELECT COUNT(*) FROM R, S, T WHERE R.X = S.X AND S.Y = T.Y");
  EXPECT_TRUE(join_graph(chain).berge_acyclic);
  EXPECT_TRUE(join_graph(chain).connected);

  const auto triangle = parse_query("SELECT COUNT(*) FROM R, S, T WHERE R.Y = S.Y AND S.Z = T.Z AND T.X = R.X");
  EXPECT_FALSE(join_graph(triangle).berge_acyclic);

  const auto single = parse_query("SELECT COUNT(*) FROM R");
  EXPECT_TRUE(join_graph(single).berge_acyclic);

  const auto pair = parse_query("SELECT COUNT(*) FROM R, S WHERE R.A = S.A AND R.B = S.B");
  const auto graph = join_graph(pair);
  EXPECT_FALSE(graph.berge_acyclic);
  ASSERT_EQ(graph.multi_column_pairs.size(), 1u);
  const auto merged = merge_multi_column_joins(pair);
  EXPECT_TRUE(join_graph(merged).berge_acyclic);
  EXPECT_EQ(merged.atoms[0].variables.begin()->second, (std::vector<std::string>{"A", "B"}));

  const auto apart = parse_query("SELECT COUNT(*) FROM R, S");
  EXPECT_FALSE(join_graph(apart).connected);
}

TEST(Decompose, SevenAtomPlan) {
  auto query = QueryAst{};
  query.atoms = {atom("R", {"X", "Y", "Z"}), atom("S", {"Y"}),      atom("K", {"Z"}), atom("T", {"Z", "V", "W"}),
                 atom("M", {"V"}),           atom("N", {"V"}),      atom("P", {"W"})};
  const auto plan = decompose(query);
  EXPECT_EQ(plan.alpha_count(), 2u);
  EXPECT_EQ(plan.beta_count(), 2u);
  const auto& root = std::get<BetaStep>(plan.steps.at(plan.root));
  EXPECT_EQ(root.atom, 0u);
  EXPECT_EQ(root.anchor, "X");

  const auto& first = std::get<AlphaStep>(plan.steps.at(0));
  EXPECT_EQ(first.variable, "V");
  EXPECT_EQ(first.inputs, (std::vector<UnaryRef>{UnaryRef::base(4, "V"), UnaryRef::base(5, "V")}));
  const auto& star = std::get<BetaStep>(plan.steps.at(1));
  EXPECT_EQ(star.atom, 3u);
  EXPECT_EQ(star.anchor, "Z");
}

TEST(Decompose, SmallPlans) {
  const auto single = decompose(merge_multi_column_joins(parse_query("SELECT COUNT(*) FROM R, S WHERE R.X = S.X")));
  EXPECT_EQ(single.beta_count(), 1u);
  EXPECT_EQ(single.alpha_count(), 0u);

  auto lone = QueryAst{};
  lone.atoms = {atom("R", {"X"})};
  const auto degenerate = decompose(lone);
  ASSERT_EQ(degenerate.steps.size(), 1u);
  EXPECT_TRUE(std::get<BetaStep>(degenerate.steps[0]).children.empty());

  const auto chain = decompose(parse_query("SELECT COUNT(*) FROM R, S, T WHERE R.X = S.X AND S.Y = T.Y"));
  EXPECT_EQ(chain.beta_count(), 1u);
  const auto& root = std::get<BetaStep>(chain.steps.at(chain.root));
  EXPECT_EQ(root.atom, 1u);
  EXPECT_EQ(root.children.size(), 2u);

  EXPECT_THROW(decompose(parse_query("SELECT COUNT(*) FROM R, S, T WHERE R.Y = S.Y AND S.Z = T.Z AND T.X = R.X")),
               ArgumentError);
}

TEST(Decompose, EveryAtomAndVariableConsumedOnce) {
  auto rng = std::mt19937_64{42};
  for (auto trial = 0; trial < 100; ++trial) {
    const auto database = generate_database(rng);
    const auto query = drop_unconstrained_variables(
        merge_multi_column_joins(parse_query(generate_query(database.relations, database.schema, QueryShape::Acyclic, rng))));
    if (query.atoms.size() < 2) {
      continue;
    }
    const auto plan = decompose(query);
    auto atoms_seen = std::multiset<size_t>{};
    auto steps_consumed = std::multiset<size_t>{};
    for (const auto& step : plan.steps) {
      const auto consume = [&](const UnaryRef& ref) {
        if (ref.kind == UnaryRef::Kind::Base) {
          atoms_seen.insert(ref.atom);
        } else {
          steps_consumed.insert(ref.step);
        }
      };
      if (const auto* beta = std::get_if<BetaStep>(&step)) {
        atoms_seen.insert(beta->atom);
        for (const auto& [variable, child] : beta->children) {
          consume(child);
        }
      } else {
        for (const auto& input : std::get<AlphaStep>(step).inputs) {
          consume(input);
        }
      }
    }
    EXPECT_EQ(atoms_seen.size(), query.atoms.size());
    EXPECT_EQ(std::set<size_t>(atoms_seen.begin(), atoms_seen.end()).size(), query.atoms.size());
    // Every step but the root feeds exactly one later step.
    EXPECT_EQ(steps_consumed.size(), plan.steps.size() - 1);
    EXPECT_EQ(std::set<size_t>(steps_consumed.begin(), steps_consumed.end()).size(), plan.steps.size() - 1);
    EXPECT_FALSE(steps_consumed.contains(plan.root));
  }
}

TEST(SpanningTrees, Counts) {
  const auto triangle = parse_query("SELECT COUNT(*) FROM R, S, T WHERE R.Y = S.Y AND S.Z = T.Z AND T.X = R.X");
  const auto trees = spanning_trees(triangle);
  EXPECT_EQ(trees.size(), 3u);
  for (const auto& tree : trees) {
    EXPECT_TRUE(join_graph(tree).berge_acyclic);
    EXPECT_TRUE(join_graph(tree).connected);
    EXPECT_EQ(tree.atoms.size(), 3u);
  }

  const auto acyclic = parse_query("SELECT COUNT(*) FROM R, S WHERE R.X = S.X AND R.A = 1");
  EXPECT_EQ(spanning_trees(acyclic), std::vector<QueryAst>{acyclic});

  const auto square = parse_query(
      "SELECT COUNT(*) FROM A, B, C, D WHERE A.x = B.x AND B.y = C.y AND C.z = D.z AND D.w = A.w");
  EXPECT_EQ(spanning_trees(square).size(), 4u);

  EXPECT_THROW(spanning_trees(parse_query("SELECT COUNT(*) FROM R, S")), UnsupportedQueryError);
  EXPECT_LE(spanning_trees(square, 2).size(), 2u);
}

TEST(SpanningTrees, DroppingJoinsNeverShrinksTheOutput) {
  auto rng = std::mt19937_64{43};
  for (auto trial = 0; trial < 40; ++trial) {
    const auto database = generate_database(rng);
    const auto query = parse_query(generate_query(database.relations, database.schema, QueryShape::Cyclic, rng));
    const auto truth = true_cardinality(database.relations, query);
    for (const auto& tree : spanning_trees(query)) {
      EXPECT_GE(true_cardinality(database.relations, tree), truth);
    }
  }
}
