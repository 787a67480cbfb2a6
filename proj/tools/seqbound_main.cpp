#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqbound/catalog_io.hpp"
#include "seqbound/errors.hpp"
#include "seqbound/inference.hpp"
#include "seqbound/oracle.hpp"
#include "seqbound/query.hpp"
#include "seqbound/stats_builder.hpp"

namespace {

using namespace seqbound;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kIoOrConfig = 2, kUnsupported = 3 };

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void emit(const json& record) {
  std::cout << record.dump() << '\n';
}

std::string plural(size_t count, const std::string& noun) {
  return std::to_string(count) + " " + noun + (count == 1 ? "" : "s");
}

// ---------------------------------------------------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------------------------------------------------

struct BuildOptions {
  std::string schema;
  std::string out;
  std::optional<double> accuracy;
  std::optional<size_t> max_segments;
  std::optional<uint32_t> histogram_depth;
  std::optional<uint32_t> mcv_size;
  std::optional<std::string> clusters;
  std::optional<double> bloom_bits;
  bool json_output{false};
};

int run_build(const BuildOptions& options) {
  auto config = load_schema(options.schema);
  auto& parameters = config.schema.parameters;
  if (options.accuracy) {
    parameters.accuracy = *options.accuracy;
  }
  if (options.max_segments) {
    parameters.max_segments = *options.max_segments;
  }
  if (options.histogram_depth) {
    parameters.histogram_depth = *options.histogram_depth;
  }
  if (options.mcv_size) {
    parameters.mcv_size = *options.mcv_size;
  }
  if (options.clusters) {
    parameters.clusters = ClusterPolicy::parse(*options.clusters);
  }
  if (options.bloom_bits) {
    parameters.bloom_bits_per_value = *options.bloom_bits;
  }
  parameters.validate();

  auto load_stats = CsvLoadStats{};
  const auto database = load_database(config, &load_stats);
  auto report = BuildReport{};
  const auto start = Clock::now();
  const auto catalog = build_catalog(database, config.schema, &report);
  const auto build_ms = elapsed_ms(start);
  save_catalog(catalog, options.out);
  const auto bytes = serialize_catalog(catalog).size();

  for (const auto& entry : report.relations) {
    if (options.json_output) {
      emit({{"event", "relation"},
            {"name", entry.name},
            {"seconds", entry.seconds},
            {"sequences_before_clustering", entry.sequences_before_clustering},
            {"sequences_after_clustering", entry.sequences_after_clustering}});
    } else {
      std::cout << "relation " << entry.name << ": " << std::fixed << std::setprecision(3) << entry.seconds << " s, "
                << entry.sequences_before_clustering << " sequences before clustering, "
                << entry.sequences_after_clustering << " after\n";
    }
  }
  if (options.json_output) {
    emit({{"event", "catalog"},
          {"path", options.out},
          {"bytes", bytes},
          {"rows", load_stats.rows},
          {"parse_warnings", load_stats.parse_warnings},
          {"audited_sequences", report.audited_sequences},
          {"build_ms", build_ms}});
  } else {
    if (load_stats.parse_warnings > 0) {
      std::cout << "warning: " << load_stats.parse_warnings << " unparsable numeric fields stored as null\n";
    }
    std::cout << "catalog " << options.out << ": " << bytes << " bytes, " << report.audited_sequences
              << " sequences audited, built in " << std::fixed << std::setprecision(1) << build_ms << " ms\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------------------------------------------------

std::string read_query_text(const std::string& argument) {
  if (argument.empty() || argument.front() != '@') {
    return argument;
  }
  const auto path = argument.substr(1);
  auto in = std::ifstream{path};
  if (!in) {
    throw IoError("query file not found: " + path);
  }
  auto text = std::ostringstream{};
  text << in.rdbuf();
  return text.str();
}

int run_estimate(const std::string& catalog_path, const std::string& query_argument, bool trace, bool json_output) {
  const auto catalog = load_catalog(catalog_path);
  const auto query = parse_query(read_query_text(query_argument));
  const auto start = Clock::now();
  const auto result = bound_query(catalog, query, {.trace = trace});
  const auto time_ms = elapsed_ms(start);

  if (json_output) {
    auto record = json{{"event", "estimate"},
                       {"bound", result.bound},
                       {"value", result.value},
                       {"strategy", result.strategy},
                       {"time_ms", time_ms},
                       {"input_segments", result.input_segments}};
    if (trace) {
      record["trace"] = result.trace;
    }
    emit(record);
    return kOk;
  }
  if (trace) {
    for (const auto& line : result.trace) {
      std::cout << line << '\n';
    }
  }
  std::cout << "bound: " << result.bound << '\n'
            << "strategy: " << result.strategy << '\n'
            << "time: " << std::fixed << std::setprecision(3) << time_ms << " ms\n";
  return kOk;
}

// ---------------------------------------------------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------------------------------------------------

struct VerifyOptions {
  std::string schema;
  size_t trials{100};
  uint64_t seed{1};
  size_t first_trial{0};
  std::optional<double> corrupt_scale;
  size_t threads{0};
  bool json_output{false};
};

struct TrialOutcome {
  enum class Status { Pass, Violation, Skipped } status{Status::Skipped};
  VerifyReport report;
  std::string query;
  std::string note;
};

QueryShape shape_for(size_t trial) {
  switch (trial % 10) {
    case 0:
      return QueryShape::Cyclic;
    case 1:
      return QueryShape::MultiColumn;
    default:
      return QueryShape::Acyclic;
  }
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(values.begin(), values.end());
  const auto index = static_cast<size_t>(std::ceil(q * static_cast<double>(values.size()))) - 1;
  return values[std::min(index, values.size() - 1)];
}

int run_verify(const VerifyOptions& options) {
  // A fixed database is loaded and built once; otherwise each trial draws its own.
  auto fixed_relations = std::vector<Relation>{};
  auto fixed_schema = DatabaseSchema{};
  auto fixed_catalog = std::optional<StatisticsCatalog>{};
  if (!options.schema.empty()) {
    const auto config = load_schema(options.schema);
    fixed_relations = load_database(config);
    fixed_schema = config.schema;
    fixed_catalog = build_catalog(fixed_relations, fixed_schema);
    if (options.corrupt_scale) {
      fixed_catalog = scale_catalog(*fixed_catalog, *options.corrupt_scale);
    }
  }

  if (options.trials == 0) {
    if (options.json_output) {
      emit({{"event", "summary"}, {"trials", 0}, {"violations", 0}, {"message", "no trials"}});
    } else {
      std::cout << "no trials\n";
    }
    return kOk;
  }

  const auto run_trial = [&](size_t trial) {
    auto outcome = TrialOutcome{};
    auto seeds = std::seed_seq{options.seed, static_cast<uint64_t>(trial)};
    auto rng = std::mt19937_64{seeds};
    try {
      if (fixed_catalog) {
        outcome.query = generate_query(fixed_relations, fixed_schema, shape_for(trial), rng);
        outcome.report = verify_bound(fixed_relations, parse_query(outcome.query), *fixed_catalog);
      } else {
        const auto database = generate_database(rng);
        auto catalog = build_catalog(database.relations, database.schema);
        if (options.corrupt_scale) {
          catalog = scale_catalog(catalog, *options.corrupt_scale);
        }
        outcome.query = generate_query(database.relations, database.schema, shape_for(trial), rng);
        outcome.report = verify_bound(database.relations, parse_query(outcome.query), catalog);
      }
      outcome.status = outcome.report.pass ? TrialOutcome::Status::Pass : TrialOutcome::Status::Violation;
    } catch (const OracleTooLargeError& error) {
      outcome.note = error.what();
    } catch (const UnsupportedQueryError& error) {
      outcome.note = error.what();
    }
    return outcome;
  };

  auto outcomes = std::vector<TrialOutcome>(options.trials);
  auto next = std::atomic<size_t>{0};
  auto failure = std::exception_ptr{};
  auto failure_mutex = std::mutex{};
  const auto worker = [&] {
    for (auto index = next++; index < options.trials; index = next++) {
      try {
        outcomes[index] = run_trial(options.first_trial + index);
      } catch (...) {
        const auto lock = std::lock_guard{failure_mutex};
        failure = failure ? failure : std::current_exception();
      }
    }
  };
  const auto thread_count =
      std::min(options.trials, options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency()));
  auto workers = std::vector<std::thread>{};
  for (auto index = size_t{1}; index < thread_count; ++index) {
    workers.emplace_back(worker);
  }
  worker();
  for (auto& thread : workers) {
    thread.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  auto ratios = std::vector<double>{};
  auto violations = size_t{0};
  auto skipped = size_t{0};
  auto empty_results = size_t{0};
  for (auto index = size_t{0}; index < outcomes.size(); ++index) {
    const auto& outcome = outcomes[index];
    const auto trial = options.first_trial + index;
    if (outcome.status == TrialOutcome::Status::Skipped) {
      ++skipped;
      continue;
    }
    if (outcome.report.true_cardinality == 0) {
      ++empty_results;
    } else {
      ratios.push_back(outcome.report.ratio);
    }
    if (options.json_output) {
      emit({{"event", "trial"},
            {"trial", trial},
            {"pass", outcome.report.pass},
            {"true_cardinality", outcome.report.true_cardinality},
            {"bound", outcome.report.bound},
            {"strategy", outcome.report.strategy},
            {"query", outcome.query}});
    }
    if (outcome.status == TrialOutcome::Status::Violation) {
      ++violations;
      const auto reproduce = "seqbound verify" + (options.schema.empty() ? "" : " --schema " + options.schema) +
                             " --seed " + std::to_string(options.seed) + " --first-trial " + std::to_string(trial) +
                             " --trials 1";
      if (options.json_output) {
        emit({{"event", "violation"},
              {"seed", options.seed},
              {"trial", trial},
              {"query", outcome.query},
              {"true_cardinality", outcome.report.true_cardinality},
              {"bound", outcome.report.bound},
              {"reproduce", reproduce}});
      } else {
        std::cout << "violation: trial " << trial << " bound " << outcome.report.bound << " < true cardinality "
                  << outcome.report.true_cardinality << "\n  query: " << outcome.query
                  << "\n  reproduce: " << reproduce << '\n';
      }
    }
  }

  const auto p50 = quantile(ratios, 0.5);
  const auto p95 = quantile(ratios, 0.95);
  const auto max = ratios.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(ratios.begin(), ratios.end());
  if (options.json_output) {
    auto record = json{{"event", "summary"},
                       {"trials", options.trials},
                       {"violations", violations},
                       {"skipped", skipped},
                       {"empty_results", empty_results},
                       {"seed", options.seed}};
    if (!ratios.empty()) {
      record["ratio_p50"] = p50;
      record["ratio_p95"] = p95;
      record["ratio_max"] = max;
    }
    emit(record);
  } else {
    std::cout << "trials: " << options.trials << ", violations: " << violations << ", skipped: " << skipped
              << ", empty results: " << empty_results << '\n';
    if (!ratios.empty()) {
      std::cout << "bound/true ratio: p50 " << p50 << ", p95 " << p95 << ", max " << max << '\n';
    }
  }
  return violations == 0 ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------------------------------------------------

struct FamilyCounts {
  size_t members{0};
  size_t groups{0};
  size_t segments{0};
};

FamilyCounts count_family(const ConditionedStats& stats, const std::string& family) {
  auto counts = FamilyCounts{};
  if (family == "equality" && stats.equality) {
    counts.members = stats.equality->mcv_count;
    counts.groups = stats.equality->groups.size();
    for (const auto& group : stats.equality->groups) {
      counts.segments += group.representative.segment_count();
    }
  } else if (family == "range" && stats.range) {
    for (const auto& level : stats.range->bucket_groups) {
      counts.members += static_cast<size_t>(std::count_if(level.begin(), level.end(),
                                                          [](uint32_t group) { return group != kEmptyGroup; }));
    }
    counts.groups = stats.range->group_representatives.size();
    for (const auto& representative : stats.range->group_representatives) {
      counts.segments += representative.segment_count();
    }
  } else if (family == "like" && stats.like) {
    counts.members = stats.like->gram_groups.size();
    counts.groups = stats.like->group_representatives.size();
    for (const auto& representative : stats.like->group_representatives) {
      counts.segments += representative.segment_count();
    }
  }
  return counts;
}

int run_inspect(const std::string& catalog_path, bool json_output) {
  const auto catalog = load_catalog(catalog_path);
  const auto total_bytes = serialize_catalog(catalog).size();
  for (const auto& [name, relation] : catalog.relations) {
    auto alone = StatisticsCatalog{};
    alone.parameters = catalog.parameters;
    alone.relations.emplace(name, relation);
    const auto bytes = serialize_catalog(alone).size();
    if (json_output) {
      emit({{"event", "relation"}, {"name", name}, {"rows", relation.row_count}, {"bytes", bytes}});
    } else {
      std::cout << "relation " << name << ": " << relation.row_count << " rows, " << bytes << " bytes\n";
    }
    for (const auto& [column, summary] : relation.columns) {
      const auto segments = summary.cds.segment_count();
      const auto ratio =
          segments == 0 ? 0.0 : static_cast<double>(summary.distinct_count) / static_cast<double>(segments);
      if (json_output) {
        emit({{"event", "column"},
              {"relation", name},
              {"column", column},
              {"kind", summary.kind == ColumnKind::Numeric ? "numeric" : "text"},
              {"distinct", summary.distinct_count},
              {"nulls", summary.null_count},
              {"segments", segments},
              {"compression_ratio", ratio}});
      } else {
        std::cout << "  column " << column << ": " << summary.distinct_count << " distinct, " << summary.null_count
                  << " nulls, " << plural(segments, "segment") << ", compression ratio " << std::fixed
                  << std::setprecision(2) << ratio << '\n';
      }
    }
    for (const auto& [key, stats] : relation.conditioned) {
      for (const auto* family : {"equality", "range", "like"}) {
        const auto counts = count_family(stats, family);
        if (counts.groups == 0 && counts.members == 0) {
          continue;
        }
        if (json_output) {
          emit({{"event", "conditioned"},
                {"relation", name},
                {"join_column", key.first},
                {"filter_column", key.second},
                {"family", family},
                {"members", counts.members},
                {"groups", counts.groups},
                {"segments", counts.segments}});
        } else {
          std::cout << "  " << key.first << " | " << key.second << " " << family << ": " << counts.members
                    << " members in " << plural(counts.groups, "group") << ", " << plural(counts.segments, "segment")
                    << '\n';
        }
      }
    }
  }
  if (json_output) {
    emit({{"event", "catalog"}, {"path", catalog_path}, {"bytes", total_bytes}, {"relations", catalog.relations.size()}});
  } else {
    std::cout << "total: " << total_bytes << " bytes\n";
  }
  return kOk;
}

int report_error(const std::exception& error, int code, bool json_output) {
  if (json_output) {
    emit({{"event", "error"}, {"message", error.what()}, {"exit_code", code}});
  } else {
    std::cerr << "error: " << error.what() << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Pessimistic join cardinality bounds from compressed degree sequences"};
  app.require_subcommand(1);
  auto json_output = false;

  auto build = BuildOptions{};
  auto* build_command = app.add_subcommand("build", "Build a statistics catalog from CSV relations");
  build_command->add_option("--schema", build.schema, "Schema configuration (JSON)")->required();
  build_command->add_option("--out", build.out, "Catalog output path")->required();
  build_command->add_option("--c", build.accuracy, "Compression accuracy");
  build_command->add_option("--max-segments", build.max_segments, "Segment budget per compressed sequence");
  build_command->add_option("--hist-depth", build.histogram_depth, "Dyadic histogram depth");
  build_command->add_option("--mcv", build.mcv_size, "Most-common-value list size");
  build_command->add_option("--clusters", build.clusters, "Groups per family: auto or a count");
  build_command->add_option("--bloom-bits", build.bloom_bits, "Bloom filter bits per value");
  build_command->add_flag("--json", json_output, "Emit json-lines records");

  auto catalog_path = std::string{};
  auto query_argument = std::string{};
  auto trace = false;
  auto* estimate_command = app.add_subcommand("estimate", "Bound the output size of a query");
  estimate_command->add_option("--catalog", catalog_path, "Catalog path")->required();
  estimate_command->add_option("--query", query_argument, "SQL text, or @file")->required();
  estimate_command->add_flag("--trace", trace, "Print one line per plan step");
  estimate_command->add_flag("--json", json_output, "Emit json-lines records");

  auto verify = VerifyOptions{};
  auto* verify_command = app.add_subcommand("verify", "Check bounds against brute-force cardinalities");
  verify_command->add_option("--schema", verify.schema, "Fixed database to query; random databases if omitted");
  verify_command->add_option("--trials", verify.trials, "Number of trials")->capture_default_str();
  verify_command->add_option("--seed", verify.seed, "Random seed")->capture_default_str();
  verify_command->add_option("--first-trial", verify.first_trial, "Index of the first trial")->capture_default_str();
  verify_command->add_option("--corrupt-scale", verify.corrupt_scale,
                             "Scale every stored sequence by this factor (negative control)");
  verify_command->add_option("--threads", verify.threads, "Worker threads (0: all cores)")->capture_default_str();
  verify_command->add_flag("--json", json_output, "Emit json-lines records");

  auto* inspect_command = app.add_subcommand("inspect", "Summarize a catalog");
  inspect_command->add_option("--catalog", catalog_path, "Catalog path")->required();
  inspect_command->add_flag("--json", json_output, "Emit json-lines records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const auto code = app.exit(error);
    return code == 0 ? kOk : kIoOrConfig;
  }

  try {
    if (*build_command) {
      build.json_output = json_output;
      return run_build(build);
    }
    if (*estimate_command) {
      return run_estimate(catalog_path, query_argument, trace, json_output);
    }
    if (*verify_command) {
      verify.json_output = json_output;
      return run_verify(verify);
    }
    return run_inspect(catalog_path, json_output);
  } catch (const UnsupportedQueryError& error) {
    return report_error(error, kUnsupported, json_output);
  } catch (const InvariantError& error) {
    return report_error(error, kVerificationFailed, json_output);
  } catch (const Error& error) {
    return report_error(error, kIoOrConfig, json_output);
  } catch (const std::exception& error) {
    return report_error(error, kIoOrConfig, json_output);
  }
}
