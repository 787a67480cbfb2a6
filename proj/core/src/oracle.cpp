#include "seqbound/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

std::string encode(const std::vector<std::string>& parts) {
  auto key = std::string{};
  for (const auto& part : parts) {
    key += std::to_string(part.size());
    key += ':';
    key += part;
  }
  return key;
}

struct Tuples {
  std::vector<std::string> variables;
  // Encoded values -> (values in `variables` order, multiplicity).
  std::unordered_map<std::string, std::pair<std::vector<std::string>, uint64_t>> rows;
};

uint64_t checked_product(uint64_t lhs, uint64_t rhs) {
  auto product = uint64_t{0};
  if (__builtin_mul_overflow(lhs, rhs, &product)) {
    throw OracleTooLargeError("join multiplicity overflows 64 bits");
  }
  return product;
}

bool compare(const Value& lhs, const Value& rhs, int& order) {
  if (const auto* left = std::get_if<double>(&lhs)) {
    const auto* right = std::get_if<double>(&rhs);
    if (!right) {
      return false;
    }
    order = *left < *right ? -1 : (*left > *right ? 1 : 0);
    return true;
  }
  if (const auto* left = std::get_if<std::string>(&lhs)) {
    const auto* right = std::get_if<std::string>(&rhs);
    if (!right) {
      return false;
    }
    order = left->compare(*right) < 0 ? -1 : (left->compare(*right) > 0 ? 1 : 0);
    return true;
  }
  return false;
}

char fold(char character) {
  return character >= 'A' && character <= 'Z' ? static_cast<char>(character - 'A' + 'a') : character;
}

// ---------------------------------------------------------------------------------------------------------------------

std::vector<double> zipf_weights(size_t count, double exponent) {
  auto weights = std::vector<double>(count);
  for (auto rank = size_t{0}; rank < count; ++rank) {
    weights[rank] = 1.0 / std::pow(static_cast<double>(rank + 1), exponent);
  }
  return weights;
}

template <typename T>
const T& pick(const std::vector<T>& values, std::mt19937_64& rng) {
  return values[std::uniform_int_distribution<size_t>{0, values.size() - 1}(rng)];
}

bool chance(double probability, std::mt19937_64& rng) {
  return std::bernoulli_distribution{probability}(rng);
}

std::string sql_literal(const Value& value) {
  if (const auto* number = std::get_if<double>(&value)) {
    auto out = std::ostringstream{};
    out << *number;
    return out.str();
  }
  auto quoted = std::string{"'"};
  for (const auto character : std::get<std::string>(value)) {
    quoted += character;
    if (character == '\'') {
      quoted += '\'';
    }
  }
  return quoted + "'";
}

class QueryWriter {
 public:
  QueryWriter(std::span<const Relation> database, const DatabaseSchema& schema, std::mt19937_64& rng)
      : _database(database), _schema(schema), _rng(rng) {}

  std::string write(QueryShape shape) {
    switch (shape) {
      case QueryShape::Acyclic: {
        const auto count = std::uniform_int_distribution<size_t>{1, 4}(_rng);
        add_atoms(count);
        for (auto atom = size_t{1}; atom < count; ++atom) {
          const auto parent = std::uniform_int_distribution<size_t>{0, atom - 1}(_rng);
          join(atom, join_column(atom), parent, join_column(parent));
        }
        break;
      }
      case QueryShape::Cyclic: {
        const auto count = std::uniform_int_distribution<size_t>{3, 4}(_rng);
        add_atoms(count);
        auto in_columns = std::vector<std::string>(count);
        auto out_columns = std::vector<std::string>(count);
        for (auto atom = size_t{0}; atom < count; ++atom) {
          const auto pair = two_columns(atom);
          in_columns[atom] = pair.first;
          out_columns[atom] = pair.second;
        }
        for (auto atom = size_t{0}; atom < count; ++atom) {
          const auto next = (atom + 1) % count;
          join(atom, out_columns[atom], next, in_columns[next]);
        }
        if (count == 4 && chance(0.3, _rng)) {
          join(0, in_columns[0], 2, out_columns[2]);
        }
        break;
      }
      case QueryShape::MultiColumn: {
        const auto count = chance(0.5, _rng) ? size_t{3} : size_t{2};
        add_atoms(count);
        const auto left = two_columns(0);
        const auto right = two_columns(1);
        join(0, left.first, 1, right.first);
        join(0, left.second, 1, right.second);
        if (count == 3) {
          join(2, join_column(2), std::uniform_int_distribution<size_t>{0, 1}(_rng), join_column(0));
        }
        break;
      }
    }

    // Mostly zero to two predicates; more of them rarely leave a non-empty result on small relations.
    const auto predicates = static_cast<int>(std::discrete_distribution<int>{30, 30, 20, 12, 8}(_rng));
    for (auto index = 0; index < predicates; ++index) {
      const auto atom = std::uniform_int_distribution<size_t>{0, _atoms.size() - 1}(_rng);
      _conjuncts.push_back(predicate(atom, std::uniform_int_distribution<int>{0, 4}(_rng), true));
    }

    auto out = std::ostringstream{};
    out << "SELECT COUNT(*) FROM ";
    for (auto index = size_t{0}; index < _atoms.size(); ++index) {
      out << (index ? ", " : "") << _atoms[index]->name() << " AS x" << index;
    }
    for (auto index = size_t{0}; index < _conjuncts.size(); ++index) {
      out << (index ? " AND " : " WHERE ") << _conjuncts[index];
    }
    return out.str();
  }

 private:
  void add_atoms(size_t count) {
    for (auto index = size_t{0}; index < count; ++index) {
      _atoms.push_back(&_database[std::uniform_int_distribution<size_t>{0, _database.size() - 1}(_rng)]);
    }
  }

  std::vector<std::string> join_candidates(size_t atom) const {
    const auto& relation = *_atoms[atom];
    auto candidates = std::vector<std::string>{};
    const auto role = _schema.roles.find(relation.name());
    if (role != _schema.roles.end()) {
      candidates = role->second.join_columns;
    }
    if (candidates.empty() || chance(0.15, _rng)) {
      for (const auto& column : relation.columns()) {
        if (column.kind() == ColumnKind::Numeric &&
            std::find(candidates.begin(), candidates.end(), column.name()) == candidates.end()) {
          candidates.push_back(column.name());
        }
      }
    }
    return candidates;
  }

  std::string join_column(size_t atom) {
    return pick(join_candidates(atom), _rng);
  }

  std::pair<std::string, std::string> two_columns(size_t atom) {
    auto candidates = join_candidates(atom);
    if (candidates.size() < 2) {
      for (const auto& column : _atoms[atom]->columns()) {
        if (column.kind() == ColumnKind::Numeric &&
            std::find(candidates.begin(), candidates.end(), column.name()) == candidates.end()) {
          candidates.push_back(column.name());
        }
      }
    }
    std::shuffle(candidates.begin(), candidates.end(), _rng);
    if (candidates.size() < 2) {
      return {candidates.front(), candidates.front()};
    }
    return {candidates[0], candidates[1]};
  }

  void join(size_t lhs, const std::string& lhs_column, size_t rhs, const std::string& rhs_column) {
    _conjuncts.push_back("x" + std::to_string(lhs) + "." + lhs_column + " = x" + std::to_string(rhs) + "." +
                         rhs_column);
  }

  const Column& filter_column(size_t atom, ColumnKind kind) const {
    const auto& relation = *_atoms[atom];
    auto candidates = std::vector<const Column*>{};
    const auto role = _schema.roles.find(relation.name());
    if (role != _schema.roles.end()) {
      for (const auto& name : role->second.filter_columns) {
        if (relation.has_column(name) && relation.column(name).kind() == kind) {
          candidates.push_back(&relation.column(name));
        }
      }
    }
    if (candidates.empty() || chance(0.1, _rng)) {
      for (const auto& column : relation.columns()) {
        if (column.kind() == kind) {
          candidates.push_back(&column);
        }
      }
    }
    if (candidates.empty()) {
      return relation.columns().front();
    }
    return *pick(candidates, _rng);
  }

  Value sample_value(const Column& column) const {
    if (column.size() > 0 && chance(0.8, _rng)) {
      const auto row = std::uniform_int_distribution<size_t>{0, column.size() - 1}(_rng);
      if (!column.is_null(row)) {
        return column.value(row);
      }
    }
    if (column.kind() == ColumnKind::Numeric) {
      return static_cast<double>(std::uniform_int_distribution<int>{-2, 40}(_rng));
    }
    auto text = std::string{};
    for (auto index = 0; index < 3; ++index) {
      text.push_back(static_cast<char>('a' + std::uniform_int_distribution<int>{0, 4}(_rng)));
    }
    return text;
  }

  std::string like_pattern(const Column& column) const {
    auto source = std::get<std::string>(sample_value(column));
    const auto length = std::uniform_int_distribution<size_t>{1, std::max<size_t>(1, source.size())}(_rng);
    const auto start = std::uniform_int_distribution<size_t>{0, source.size() - std::min(length, source.size())}(_rng);
    auto piece = source.substr(start, length);
    if (chance(0.2, _rng)) {
      for (auto& character : piece) {
        character = static_cast<char>(std::toupper(static_cast<unsigned char>(character)));
      }
    }
    if (piece.size() >= 3 && chance(0.2, _rng)) {
      piece[1] = '_';
    }
    switch (std::uniform_int_distribution<int>{0, 3}(_rng)) {
      case 0:
        return piece + "%";
      case 1:
        return "%" + piece;
      case 2:
        return piece;
      default:
        return "%" + piece + "%";
    }
  }

  std::string predicate(size_t atom, int kind, bool allow_or) {
    const auto alias = "x" + std::to_string(atom) + ".";
    switch (kind) {
      case 0: {
        const auto& column = filter_column(atom, chance(0.5, _rng) ? ColumnKind::Numeric : ColumnKind::Text);
        return alias + column.name() + " = " + sql_literal(sample_value(column));
      }
      case 1: {
        if (chance(0.1, _rng)) {
          const auto& column = filter_column(atom, ColumnKind::Text);
          return alias + column.name() + (chance(0.5, _rng) ? " < " : " >= ") + sql_literal(sample_value(column));
        }
        const auto& column = filter_column(atom, ColumnKind::Numeric);
        auto lower = sample_value(column);
        auto upper = sample_value(column);
        if (column.kind() != ColumnKind::Numeric) {
          return alias + column.name() + " >= " + sql_literal(lower);
        }
        static const char* operators[] = {" < ", " <= ", " > ", " >= "};
        if (chance(0.3, _rng)) {
          if (std::get<double>(upper) < std::get<double>(lower) && chance(0.8, _rng)) {
            std::swap(lower, upper);
          }
          return alias + column.name() + " BETWEEN " + sql_literal(lower) + " AND " + sql_literal(upper);
        }
        return alias + column.name() + operators[std::uniform_int_distribution<int>{0, 3}(_rng)] + sql_literal(lower);
      }
      case 2: {
        const auto& column = filter_column(atom, ColumnKind::Text);
        if (column.kind() != ColumnKind::Text) {
          return predicate(atom, 0, allow_or);
        }
        return alias + column.name() + " LIKE " + sql_literal(like_pattern(column));
      }
      case 3: {
        const auto& column = filter_column(atom, chance(0.5, _rng) ? ColumnKind::Numeric : ColumnKind::Text);
        const auto count = std::uniform_int_distribution<int>{1, 4}(_rng);
        auto text = alias + column.name() + " IN (";
        for (auto index = 0; index < count; ++index) {
          text += (index ? ", " : "") + sql_literal(sample_value(column));
        }
        return text + ")";
      }
      default: {
        if (!allow_or) {
          return predicate(atom, 0, false);
        }
        const auto count = std::uniform_int_distribution<int>{2, 3}(_rng);
        auto text = std::string{"("};
        for (auto index = 0; index < count; ++index) {
          text += (index ? " OR " : "") + predicate(atom, std::uniform_int_distribution<int>{0, 3}(_rng), false);
        }
        if (chance(0.3, _rng)) {
          text += " OR (" + predicate(atom, 0, false) + " AND " + predicate(atom, 1, false) + ")";
        }
        return text + ")";
      }
    }
  }

  std::span<const Relation> _database;
  const DatabaseSchema& _schema;
  std::mt19937_64& _rng;
  std::vector<const Relation*> _atoms;
  std::vector<std::string> _conjuncts;
};

}  // namespace

// ---------------------------------------------------------------------------------------------------------------------

Relation WorstCaseInstance::to_relation(const std::string& name, std::span<const std::string> column_names) const {
  if (column_names.size() != columns.size()) {
    throw ArgumentError("need one name per worst-case column");
  }
  auto relation = Relation{name};
  for (auto index = size_t{0}; index < columns.size(); ++index) {
    auto column = Column{column_names[index], ColumnKind::Numeric};
    for (const auto rank : columns[index]) {
      column.append(static_cast<double>(rank));
    }
    relation.add_column(std::move(column));
  }
  return relation;
}

WorstCaseInstance materialize_worst_case(std::span<const DegreeSequence> sequences) {
  auto instance = WorstCaseInstance{};
  for (const auto& sequence : sequences) {
    if (!instance.columns.empty() && sequence.cardinality() != instance.row_count()) {
      throw ArgumentError("worst-case columns disagree on the cardinality (" + std::to_string(sequence.cardinality()) +
                          " vs " + std::to_string(instance.row_count()) + ")");
    }
    auto column = std::vector<uint64_t>{};
    column.reserve(sequence.cardinality());
    for (auto rank = size_t{0}; rank < sequence.distinct_count(); ++rank) {
      column.insert(column.end(), sequence.frequencies()[rank], rank + 1);
    }
    instance.columns.push_back(std::move(column));
  }
  return instance;
}

DegreeSequence integerize(const PiecewiseLinearFn& cds) {
  auto counts = std::vector<uint64_t>{};
  const auto end = static_cast<size_t>(std::ceil(cds.domain_end() - kTolerance));
  auto previous = 0.0;
  for (auto rank = size_t{1}; rank <= end; ++rank) {
    const auto current = cds.evaluate_extended(static_cast<double>(rank));
    const auto increment = current - previous;
    previous = current;
    const auto frequency = std::ceil(increment - kTolerance * std::max(1.0, increment));
    if (frequency > 0.0) {
      counts.push_back(static_cast<uint64_t>(frequency));
    }
  }
  return DegreeSequence::from_counts(std::move(counts));
}

WorstCaseInstance materialize_from_compressed(std::span<const PiecewiseLinearFn> cdss) {
  auto sequences = std::vector<DegreeSequence>{};
  auto heaviest = uint64_t{0};
  for (const auto& cds : cdss) {
    if (!cdss.empty() && std::abs(cds.total() - cdss.front().total()) > 1e-6 * std::max(1.0, cdss.front().total())) {
      throw ArgumentError("compressed columns disagree on the mass");
    }
    sequences.push_back(integerize(cds));
    heaviest = std::max(heaviest, sequences.back().cardinality());
  }
  for (auto& sequence : sequences) {
    auto frequencies = sequence.frequencies();
    frequencies.insert(frequencies.end(), heaviest - sequence.cardinality(), uint64_t{1});
    sequence = DegreeSequence{std::move(frequencies)};
  }
  return materialize_worst_case(sequences);
}

uint64_t value_tensor_probe(const WorstCaseInstance& instance, uint64_t m1, uint64_t m2) {
  if (instance.columns.size() != 2) {
    throw ArgumentError("the value tensor probe needs a binary instance");
  }
  auto count = uint64_t{0};
  for (auto row = size_t{0}; row < instance.row_count(); ++row) {
    count += instance.columns[0][row] <= m1 && instance.columns[1][row] <= m2 ? 1 : 0;
  }
  return count;
}

// ---------------------------------------------------------------------------------------------------------------------

bool like_matches(std::string_view text, std::string_view pattern) {
  auto t = size_t{0};
  auto p = size_t{0};
  auto star = std::string_view::npos;
  auto resume = size_t{0};
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      resume = t;
    } else if (p < pattern.size() && (pattern[p] == '_' || fold(pattern[p]) == fold(text[t]))) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') {
    ++p;
  }
  return p == pattern.size();
}

bool predicate_matches(const Relation& relation, size_t row, const Predicate& predicate) {
  switch (predicate.kind) {
    case Predicate::Kind::And:
      return std::all_of(predicate.children.begin(), predicate.children.end(),
                         [&](const Predicate& child) { return predicate_matches(relation, row, child); });
    case Predicate::Kind::Or:
      return std::any_of(predicate.children.begin(), predicate.children.end(),
                         [&](const Predicate& child) { return predicate_matches(relation, row, child); });
    default:
      break;
  }

  const auto& column = relation.column(predicate.column);
  if (column.is_null(row)) {
    return false;
  }
  const auto value = column.value(row);
  switch (predicate.kind) {
    case Predicate::Kind::Equality:
      return value_key(value) == value_key(predicate.value);
    case Predicate::Kind::In:
      return std::any_of(predicate.values.begin(), predicate.values.end(),
                         [&](const Value& candidate) { return value_key(value) == value_key(candidate); });
    case Predicate::Kind::Range: {
      auto order = 0;
      if (predicate.lower) {
        if (!compare(value, *predicate.lower, order) || order < 0 || (order == 0 && !predicate.lower_inclusive)) {
          return false;
        }
      }
      if (predicate.upper) {
        if (!compare(value, *predicate.upper, order) || order > 0 || (order == 0 && !predicate.upper_inclusive)) {
          return false;
        }
      }
      return true;
    }
    case Predicate::Kind::Like: {
      const auto* text = std::get_if<std::string>(&value);
      return text && like_matches(*text, predicate.pattern);
    }
    default:
      return false;
  }
}

uint64_t true_cardinality(std::span<const Relation> database, const QueryAst& query, uint64_t row_cap) {
  if (query.atoms.empty()) {
    return 0;
  }
  auto by_name = std::map<std::string, const Relation*>{};
  for (const auto& relation : database) {
    by_name[relation.name()] = &relation;
  }

  // Variables that actually constrain something.
  auto active = std::set<std::string>{};
  for (const auto& variable : query.variables()) {
    const auto holders = query.atoms_with(variable);
    if (holders.size() > 1 || query.atoms[holders.front()].variables.at(variable).size() > 1) {
      active.insert(variable);
    }
  }

  auto per_atom = std::vector<Tuples>{};
  for (const auto& atom : query.atoms) {
    const auto it = by_name.find(atom.relation);
    if (it == by_name.end()) {
      throw QueryError("unknown relation '" + atom.relation + "'");
    }
    const auto& relation = *it->second;
    auto tuples = Tuples{};
    auto bindings = std::vector<const std::vector<std::string>*>{};
    for (const auto& [variable, columns] : atom.variables) {
      if (active.contains(variable)) {
        tuples.variables.push_back(variable);
        bindings.push_back(&columns);
      }
    }
    for (const auto& [variable, columns] : atom.variables) {
      for (const auto& column : columns) {
        if (!relation.has_column(column)) {
          throw QueryError("unknown column '" + atom.alias + "." + column + "'");
        }
      }
    }
    if (atom.predicate) {
      for (const auto& column : atom.predicate->columns()) {
        if (!relation.has_column(column)) {
          throw QueryError("unknown column '" + atom.alias + "." + column + "'");
        }
      }
    }

    for (auto row = size_t{0}; row < relation.row_count(); ++row) {
      if (atom.predicate && !predicate_matches(relation, row, *atom.predicate)) {
        continue;
      }
      auto values = std::vector<std::string>{};
      auto keep = true;
      for (const auto* columns : bindings) {
        auto key = std::string{};
        for (auto index = size_t{0}; index < columns->size() && keep; ++index) {
          const auto& column = relation.column((*columns)[index]);
          if (column.is_null(row)) {
            keep = false;
            break;
          }
          const auto current = value_key(column.value(row));
          if (index > 0 && current != key) {
            keep = false;
          }
          key = current;
        }
        if (!keep) {
          break;
        }
        values.push_back(std::move(key));
      }
      if (!keep) {
        continue;
      }
      auto encoded = encode(values);
      auto& entry = tuples.rows[encoded];
      if (entry.second == 0) {
        entry.first = std::move(values);
      }
      ++entry.second;
    }
    per_atom.push_back(std::move(tuples));
  }

  // Breadth-first order keeps every step connected to what is already joined when possible.
  auto order = std::vector<size_t>{};
  auto placed = std::vector<bool>(query.atoms.size(), false);
  for (auto start = size_t{0}; start < query.atoms.size(); ++start) {
    if (placed[start]) {
      continue;
    }
    auto queue = std::deque<size_t>{start};
    placed[start] = true;
    while (!queue.empty()) {
      const auto atom = queue.front();
      queue.pop_front();
      order.push_back(atom);
      for (const auto& variable : per_atom[atom].variables) {
        for (const auto other : query.atoms_with(variable)) {
          if (!placed[other]) {
            placed[other] = true;
            queue.push_back(other);
          }
        }
      }
    }
  }

  auto state = Tuples{};
  state.rows[encode({})] = {{}, 1};
  auto work = uint64_t{0};
  for (auto position = size_t{0}; position < order.size(); ++position) {
    const auto& next = per_atom[order[position]];
    auto needed = std::set<std::string>{};
    for (auto later = position + 1; later < order.size(); ++later) {
      needed.insert(per_atom[order[later]].variables.begin(), per_atom[order[later]].variables.end());
    }

    // Positions of shared variables on both sides, and where each output variable comes from.
    auto shared_state = std::vector<size_t>{};
    auto shared_next = std::vector<size_t>{};
    for (auto index = size_t{0}; index < next.variables.size(); ++index) {
      const auto it = std::find(state.variables.begin(), state.variables.end(), next.variables[index]);
      if (it != state.variables.end()) {
        shared_state.push_back(static_cast<size_t>(it - state.variables.begin()));
        shared_next.push_back(index);
      }
    }
    auto output = Tuples{};
    auto sources = std::vector<std::pair<bool, size_t>>{};
    for (auto index = size_t{0}; index < state.variables.size(); ++index) {
      if (needed.contains(state.variables[index])) {
        output.variables.push_back(state.variables[index]);
        sources.emplace_back(false, index);
      }
    }
    for (auto index = size_t{0}; index < next.variables.size(); ++index) {
      const auto& variable = next.variables[index];
      if (needed.contains(variable) &&
          std::find(output.variables.begin(), output.variables.end(), variable) == output.variables.end()) {
        output.variables.push_back(variable);
        sources.emplace_back(true, index);
      }
    }

    auto index = std::unordered_map<std::string, std::vector<const std::pair<std::vector<std::string>, uint64_t>*>>{};
    for (const auto& [key, entry] : next.rows) {
      auto probe = std::vector<std::string>{};
      for (const auto position_in_next : shared_next) {
        probe.push_back(entry.first[position_in_next]);
      }
      index[encode(probe)].push_back(&entry);
    }

    for (const auto& [key, left] : state.rows) {
      auto probe = std::vector<std::string>{};
      for (const auto position_in_state : shared_state) {
        probe.push_back(left.first[position_in_state]);
      }
      const auto matches = index.find(encode(probe));
      if (matches == index.end()) {
        continue;
      }
      for (const auto* right : matches->second) {
        if (++work > row_cap) {
          throw OracleTooLargeError("oracle exceeded " + std::to_string(row_cap) + " intermediate rows");
        }
        auto values = std::vector<std::string>{};
        values.reserve(sources.size());
        for (const auto& [from_next, source] : sources) {
          values.push_back(from_next ? right->first[source] : left.first[source]);
        }
        auto encoded = encode(values);
        auto& entry = output.rows[encoded];
        if (entry.second == 0) {
          entry.first = std::move(values);
        }
        const auto added = checked_product(left.second, right->second);
        if (__builtin_add_overflow(entry.second, added, &entry.second)) {
          throw OracleTooLargeError("join multiplicity overflows 64 bits");
        }
      }
    }
    if (output.rows.size() > row_cap) {
      throw OracleTooLargeError("oracle exceeded " + std::to_string(row_cap) + " intermediate rows");
    }
    state = std::move(output);
  }

  auto total = uint64_t{0};
  for (const auto& [key, entry] : state.rows) {
    total += entry.second;
  }
  return total;
}

VerifyReport verify_bound(std::span<const Relation> database, const QueryAst& query, const StatisticsCatalog& catalog) {
  auto report = VerifyReport{};
  report.true_cardinality = true_cardinality(database, query);
  const auto result = bound_query(catalog, query);
  report.bound = result.bound;
  report.strategy = result.strategy;
  report.pass = report.bound >= report.true_cardinality;
  if (report.true_cardinality == 0) {
    report.ratio = report.bound == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    report.ratio = static_cast<double>(report.bound) / static_cast<double>(report.true_cardinality);
  }
  return report;
}

StatisticsCatalog scale_catalog(const StatisticsCatalog& catalog, double factor) {
  const auto scale = [&](PiecewiseLinearFn& cds) {
    auto knots = cds.knots();
    for (auto& knot : knots) {
      knot.y *= factor;
    }
    cds = PiecewiseLinearFn{std::move(knots)};
  };
  auto scaled = catalog;
  for (auto& [name, relation] : scaled.relations) {
    for (auto& [column, summary] : relation.columns) {
      scale(summary.cds);
    }
    for (auto& [key, conditioned] : relation.conditioned) {
      if (conditioned.equality) {
        for (auto& group : conditioned.equality->groups) {
          scale(group.representative);
        }
        scale(conditioned.equality->default_cds);
      }
      if (conditioned.range) {
        for (auto& representative : conditioned.range->group_representatives) {
          scale(representative);
        }
      }
      if (conditioned.like) {
        for (auto& representative : conditioned.like->group_representatives) {
          scale(representative);
        }
        scale(conditioned.like->default_cds);
      }
    }
    relation.row_count = static_cast<uint64_t>(std::floor(static_cast<double>(relation.row_count) * factor));
    for (auto& [column, summary] : relation.columns) {
      summary.null_count = static_cast<uint64_t>(std::floor(static_cast<double>(summary.null_count) * factor));
    }
  }
  return scaled;
}

// ---------------------------------------------------------------------------------------------------------------------

RandomDatabase generate_database(std::mt19937_64& rng, const GeneratorOptions& options) {
  auto database = RandomDatabase{};
  const auto relation_count = std::uniform_int_distribution<size_t>{options.min_relations, options.max_relations}(rng);
  const auto domain = std::uniform_int_distribution<size_t>{5, 60}(rng);

  for (auto index = size_t{0}; index < relation_count; ++index) {
    const auto name = "r" + std::to_string(index);
    const auto rows = std::uniform_int_distribution<size_t>{options.min_rows, options.max_rows}(rng);
    auto relation = Relation{name};

    auto ids = std::vector<double>(rows);
    for (auto row = size_t{0}; row < rows; ++row) {
      ids[row] = static_cast<double>(row);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    auto id = Column{"id", ColumnKind::Numeric};
    for (const auto value : ids) {
      id.append(value);
    }
    relation.add_column(std::move(id));

    const auto null_rate = [&] { return chance(0.3, rng) ? std::uniform_real_distribution<double>{0.05, 0.15}(rng) : 0.0; };

    for (const auto* column_name : {"j0", "j1", "j2"}) {
      auto column = Column{column_name, ColumnKind::Numeric};
      const auto nulls = null_rate();
      if (chance(options.key_column_probability, rng)) {
        auto values = ids;
        std::shuffle(values.begin(), values.end(), rng);
        for (const auto value : values) {
          chance(nulls, rng) ? column.append_null() : column.append(value);
        }
      } else {
        const auto weights = zipf_weights(domain, std::uniform_real_distribution<double>{0.0, options.max_zipf}(rng));
        auto sampler = std::discrete_distribution<size_t>{weights.begin(), weights.end()};
        auto labels = std::vector<size_t>(domain);
        std::iota(labels.begin(), labels.end(), size_t{0});
        if (chance(0.5, rng)) {
          std::shuffle(labels.begin(), labels.end(), rng);
        }
        for (auto row = size_t{0}; row < rows; ++row) {
          chance(nulls, rng) ? column.append_null() : column.append(static_cast<double>(labels[sampler(rng)]));
        }
      }
      relation.add_column(std::move(column));
    }

    {
      auto column = Column{"a", ColumnKind::Numeric};
      const auto weights = zipf_weights(20, std::uniform_real_distribution<double>{0.0, 1.5}(rng));
      auto sampler = std::discrete_distribution<size_t>{weights.begin(), weights.end()};
      const auto nulls = null_rate();
      for (auto row = size_t{0}; row < rows; ++row) {
        chance(nulls, rng) ? column.append_null() : column.append(static_cast<double>(sampler(rng)));
      }
      relation.add_column(std::move(column));
    }
    {
      auto column = Column{"t", ColumnKind::Text};
      const auto weights = zipf_weights(4, std::uniform_real_distribution<double>{0.0, 1.5}(rng));
      auto sampler = std::discrete_distribution<size_t>{weights.begin(), weights.end()};
      const auto nulls = null_rate();
      for (auto row = size_t{0}; row < rows; ++row) {
        if (chance(nulls, rng)) {
          column.append_null();
          continue;
        }
        auto text = std::string{};
        for (auto letter = 0; letter < 3; ++letter) {
          const auto base = chance(0.1, rng) ? 'A' : 'a';
          text.push_back(static_cast<char>(base + static_cast<char>(sampler(rng))));
        }
        column.append(text);
      }
      relation.add_column(std::move(column));
    }

    auto role = ColumnRole{};
    role.join_columns.push_back("id");
    for (const auto* column_name : {"j0", "j1", "j2"}) {
      if (chance(0.8, rng)) {
        role.join_columns.push_back(column_name);
      }
    }
    for (const auto* column_name : {"a", "t"}) {
      if (chance(0.9, rng)) {
        role.filter_columns.push_back(column_name);
      }
    }
    database.schema.roles.emplace(name, std::move(role));
    database.relations.push_back(std::move(relation));
  }

  if (relation_count >= 2 && chance(0.5, rng)) {
    const auto edges = std::uniform_int_distribution<int>{1, 2}(rng);
    for (auto edge = 0; edge < edges; ++edge) {
      const auto fact = std::uniform_int_distribution<size_t>{0, relation_count - 1}(rng);
      auto dim = std::uniform_int_distribution<size_t>{0, relation_count - 2}(rng);
      dim += dim >= fact ? 1 : 0;
      static const std::vector<std::string> foreign_keys{"j0", "j1", "j2"};
      database.schema.pk_fk.push_back({"r" + std::to_string(fact), pick(foreign_keys, rng), "r" + std::to_string(dim), "id"});
    }
  }

  auto& parameters = database.schema.parameters;
  static const std::vector<double> accuracies{0.001, 0.01, 0.1, 0.5, 1.0};
  parameters.accuracy = pick(accuracies, rng);
  if (chance(0.25, rng)) {
    parameters.max_segments = std::uniform_int_distribution<size_t>{2, 6}(rng);
  }
  parameters.histogram_depth = std::uniform_int_distribution<uint32_t>{1, 4}(rng);
  parameters.mcv_size = std::uniform_int_distribution<uint32_t>{1, 8}(rng);
  if (chance(0.5, rng)) {
    parameters.clusters.fixed_count = std::uniform_int_distribution<size_t>{1, 4}(rng);
  }
  parameters.bloom_bits_per_value = chance(0.25, rng) ? 4.0 : 12.0;
  return database;
}

std::string generate_query(std::span<const Relation> database, const DatabaseSchema& schema, QueryShape shape,
                           std::mt19937_64& rng) {
  if (database.empty()) {
    throw ArgumentError("cannot generate a query over an empty database");
  }
  return QueryWriter{database, schema, rng}.write(shape);
}

}  // namespace seqbound
