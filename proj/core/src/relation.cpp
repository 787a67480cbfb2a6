#include "seqbound/relation.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

template <typename Key, typename Extract>
DegreeSequence count_groups(std::span<const uint32_t> rows, const Column& column, Extract&& extract) {
  auto counts = std::unordered_map<Key, uint64_t>{};
  counts.reserve(rows.size());
  for (const auto row : rows) {
    if (!column.is_null(row)) {
      ++counts[extract(row)];
    }
  }
  auto frequencies = std::vector<uint64_t>{};
  frequencies.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    frequencies.push_back(count);
  }
  return DegreeSequence::from_counts(std::move(frequencies));
}

}  // namespace

const char* to_string(ColumnKind kind) {
  return kind == ColumnKind::Numeric ? "numeric" : "text";
}

ColumnKind column_kind_from_string(const std::string& name) {
  if (name == "numeric" || name == "number" || name == "int" || name == "float") {
    return ColumnKind::Numeric;
  }
  if (name == "text" || name == "string") {
    return ColumnKind::Text;
  }
  throw ConfigError("unknown column kind '" + name + "'");
}

std::string value_key(const Value& value) {
  if (const auto* number = std::get_if<double>(&value)) {
    auto normalized = *number == 0.0 ? 0.0 : *number;
    auto key = std::string(1 + sizeof(double), 'n');
    std::memcpy(key.data() + 1, &normalized, sizeof(double));
    return key;
  }
  if (const auto* text = std::get_if<std::string>(&value)) {
    return "s" + *text;
  }
  return {};
}

bool value_less(const Value& lhs, const Value& rhs) {
  if (lhs.index() != rhs.index()) {
    return lhs.index() < rhs.index();
  }
  if (const auto* number = std::get_if<double>(&lhs)) {
    return *number < std::get<double>(rhs);
  }
  if (const auto* text = std::get_if<std::string>(&lhs)) {
    return *text < std::get<std::string>(rhs);
  }
  return false;
}

std::string value_to_string(const Value& value) {
  if (const auto* number = std::get_if<double>(&value)) {
    auto stream = std::ostringstream{};
    stream.precision(17);
    stream << *number;
    return stream.str();
  }
  if (const auto* text = std::get_if<std::string>(&value)) {
    return *text;
  }
  return "NULL";
}

Value Column::value(size_t row) const {
  if (is_null(row)) {
    return std::monostate{};
  }
  if (_kind == ColumnKind::Numeric) {
    return _numbers[row];
  }
  return _texts[row];
}

void Column::append(const Value& value) {
  if (_kind == ColumnKind::Numeric) {
    const auto* number = std::get_if<double>(&value);
    _numbers.push_back(number ? *number : 0.0);
    _null.push_back(number ? 0 : 1);
  } else {
    const auto* text = std::get_if<std::string>(&value);
    _texts.push_back(text ? *text : std::string{});
    _null.push_back(text ? 0 : 1);
  }
}

void Column::append_null() {
  append(std::monostate{});
}

size_t Column::null_count() const {
  return static_cast<size_t>(std::count(_null.begin(), _null.end(), uint8_t{1}));
}

bool Relation::has_column(const std::string& name) const {
  return std::any_of(_columns.begin(), _columns.end(), [&](const Column& column) { return column.name() == name; });
}

const Column& Relation::column(const std::string& name) const {
  for (const auto& column : _columns) {
    if (column.name() == name) {
      return column;
    }
  }
  throw ArgumentError("relation '" + _name + "' has no column '" + name + "'");
}

Column& Relation::column(const std::string& name) {
  return const_cast<Column&>(std::as_const(*this).column(name));
}

void Relation::add_column(Column column) {
  if (has_column(column.name())) {
    throw ArgumentError("relation '" + _name + "' already has column '" + column.name() + "'");
  }
  if (!_columns.empty() && column.size() != row_count()) {
    throw ArgumentError("column '" + column.name() + "' length differs from relation '" + _name + "'");
  }
  _columns.push_back(std::move(column));
}

DegreeSequence degree_sequence_of(const Column& column, std::span<const uint32_t> rows) {
  if (column.kind() == ColumnKind::Numeric) {
    return count_groups<double>(rows, column, [&](uint32_t row) {
      const auto number = column.number(row);
      return number == 0.0 ? 0.0 : number;
    });
  }
  return count_groups<std::string>(rows, column, [&](uint32_t row) { return column.text(row); });
}

DegreeSequence degree_sequence_of(const Column& column) {
  auto rows = std::vector<uint32_t>(column.size());
  std::iota(rows.begin(), rows.end(), uint32_t{0});
  return degree_sequence_of(column, rows);
}

DegreeSequence extract_degree_sequence(const Relation& relation, const std::string& column) {
  return degree_sequence_of(relation.column(column));
}

}  // namespace seqbound
