#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqbound/pw_function.hpp"

namespace seqbound {

enum class ColumnKind : uint8_t { Numeric = 0, Text = 1 };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& name);

// A cell: null, a number, or a string.
using Value = std::variant<std::monostate, double, std::string>;

inline bool is_null(const Value& value) {
  return std::holds_alternative<std::monostate>(value);
}

// Byte string identifying a non-null value; equal values produce equal keys (-0.0 and 0.0 included).
std::string value_key(const Value& value);

// Total order used for determinism: null < numbers < strings.
bool value_less(const Value& lhs, const Value& rhs);

std::string value_to_string(const Value& value);

class Column {
 public:
  Column(std::string name, ColumnKind kind) : _name(std::move(name)), _kind(kind) {}

  const std::string& name() const {
    return _name;
  }

  ColumnKind kind() const {
    return _kind;
  }

  size_t size() const {
    return _null.size();
  }

  bool is_null(size_t row) const {
    return _null[row] != 0;
  }

  double number(size_t row) const {
    return _numbers[row];
  }

  const std::string& text(size_t row) const {
    return _texts[row];
  }

  Value value(size_t row) const;

  // Values of the wrong kind are stored as null.
  void append(const Value& value);
  void append_null();

  size_t null_count() const;

 private:
  std::string _name;
  ColumnKind _kind;
  std::vector<double> _numbers;
  std::vector<std::string> _texts;
  std::vector<uint8_t> _null;
};

class Relation {
 public:
  explicit Relation(std::string name) : _name(std::move(name)) {}

  const std::string& name() const {
    return _name;
  }

  size_t row_count() const {
    return _columns.empty() ? 0 : _columns.front().size();
  }

  const std::vector<Column>& columns() const {
    return _columns;
  }

  bool has_column(const std::string& name) const;

  // Throws ArgumentError for unknown columns.
  const Column& column(const std::string& name) const;
  Column& column(const std::string& name);

  // Throws ArgumentError if the length differs from existing columns or the name is taken.
  void add_column(Column column);

 private:
  std::string _name;
  std::vector<Column> _columns;
};

// Group-by count over the non-null values of the column, sorted descending. With rows given, only those rows count.
DegreeSequence extract_degree_sequence(const Relation& relation, const std::string& column);
DegreeSequence degree_sequence_of(const Column& column, std::span<const uint32_t> rows);
DegreeSequence degree_sequence_of(const Column& column);

}  // namespace seqbound
