#include "seqbound/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

// ---------------------------------------------------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------------------------------------------------

struct Token {
  enum class Kind { Identifier, Number, String, Symbol, End };

  Kind kind{Kind::End};
  std::string text;
  size_t offset{0};
};

bool is_identifier_start(char character) {
  return std::isalpha(static_cast<unsigned char>(character)) || character == '_';
}

bool is_identifier_char(char character) {
  return std::isalnum(static_cast<unsigned char>(character)) || character == '_';
}

std::string upper(std::string_view text) {
  auto result = std::string{text};
  for (auto& character : result) {
    character = static_cast<char>(std::toupper(static_cast<unsigned char>(character)));
  }
  return result;
}

std::vector<Token> tokenize(std::string_view text) {
  auto tokens = std::vector<Token>{};
  auto index = size_t{0};
  while (index < text.size()) {
    const auto character = text[index];
    if (std::isspace(static_cast<unsigned char>(character))) {
      ++index;
      continue;
    }
    const auto start = index;
    if (is_identifier_start(character)) {
      while (index < text.size() && is_identifier_char(text[index])) {
        ++index;
      }
      tokens.push_back({Token::Kind::Identifier, std::string{text.substr(start, index - start)}, start});
    } else if (std::isdigit(static_cast<unsigned char>(character)) ||
               (character == '.' && index + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[index + 1])))) {
      while (index < text.size() && (std::isdigit(static_cast<unsigned char>(text[index])) || text[index] == '.')) {
        ++index;
      }
      if (index < text.size() && (text[index] == 'e' || text[index] == 'E')) {
        auto exponent = index + 1;
        if (exponent < text.size() && (text[exponent] == '+' || text[exponent] == '-')) {
          ++exponent;
        }
        if (exponent < text.size() && std::isdigit(static_cast<unsigned char>(text[exponent]))) {
          index = exponent;
          while (index < text.size() && std::isdigit(static_cast<unsigned char>(text[index]))) {
            ++index;
          }
        }
      }
      tokens.push_back({Token::Kind::Number, std::string{text.substr(start, index - start)}, start});
    } else if (character == '\'') {
      auto value = std::string{};
      ++index;
      auto closed = false;
      while (index < text.size()) {
        if (text[index] == '\'') {
          if (index + 1 < text.size() && text[index + 1] == '\'') {
            value.push_back('\'');
            index += 2;
            continue;
          }
          ++index;
          closed = true;
          break;
        }
        value.push_back(text[index++]);
      }
      if (!closed) {
        throw QueryError("unterminated string literal", start);
      }
      tokens.push_back({Token::Kind::String, std::move(value), start});
    } else {
      static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!="};
      auto matched = false;
      for (const auto symbol : two_char) {
        if (text.substr(index, 2) == symbol) {
          tokens.push_back({Token::Kind::Symbol, std::string{symbol}, start});
          index += 2;
          matched = true;
          break;
        }
      }
      if (matched) {
        continue;
      }
      if (std::string_view{"=<>(),.*;-"}.find(character) == std::string_view::npos) {
        throw QueryError(std::string{"unexpected character '"} + character + "'", start);
      }
      tokens.push_back({Token::Kind::Symbol, std::string(1, character), start});
      ++index;
    }
  }
  tokens.push_back({Token::Kind::End, {}, text.size()});
  return tokens;
}

// ---------------------------------------------------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------------------------------------------------

struct ColumnRef {
  size_t atom;
  std::string column;
  size_t offset;
};

// Parsed WHERE clause before join variables are inferred.
struct Condition {
  enum class Kind { Join, Leaf, And, Or };

  Kind kind{Kind::Leaf};
  size_t offset{0};
  // Join
  ColumnRef left{};
  ColumnRef right{};
  // Leaf
  size_t atom{0};
  Predicate leaf{};
  // And / Or
  std::vector<Condition> children;
};

Condition make_condition(Condition::Kind kind, size_t offset) {
  auto condition = Condition{};
  condition.kind = kind;
  condition.offset = offset;
  return condition;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : _tokens(tokenize(text)) {}

  QueryAst parse() {
    expect_keyword("SELECT");
    expect_keyword("COUNT");
    expect_symbol("(");
    expect_symbol("*");
    expect_symbol(")");
    expect_keyword("FROM");
    parse_tables();

    auto conjuncts = std::vector<Condition>{};
    if (accept_keyword("WHERE")) {
      auto condition = parse_or();
      flatten_and(std::move(condition), conjuncts);
    }
    accept_symbol(";");
    if (peek().kind != Token::Kind::End) {
      throw QueryError("unexpected '" + peek().text + "' after end of query", peek().offset);
    }
    return assemble(std::move(conjuncts));
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    return _tokens[std::min(_position + ahead, _tokens.size() - 1)];
  }

  const Token& advance() {
    const auto& token = peek();
    if (_position < _tokens.size() - 1) {
      ++_position;
    }
    return token;
  }

  bool is_keyword(const Token& token, std::string_view keyword) const {
    return token.kind == Token::Kind::Identifier && upper(token.text) == keyword;
  }

  bool accept_keyword(std::string_view keyword) {
    if (is_keyword(peek(), keyword)) {
      advance();
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view keyword) {
    if (!accept_keyword(keyword)) {
      throw QueryError("expected " + std::string{keyword} + describe_found(), peek().offset);
    }
  }

  bool accept_symbol(std::string_view symbol) {
    if (peek().kind == Token::Kind::Symbol && peek().text == symbol) {
      advance();
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view symbol) {
    if (!accept_symbol(symbol)) {
      throw QueryError("expected '" + std::string{symbol} + "'" + describe_found(), peek().offset);
    }
  }

  std::string describe_found() const {
    return peek().kind == Token::Kind::End ? " but the query ended" : " but found '" + peek().text + "'";
  }

  std::string expect_identifier(const char* what) {
    if (peek().kind != Token::Kind::Identifier || is_reserved(peek().text)) {
      throw QueryError(std::string{"expected "} + what + describe_found(), peek().offset);
    }
    return advance().text;
  }

  static bool is_reserved(const std::string& text) {
    static const auto reserved = std::set<std::string>{"SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "AS",
                                                       "BETWEEN", "LIKE", "IN", "COUNT"};
    return reserved.contains(upper(text));
  }

  void parse_tables() {
    do {
      const auto offset = peek().offset;
      auto atom = Atom{};
      atom.relation = expect_identifier("a relation name");
      if (accept_keyword("AS")) {
        atom.alias = expect_identifier("an alias");
      } else if (peek().kind == Token::Kind::Identifier && !is_reserved(peek().text)) {
        atom.alias = advance().text;
      } else {
        atom.alias = atom.relation;
      }
      for (const auto& existing : _atoms) {
        if (existing.alias == atom.alias) {
          throw QueryError("duplicate alias '" + atom.alias + "'", offset);
        }
      }
      _atoms.push_back(std::move(atom));
    } while (accept_symbol(","));
  }

  Condition parse_or() {
    auto first = parse_and();
    if (!is_keyword(peek(), "OR")) {
      return first;
    }
    auto node = make_condition(Condition::Kind::Or, first.offset);
    node.children.push_back(std::move(first));
    while (accept_keyword("OR")) {
      node.children.push_back(parse_and());
    }
    return node;
  }

  Condition parse_and() {
    auto first = parse_unary();
    if (!is_keyword(peek(), "AND")) {
      return first;
    }
    auto node = make_condition(Condition::Kind::And, first.offset);
    node.children.push_back(std::move(first));
    while (accept_keyword("AND")) {
      node.children.push_back(parse_unary());
    }
    return node;
  }

  Condition parse_unary() {
    if (is_keyword(peek(), "NOT")) {
      throw UnsupportedQueryError("negation not supported", peek().offset);
    }
    if (accept_symbol("(")) {
      auto inner = parse_or();
      expect_symbol(")");
      return inner;
    }
    return parse_comparison();
  }

  bool at_literal() const {
    const auto& token = peek();
    return token.kind == Token::Kind::Number || token.kind == Token::Kind::String ||
           (token.kind == Token::Kind::Symbol && token.text == "-" && peek(1).kind == Token::Kind::Number);
  }

  Value parse_literal() {
    const auto offset = peek().offset;
    if (peek().kind == Token::Kind::String) {
      return advance().text;
    }
    const auto negative = accept_symbol("-");
    if (peek().kind != Token::Kind::Number) {
      throw QueryError("expected a literal" + describe_found(), offset);
    }
    const auto& text = advance().text;
    auto number = 0.0;
    const auto [end, error] = std::from_chars(text.data(), text.data() + text.size(), number);
    if (error != std::errc{} || end != text.data() + text.size()) {
      throw QueryError("malformed number '" + text + "'", offset);
    }
    return negative ? -number : number;
  }

  ColumnRef parse_column() {
    const auto offset = peek().offset;
    auto first = expect_identifier("a column");
    if (accept_symbol(".")) {
      auto column = expect_identifier("a column name");
      for (auto index = size_t{0}; index < _atoms.size(); ++index) {
        if (_atoms[index].alias == first) {
          return {index, std::move(column), offset};
        }
      }
      throw QueryError("unknown relation alias '" + first + "'", offset);
    }
    if (_atoms.size() != 1) {
      throw QueryError("column '" + first + "' must be qualified with a relation alias", offset);
    }
    return {0, std::move(first), offset};
  }

  Condition make_leaf(const ColumnRef& column, Predicate predicate, size_t offset) {
    auto node = make_condition(Condition::Kind::Leaf, offset);
    node.atom = column.atom;
    node.leaf = std::move(predicate);
    return node;
  }

  static Predicate comparison(std::string column, const std::string& op, Value literal) {
    if (op == "=") {
      return Predicate::equality(std::move(column), std::move(literal));
    }
    if (op == "<") {
      return Predicate::range(std::move(column), std::nullopt, true, std::move(literal), false);
    }
    if (op == "<=") {
      return Predicate::range(std::move(column), std::nullopt, true, std::move(literal), true);
    }
    if (op == ">") {
      return Predicate::range(std::move(column), std::move(literal), false, std::nullopt, true);
    }
    return Predicate::range(std::move(column), std::move(literal), true, std::nullopt, true);
  }

  static std::string flip(const std::string& op) {
    if (op == "<") {
      return ">";
    }
    if (op == "<=") {
      return ">=";
    }
    if (op == ">") {
      return "<";
    }
    if (op == ">=") {
      return "<=";
    }
    return op;
  }

  std::string parse_operator() {
    const auto& token = peek();
    if (token.kind == Token::Kind::Symbol && (token.text == "<>" || token.text == "!=")) {
      throw UnsupportedQueryError("negation not supported ('" + token.text + "')", token.offset);
    }
    if (token.kind == Token::Kind::Symbol &&
        (token.text == "=" || token.text == "<" || token.text == "<=" || token.text == ">" || token.text == ">=")) {
      return advance().text;
    }
    throw QueryError("expected a comparison operator" + describe_found(), token.offset);
  }

  Condition parse_comparison() {
    const auto offset = peek().offset;
    if (at_literal()) {
      auto literal = parse_literal();
      const auto op = parse_operator();
      if (at_literal()) {
        throw UnsupportedQueryError("comparison between two literals", offset);
      }
      auto column = parse_column();
      return make_leaf(column, comparison(column.column, flip(op), std::move(literal)), offset);
    }

    auto column = parse_column();
    if (is_keyword(peek(), "NOT")) {
      throw UnsupportedQueryError("negation not supported", peek().offset);
    }
    if (accept_keyword("BETWEEN")) {
      auto lower = parse_literal();
      expect_keyword("AND");
      auto upper_bound = parse_literal();
      return make_leaf(column, Predicate::range(column.column, std::move(lower), true, std::move(upper_bound), true),
                       offset);
    }
    if (accept_keyword("LIKE")) {
      if (peek().kind != Token::Kind::String) {
        throw QueryError("LIKE needs a string pattern" + describe_found(), peek().offset);
      }
      return make_leaf(column, Predicate::like(column.column, advance().text), offset);
    }
    if (accept_keyword("IN")) {
      expect_symbol("(");
      auto values = std::vector<Value>{};
      do {
        values.push_back(parse_literal());
      } while (accept_symbol(","));
      expect_symbol(")");
      return make_leaf(column, Predicate::in(column.column, std::move(values)), offset);
    }

    const auto op = parse_operator();
    if (at_literal()) {
      return make_leaf(column, comparison(column.column, op, parse_literal()), offset);
    }
    auto right = parse_column();
    if (op != "=") {
      throw UnsupportedQueryError("only equality joins are supported", offset);
    }
    auto node = make_condition(Condition::Kind::Join, offset);
    node.left = std::move(column);
    node.right = std::move(right);
    return node;
  }

  static void flatten_and(Condition condition, std::vector<Condition>& out) {
    if (condition.kind == Condition::Kind::And) {
      for (auto& child : condition.children) {
        flatten_and(std::move(child), out);
      }
    } else {
      out.push_back(std::move(condition));
    }
  }

  // Converts a join-free subtree to a predicate and reports the single atom it references.
  static Predicate to_predicate(const Condition& condition, std::optional<size_t>& atom) {
    switch (condition.kind) {
      case Condition::Kind::Join:
        throw UnsupportedQueryError("join conditions must be top-level conjuncts", condition.offset);
      case Condition::Kind::Leaf:
        if (atom && *atom != condition.atom) {
          throw UnsupportedQueryError("OR across relations is not supported", condition.offset);
        }
        atom = condition.atom;
        return condition.leaf;
      case Condition::Kind::And:
      case Condition::Kind::Or: {
        auto children = std::vector<Predicate>{};
        for (const auto& child : condition.children) {
          children.push_back(to_predicate(child, atom));
        }
        return condition.kind == Condition::Kind::And ? Predicate::conjunction(std::move(children))
                                                      : Predicate::disjunction(std::move(children));
      }
    }
    throw QueryError("unreachable condition kind");
  }

  QueryAst assemble(std::vector<Condition> conjuncts) {
    // Union-find over "alias.column" names.
    auto parent = std::map<std::string, std::string>{};
    const std::function<std::string(const std::string&)> find = [&](const std::string& key) -> std::string {
      auto& up = parent.try_emplace(key, key).first->second;
      if (up == key) {
        return key;
      }
      up = find(up);
      return up;
    };
    const auto qualified = [&](const ColumnRef& ref) { return _atoms[ref.atom].alias + "." + ref.column; };
    auto owners = std::map<std::string, std::pair<size_t, std::string>>{};

    auto predicates = std::vector<std::vector<Predicate>>(_atoms.size());
    for (const auto& conjunct : conjuncts) {
      if (conjunct.kind == Condition::Kind::Join) {
        const auto left = qualified(conjunct.left);
        const auto right = qualified(conjunct.right);
        owners[left] = {conjunct.left.atom, conjunct.left.column};
        owners[right] = {conjunct.right.atom, conjunct.right.column};
        const auto left_root = find(left);
        const auto right_root = find(right);
        if (left_root != right_root) {
          // Keep the smaller name as the representative so it can name the variable.
          if (left_root < right_root) {
            parent[right_root] = left_root;
          } else {
            parent[left_root] = right_root;
          }
        }
        continue;
      }
      auto atom = std::optional<size_t>{};
      auto predicate = to_predicate(conjunct, atom);
      predicates[*atom].push_back(std::move(predicate));
    }

    auto query = QueryAst{};
    query.atoms = _atoms;
    for (const auto& [name, owner] : owners) {
      auto& columns = query.atoms[owner.first].variables[find(name)];
      columns.push_back(owner.second);
      std::sort(columns.begin(), columns.end());
    }
    for (auto index = size_t{0}; index < _atoms.size(); ++index) {
      if (!predicates[index].empty()) {
        query.atoms[index].predicate = Predicate::conjunction(std::move(predicates[index]));
      }
    }
    return query;
  }

  std::vector<Token> _tokens;
  size_t _position{0};
  std::vector<Atom> _atoms;
};

// ---------------------------------------------------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------------------------------------------------

std::string print_literal(const Value& value) {
  if (const auto* number = std::get_if<double>(&value)) {
    char buffer[64];
    const auto [end, error] = std::to_chars(buffer, buffer + sizeof(buffer), *number);
    (void)error;
    return std::string{buffer, end};
  }
  if (const auto* text = std::get_if<std::string>(&value)) {
    auto quoted = std::string{"'"};
    for (const auto character : *text) {
      quoted += character;
      if (character == '\'') {
        quoted += '\'';
      }
    }
    return quoted + "'";
  }
  throw ArgumentError("NULL literals cannot be printed");
}

void print_node(const Predicate& predicate, const std::string& alias, bool nested, std::ostream& out) {
  const auto column = alias.empty() ? predicate.column : alias + "." + predicate.column;
  switch (predicate.kind) {
    case Predicate::Kind::Equality:
      out << column << " = " << print_literal(predicate.value);
      return;
    case Predicate::Kind::Range:
      if (predicate.lower && predicate.upper && predicate.lower_inclusive && predicate.upper_inclusive) {
        out << column << " BETWEEN " << print_literal(*predicate.lower) << " AND " << print_literal(*predicate.upper);
      } else if (predicate.lower && predicate.upper) {
        out << (nested ? "(" : "") << column << (predicate.lower_inclusive ? " >= " : " > ")
            << print_literal(*predicate.lower) << " AND " << column << (predicate.upper_inclusive ? " <= " : " < ")
            << print_literal(*predicate.upper) << (nested ? ")" : "");
      } else if (predicate.lower) {
        out << column << (predicate.lower_inclusive ? " >= " : " > ") << print_literal(*predicate.lower);
      } else if (predicate.upper) {
        out << column << (predicate.upper_inclusive ? " <= " : " < ") << print_literal(*predicate.upper);
      } else {
        out << column << " BETWEEN -1e308 AND 1e308";
      }
      return;
    case Predicate::Kind::Like:
      out << column << " LIKE " << print_literal(predicate.pattern);
      return;
    case Predicate::Kind::In:
      out << column << " IN (";
      for (auto index = size_t{0}; index < predicate.values.size(); ++index) {
        out << (index ? ", " : "") << print_literal(predicate.values[index]);
      }
      out << ")";
      return;
    case Predicate::Kind::And:
    case Predicate::Kind::Or: {
      const auto* separator = predicate.kind == Predicate::Kind::And ? " AND " : " OR ";
      out << (nested ? "(" : "");
      for (auto index = size_t{0}; index < predicate.children.size(); ++index) {
        out << (index ? separator : "");
        print_node(predicate.children[index], alias, true, out);
      }
      out << (nested ? ")" : "");
      return;
    }
  }
}

void collect_columns(const Predicate& predicate, std::vector<std::string>& out) {
  if (predicate.is_leaf()) {
    out.push_back(predicate.column);
    return;
  }
  for (const auto& child : predicate.children) {
    collect_columns(child, out);
  }
}

Predicate combine(Predicate::Kind kind, std::vector<Predicate> children) {
  auto flat = std::vector<Predicate>{};
  for (auto& child : children) {
    if (child.kind == kind) {
      for (auto& grandchild : child.children) {
        flat.push_back(std::move(grandchild));
      }
    } else {
      flat.push_back(std::move(child));
    }
  }
  if (flat.empty()) {
    throw ArgumentError("a boolean node needs at least one child");
  }
  if (flat.size() == 1) {
    return std::move(flat.front());
  }
  auto node = Predicate{};
  node.kind = kind;
  node.children = std::move(flat);
  return node;
}

// ---------------------------------------------------------------------------------------------------------------------
// Graph helpers
// ---------------------------------------------------------------------------------------------------------------------

class DisjointSets {
 public:
  explicit DisjointSets(size_t count) : _parent(count) {
    std::iota(_parent.begin(), _parent.end(), size_t{0});
  }

  size_t find(size_t node) {
    while (_parent[node] != node) {
      _parent[node] = _parent[_parent[node]];
      node = _parent[node];
    }
    return node;
  }

  // False if already joined.
  bool unite(size_t lhs, size_t rhs) {
    lhs = find(lhs);
    rhs = find(rhs);
    if (lhs == rhs) {
      return false;
    }
    _parent[std::max(lhs, rhs)] = std::min(lhs, rhs);
    return true;
  }

 private:
  std::vector<size_t> _parent;
};

}  // namespace

// ---------------------------------------------------------------------------------------------------------------------

Predicate Predicate::equality(std::string column, Value value) {
  auto predicate = Predicate{};
  predicate.kind = Kind::Equality;
  predicate.column = std::move(column);
  predicate.value = std::move(value);
  return predicate;
}

Predicate Predicate::range(std::string column, std::optional<Value> lower, bool lower_inclusive,
                           std::optional<Value> upper, bool upper_inclusive) {
  auto predicate = Predicate{};
  predicate.kind = Kind::Range;
  predicate.column = std::move(column);
  predicate.lower = std::move(lower);
  predicate.lower_inclusive = lower_inclusive;
  predicate.upper = std::move(upper);
  predicate.upper_inclusive = upper_inclusive;
  return predicate;
}

Predicate Predicate::like(std::string column, std::string pattern) {
  auto predicate = Predicate{};
  predicate.kind = Kind::Like;
  predicate.column = std::move(column);
  predicate.pattern = std::move(pattern);
  return predicate;
}

Predicate Predicate::in(std::string column, std::vector<Value> values) {
  auto predicate = Predicate{};
  predicate.kind = Kind::In;
  predicate.column = std::move(column);
  predicate.values = std::move(values);
  return predicate;
}

Predicate Predicate::conjunction(std::vector<Predicate> children) {
  return combine(Kind::And, std::move(children));
}

Predicate Predicate::disjunction(std::vector<Predicate> children) {
  return combine(Kind::Or, std::move(children));
}

std::vector<std::string> Predicate::columns() const {
  auto result = std::vector<std::string>{};
  collect_columns(*this, result);
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<size_t> QueryAst::atoms_with(const std::string& variable) const {
  auto result = std::vector<size_t>{};
  for (auto index = size_t{0}; index < atoms.size(); ++index) {
    if (atoms[index].variables.contains(variable)) {
      result.push_back(index);
    }
  }
  return result;
}

std::vector<std::string> QueryAst::variables() const {
  auto result = std::set<std::string>{};
  for (const auto& atom : atoms) {
    for (const auto& [variable, columns] : atom.variables) {
      result.insert(variable);
    }
  }
  return {result.begin(), result.end()};
}

QueryAst parse_query(std::string_view text) {
  return Parser{text}.parse();
}

std::string print_predicate(const Predicate& predicate, const std::string& alias) {
  auto out = std::ostringstream{};
  print_node(predicate, alias, false, out);
  return out.str();
}

std::string print_query(const QueryAst& query) {
  auto out = std::ostringstream{};
  out << "SELECT COUNT(*) FROM ";
  for (auto index = size_t{0}; index < query.atoms.size(); ++index) {
    const auto& atom = query.atoms[index];
    out << (index ? ", " : "") << atom.relation;
    if (atom.alias != atom.relation) {
      out << " AS " << atom.alias;
    }
  }

  auto conjuncts = std::vector<std::string>{};
  for (const auto& variable : query.variables()) {
    auto occurrences = std::vector<std::string>{};
    for (const auto& atom : query.atoms) {
      const auto it = atom.variables.find(variable);
      if (it == atom.variables.end()) {
        continue;
      }
      for (const auto& column : it->second) {
        occurrences.push_back(atom.alias + "." + column);
      }
    }
    std::sort(occurrences.begin(), occurrences.end());
    for (auto index = size_t{1}; index < occurrences.size(); ++index) {
      conjuncts.push_back(occurrences.front() + " = " + occurrences[index]);
    }
  }
  const auto qualify = query.atoms.size() != 1 || !query.variables().empty();
  for (const auto& atom : query.atoms) {
    if (!atom.predicate) {
      continue;
    }
    const auto alias = qualify ? atom.alias : std::string{};
    if (atom.predicate->kind == Predicate::Kind::And) {
      for (const auto& child : atom.predicate->children) {
        auto child_out = std::ostringstream{};
        print_node(child, alias, true, child_out);
        conjuncts.push_back(child_out.str());
      }
    } else {
      auto child_out = std::ostringstream{};
      print_node(*atom.predicate, alias, true, child_out);
      conjuncts.push_back(child_out.str());
    }
  }
  for (auto index = size_t{0}; index < conjuncts.size(); ++index) {
    out << (index ? " AND " : " WHERE ") << conjuncts[index];
  }
  return out.str();
}

// ---------------------------------------------------------------------------------------------------------------------

JoinGraph join_graph(const QueryAst& query) {
  auto graph = JoinGraph{};
  graph.atom_count = query.atoms.size();
  graph.variables = query.variables();
  const auto variable_index = [&](const std::string& name) {
    return static_cast<size_t>(std::lower_bound(graph.variables.begin(), graph.variables.end(), name) -
                               graph.variables.begin());
  };

  auto sets = DisjointSets{graph.atom_count + graph.variables.size()};
  for (auto atom = size_t{0}; atom < query.atoms.size(); ++atom) {
    for (const auto& [variable, columns] : query.atoms[atom].variables) {
      const auto index = variable_index(variable);
      graph.incidences.emplace_back(atom, index);
      if (!sets.unite(atom, graph.atom_count + index)) {
        graph.berge_acyclic = false;
      }
    }
  }
  for (auto atom = size_t{1}; atom < graph.atom_count; ++atom) {
    if (sets.find(atom) != sets.find(0)) {
      graph.connected = false;
    }
  }

  for (auto lhs = size_t{0}; lhs < graph.atom_count; ++lhs) {
    for (auto rhs = lhs + 1; rhs < graph.atom_count; ++rhs) {
      auto shared = size_t{0};
      for (const auto& [variable, columns] : query.atoms[lhs].variables) {
        shared += query.atoms[rhs].variables.contains(variable) ? 1 : 0;
      }
      if (shared >= 2) {
        graph.multi_column_pairs.emplace_back(lhs, rhs);
      }
    }
  }
  return graph;
}

QueryAst merge_multi_column_joins(const QueryAst& query) {
  auto result = query;
  for (;;) {
    auto merged = false;
    for (auto lhs = size_t{0}; lhs < result.atoms.size() && !merged; ++lhs) {
      for (auto rhs = lhs + 1; rhs < result.atoms.size() && !merged; ++rhs) {
        auto exclusive = std::vector<std::string>{};
        for (const auto& [variable, columns] : result.atoms[lhs].variables) {
          const auto holders = result.atoms_with(variable);
          if (holders.size() == 2 && holders[0] == lhs && holders[1] == rhs) {
            exclusive.push_back(variable);
          }
        }
        if (exclusive.size() < 2) {
          continue;
        }
        for (const auto atom : {lhs, rhs}) {
          auto& variables = result.atoms[atom].variables;
          auto columns = std::vector<std::string>{};
          for (const auto& variable : exclusive) {
            const auto& source = variables.at(variable);
            columns.insert(columns.end(), source.begin(), source.end());
            variables.erase(variable);
          }
          std::sort(columns.begin(), columns.end());
          columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
          variables[exclusive.front()] = std::move(columns);
        }
        merged = true;
      }
    }
    if (!merged) {
      return result;
    }
  }
}

QueryAst drop_unconstrained_variables(const QueryAst& query) {
  auto result = query;
  for (auto& atom : result.atoms) {
    std::erase_if(atom.variables, [&](const auto& entry) {
      return entry.second.size() == 1 && query.atoms_with(entry.first).size() == 1;
    });
  }
  return result;
}

// ---------------------------------------------------------------------------------------------------------------------

size_t BoundPlan::alpha_count() const {
  return static_cast<size_t>(
      std::count_if(steps.begin(), steps.end(), [](const PlanStep& step) { return std::holds_alternative<AlphaStep>(step); }));
}

size_t BoundPlan::beta_count() const {
  return steps.size() - alpha_count();
}

BoundPlan decompose(const QueryAst& query) {
  if (query.atoms.empty()) {
    throw ArgumentError("cannot decompose a query without atoms");
  }
  const auto graph = join_graph(query);
  if (!graph.connected) {
    throw ArgumentError("query is disconnected; bound it as a cross product");
  }
  if (!graph.berge_acyclic) {
    throw ArgumentError("query is cyclic; decompose each of its spanning_trees instead");
  }

  auto root = size_t{0};
  for (auto atom = size_t{1}; atom < query.atoms.size(); ++atom) {
    const auto arity = query.atoms[atom].variables.size();
    const auto best = query.atoms[root].variables.size();
    if (arity > best || (arity == best && query.atoms[atom].alias < query.atoms[root].alias)) {
      root = atom;
    }
  }
  const auto& root_variables = query.atoms[root].variables;
  if (root_variables.empty()) {
    throw ArgumentError("query has no join variables");
  }
  auto anchor = root_variables.begin()->first;
  for (const auto& [variable, columns] : root_variables) {
    if (query.atoms_with(variable).size() == 1) {
      anchor = variable;
      break;
    }
  }

  auto plan = BoundPlan{};
  std::function<UnaryRef(const std::string&, size_t)> unary_for_variable;
  std::function<UnaryRef(size_t, const std::string&, bool)> unary_for_atom;

  // The atom's output projected onto `variable`, after joining everything below it.
  unary_for_atom = [&](size_t atom, const std::string& anchor_variable, bool is_root) -> UnaryRef {
    auto step = BetaStep{atom, anchor_variable, {}};
    for (const auto& [variable, columns] : query.atoms[atom].variables) {
      if (variable == anchor_variable && !is_root) {
        continue;
      }
      const auto holders = query.atoms_with(variable);
      if (holders.size() < 2) {
        continue;
      }
      step.children.emplace_back(variable, unary_for_variable(variable, atom));
    }
    if (!is_root && step.children.empty()) {
      return UnaryRef::base(atom, anchor_variable);
    }
    plan.steps.emplace_back(std::move(step));
    return UnaryRef::output_of(plan.steps.size() - 1);
  };

  // Intersection of every atom on `variable` other than `from`.
  unary_for_variable = [&](const std::string& variable, size_t from) -> UnaryRef {
    auto inputs = std::vector<UnaryRef>{};
    for (const auto atom : query.atoms_with(variable)) {
      if (atom != from) {
        inputs.push_back(unary_for_atom(atom, variable, false));
      }
    }
    if (inputs.size() == 1) {
      return inputs.front();
    }
    plan.steps.emplace_back(AlphaStep{variable, std::move(inputs)});
    return UnaryRef::output_of(plan.steps.size() - 1);
  };

  const auto output = unary_for_atom(root, anchor, true);
  plan.root = output.step;
  return plan;
}

std::string describe_step(const QueryAst& query, const PlanStep& step, size_t index) {
  const auto describe = [&](const UnaryRef& ref) {
    if (ref.kind == UnaryRef::Kind::Step) {
      return "U" + std::to_string(ref.step);
    }
    return query.atoms[ref.atom].alias + "." + ref.variable;
  };
  auto out = std::ostringstream{};
  if (const auto* alpha = std::get_if<AlphaStep>(&step)) {
    out << "alpha U" << index << "(" << alpha->variable << ") =";
    for (auto input = size_t{0}; input < alpha->inputs.size(); ++input) {
      out << (input ? " * " : " ") << describe(alpha->inputs[input]);
    }
    return out.str();
  }
  const auto& beta = std::get<BetaStep>(step);
  const auto& atom = query.atoms[beta.atom];
  out << "beta U" << index << "(" << beta.anchor << ") = " << atom.alias << "(";
  auto first = true;
  for (const auto& [variable, columns] : atom.variables) {
    out << (first ? "" : ",") << variable;
    first = false;
  }
  out << ")";
  for (const auto& [variable, child] : beta.children) {
    out << " * " << describe(child) << "[" << variable << "]";
  }
  return out.str();
}

// ---------------------------------------------------------------------------------------------------------------------

std::vector<QueryAst> spanning_trees(const QueryAst& query, size_t max_trees) {
  const auto graph = join_graph(query);
  if (!graph.connected) {
    throw UnsupportedQueryError("query is disconnected (cross products are not supported)");
  }
  if (graph.berge_acyclic) {
    return {query};
  }
  if (max_trees == 0) {
    throw ArgumentError("max_trees must be positive");
  }

  const auto edge_count = graph.incidences.size();
  const auto node_count = graph.atom_count + graph.variables.size();
  const auto removals = edge_count - (node_count - 1);

  const auto tree_for = [&](const std::vector<bool>& dropped) -> std::optional<QueryAst> {
    auto sets = DisjointSets{node_count};
    for (auto edge = size_t{0}; edge < edge_count; ++edge) {
      if (!dropped[edge] && !sets.unite(graph.incidences[edge].first, graph.atom_count + graph.incidences[edge].second)) {
        return std::nullopt;
      }
    }
    auto tree = query;
    for (auto edge = size_t{0}; edge < edge_count; ++edge) {
      if (!dropped[edge]) {
        continue;
      }
      auto& atom = tree.atoms[graph.incidences[edge].first];
      const auto& variable = graph.variables[graph.incidences[edge].second];
      auto columns = std::move(atom.variables.at(variable));
      atom.variables.erase(variable);
      atom.variables[variable + "#" + atom.alias] = std::move(columns);
    }
    return tree;
  };

  // Two removal sets give the same tree when every shared variable keeps the same atoms.
  const auto canonical = [](const QueryAst& tree) {
    auto key = std::string{};
    for (const auto& variable : tree.variables()) {
      const auto holders = tree.atoms_with(variable);
      if (holders.size() < 2) {
        continue;
      }
      key += variable + ":";
      for (const auto holder : holders) {
        key += std::to_string(holder) + ",";
      }
      key += ";";
    }
    return key;
  };

  auto trees = std::vector<QueryAst>{};
  auto seen = std::set<std::string>{};
  const auto consider = [&](const std::vector<bool>& dropped) {
    if (auto tree = tree_for(dropped)) {
      if (seen.insert(canonical(*tree)).second) {
        trees.push_back(std::move(*tree));
      }
    }
  };

  // Exhaustive enumeration while the number of removal sets is small.
  auto combinations = 1.0;
  for (auto index = size_t{0}; index < removals; ++index) {
    combinations *= static_cast<double>(edge_count - index) / static_cast<double>(index + 1);
  }
  constexpr auto kExhaustiveLimit = 200000.0;
  if (combinations <= kExhaustiveLimit) {
    auto selector = std::vector<bool>(edge_count, false);
    std::fill(selector.end() - static_cast<std::ptrdiff_t>(removals), selector.end(), true);
    do {
      consider(selector);
    } while (std::next_permutation(selector.begin(), selector.end()));
    if (trees.size() > max_trees) {
      auto rng = std::mt19937_64{0x5eedULL + trees.size()};
      auto order = std::vector<size_t>(trees.size());
      std::iota(order.begin(), order.end(), size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(max_trees);
      std::sort(order.begin(), order.end());
      auto sample = std::vector<QueryAst>{};
      for (const auto index : order) {
        sample.push_back(std::move(trees[index]));
      }
      trees = std::move(sample);
    }
    return trees;
  }

  auto rng = std::mt19937_64{0x5eedULL + edge_count};
  auto order = std::vector<size_t>(edge_count);
  std::iota(order.begin(), order.end(), size_t{0});
  for (auto attempt = 0; attempt < 100000 && trees.size() < max_trees; ++attempt) {
    std::shuffle(order.begin(), order.end(), rng);
    // Kruskal over a random order yields a random spanning tree; the unused edges are the removals.
    auto sets = DisjointSets{node_count};
    auto dropped = std::vector<bool>(edge_count, true);
    for (const auto edge : order) {
      if (sets.unite(graph.incidences[edge].first, graph.atom_count + graph.incidences[edge].second)) {
        dropped[edge] = false;
      }
    }
    consider(dropped);
  }
  return trees;
}

}  // namespace seqbound
