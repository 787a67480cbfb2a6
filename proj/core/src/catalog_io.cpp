#include "seqbound/catalog_io.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

class Writer {
 public:
  void u8(uint8_t value) {
    _bytes.push_back(static_cast<char>(value));
  }

  void u32(uint32_t value) {
    for (auto shift = 0; shift < 32; shift += 8) {
      u8(static_cast<uint8_t>(value >> shift));
    }
  }

  void u64(uint64_t value) {
    for (auto shift = 0; shift < 64; shift += 8) {
      u8(static_cast<uint8_t>(value >> shift));
    }
  }

  void f64(double value) {
    u64(std::bit_cast<uint64_t>(value));
  }

  void str(std::string_view text) {
    u64(text.size());
    _bytes.append(text);
  }

  void strings(const std::vector<std::string>& values) {
    u64(values.size());
    for (const auto& value : values) {
      str(value);
    }
  }

  void optional_u64(const std::optional<size_t>& value) {
    u8(value ? 1 : 0);
    u64(value.value_or(0));
  }

  std::string take() {
    return std::move(_bytes);
  }

 private:
  std::string _bytes;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : _bytes(bytes) {}

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(_bytes[_offset++]);
  }

  uint32_t u32() {
    auto value = uint32_t{0};
    for (auto shift = 0; shift < 32; shift += 8) {
      value |= static_cast<uint32_t>(u8()) << shift;
    }
    return value;
  }

  uint64_t u64() {
    auto value = uint64_t{0};
    for (auto shift = 0; shift < 64; shift += 8) {
      value |= static_cast<uint64_t>(u8()) << shift;
    }
    return value;
  }

  double f64() {
    return std::bit_cast<double>(u64());
  }

  // Element counts are bounded by the remaining bytes, so corrupt lengths fail fast instead of allocating.
  size_t count(size_t min_element_bytes = 1) {
    const auto value = u64();
    if (value > (_bytes.size() - _offset) / std::max<size_t>(1, min_element_bytes)) {
      throw FormatError("catalog is truncated or corrupt (bad length at byte " + std::to_string(_offset) + ")");
    }
    return static_cast<size_t>(value);
  }

  std::string str() {
    const auto size = count();
    auto text = std::string{_bytes.substr(_offset, size)};
    _offset += size;
    return text;
  }

  std::vector<std::string> strings() {
    auto values = std::vector<std::string>(count(8));
    for (auto& value : values) {
      value = str();
    }
    return values;
  }

  std::optional<size_t> optional_u64() {
    const auto present = u8();
    const auto value = u64();
    if (present > 1) {
      throw FormatError("catalog is corrupt (bad optional flag)");
    }
    return present ? std::optional<size_t>{value} : std::nullopt;
  }

  bool done() const {
    return _offset == _bytes.size();
  }

 private:
  void need(size_t size) const {
    if (_bytes.size() - _offset < size) {
      throw FormatError("catalog is truncated");
    }
  }

  std::string_view _bytes;
  size_t _offset{0};
};

// ---------------------------------------------------------------------------------------------------------------------

void write_cds(Writer& out, const PiecewiseLinearFn& cds) {
  out.u64(cds.knots().size());
  for (const auto& knot : cds.knots()) {
    out.f64(knot.x);
    out.f64(knot.y);
  }
}

PiecewiseLinearFn read_cds(Reader& in) {
  auto knots = std::vector<PiecewiseLinearFn::Knot>(in.count(16));
  for (auto& knot : knots) {
    knot.x = in.f64();
    knot.y = in.f64();
  }
  try {
    return PiecewiseLinearFn{std::move(knots)};
  } catch (const Error& error) {
    throw FormatError(std::string{"catalog holds an invalid CDS: "} + error.what());
  }
}

void write_bloom(Writer& out, const BloomFilter& bloom) {
  out.u64(bloom.bit_count());
  out.u32(bloom.hash_count());
  out.u64(bloom.words().size());
  for (const auto word : bloom.words()) {
    out.u64(word);
  }
}

BloomFilter read_bloom(Reader& in) {
  const auto bits = in.u64();
  const auto hashes = in.u32();
  auto words = std::vector<uint64_t>(in.count(8));
  for (auto& word : words) {
    word = in.u64();
  }
  return BloomFilter::from_parts(bits, hashes, std::move(words));
}

void write_ids(Writer& out, const std::vector<uint32_t>& ids) {
  out.u64(ids.size());
  for (const auto id : ids) {
    out.u32(id);
  }
}

std::vector<uint32_t> read_ids(Reader& in) {
  auto ids = std::vector<uint32_t>(in.count(4));
  for (auto& id : ids) {
    id = in.u32();
  }
  return ids;
}

void write_groups(Writer& out, const std::vector<CdsGroup>& groups) {
  out.u64(groups.size());
  for (const auto& group : groups) {
    write_ids(out, group.member_ids);
    write_cds(out, group.representative);
    write_bloom(out, group.bloom);
  }
}

std::vector<CdsGroup> read_groups(Reader& in) {
  auto groups = std::vector<CdsGroup>(in.count(8));
  for (auto& group : groups) {
    group.member_ids = read_ids(in);
    group.representative = read_cds(in);
    group.bloom = read_bloom(in);
  }
  return groups;
}

void write_representatives(Writer& out, const std::vector<PiecewiseLinearFn>& functions) {
  out.u64(functions.size());
  for (const auto& function : functions) {
    write_cds(out, function);
  }
}

std::vector<PiecewiseLinearFn> read_representatives(Reader& in) {
  auto functions = std::vector<PiecewiseLinearFn>(in.count(8));
  for (auto& function : functions) {
    function = read_cds(in);
  }
  return functions;
}

void write_parameters(Writer& out, const BuildParameters& parameters) {
  out.f64(parameters.accuracy);
  out.optional_u64(parameters.max_segments);
  out.u32(parameters.histogram_depth);
  out.u32(parameters.mcv_size);
  out.optional_u64(parameters.clusters.fixed_count);
  out.f64(parameters.bloom_bits_per_value);
}

BuildParameters read_parameters(Reader& in) {
  auto parameters = BuildParameters{};
  parameters.accuracy = in.f64();
  parameters.max_segments = in.optional_u64();
  parameters.histogram_depth = in.u32();
  parameters.mcv_size = in.u32();
  parameters.clusters.fixed_count = in.optional_u64();
  parameters.bloom_bits_per_value = in.f64();
  return parameters;
}

void write_conditioned(Writer& out, const ConditionedStats& stats) {
  out.u8(static_cast<uint8_t>((stats.equality ? 1 : 0) | (stats.range ? 2 : 0) | (stats.like ? 4 : 0)));
  if (stats.equality) {
    write_groups(out, stats.equality->groups);
    write_cds(out, stats.equality->default_cds);
    write_bloom(out, stats.equality->default_bloom);
    out.u32(stats.equality->mcv_count);
  }
  if (stats.range) {
    out.u32(stats.range->depth);
    out.u64(stats.range->boundaries.size());
    for (const auto boundary : stats.range->boundaries) {
      out.f64(boundary);
    }
    out.u64(stats.range->bucket_groups.size());
    for (const auto& level : stats.range->bucket_groups) {
      write_ids(out, level);
    }
    write_representatives(out, stats.range->group_representatives);
  }
  if (stats.like) {
    out.u64(stats.like->gram_groups.size());
    for (const auto& [gram, group] : stats.like->gram_groups) {
      out.str(gram);
      out.u32(group);
    }
    write_representatives(out, stats.like->group_representatives);
    write_cds(out, stats.like->default_cds);
  }
}

ConditionedStats read_conditioned(Reader& in) {
  const auto flags = in.u8();
  if (flags > 7) {
    throw FormatError("catalog is corrupt (bad statistics flags)");
  }
  auto stats = ConditionedStats{};
  if (flags & 1) {
    auto equality = EqualityStats{};
    equality.groups = read_groups(in);
    equality.default_cds = read_cds(in);
    equality.default_bloom = read_bloom(in);
    equality.mcv_count = in.u32();
    stats.equality = std::move(equality);
  }
  if (flags & 2) {
    auto range = RangeStats{};
    range.depth = in.u32();
    range.boundaries.resize(in.count(8));
    for (auto& boundary : range.boundaries) {
      boundary = in.f64();
    }
    range.bucket_groups.resize(in.count(8));
    for (auto& level : range.bucket_groups) {
      level = read_ids(in);
    }
    range.group_representatives = read_representatives(in);
    for (const auto& level : range.bucket_groups) {
      for (const auto group : level) {
        if (group != kEmptyGroup && group >= range.group_representatives.size()) {
          throw FormatError("catalog is corrupt (histogram bucket references a missing group)");
        }
      }
    }
    stats.range = std::move(range);
  }
  if (flags & 4) {
    auto like = LikeStats{};
    const auto grams = in.count(12);
    for (auto index = size_t{0}; index < grams; ++index) {
      auto gram = in.str();
      like.gram_groups[std::move(gram)] = in.u32();
    }
    like.group_representatives = read_representatives(in);
    like.default_cds = read_cds(in);
    for (const auto& [gram, group] : like.gram_groups) {
      if (group >= like.group_representatives.size()) {
        throw FormatError("catalog is corrupt (3-gram references a missing group)");
      }
    }
    stats.like = std::move(like);
  }
  return stats;
}

void write_relation(Writer& out, const RelationStats& stats) {
  out.u64(stats.row_count);
  out.strings(stats.join_columns);
  out.strings(stats.filter_columns);
  out.u64(stats.columns.size());
  for (const auto& [name, summary] : stats.columns) {
    out.str(name);
    out.u8(static_cast<uint8_t>(summary.kind));
    out.u64(summary.null_count);
    out.u64(summary.distinct_count);
    write_cds(out, summary.cds);
  }
  out.u64(stats.conditioned.size());
  for (const auto& [key, conditioned] : stats.conditioned) {
    out.str(key.first);
    out.str(key.second);
    write_conditioned(out, conditioned);
  }
  out.u64(stats.propagated.size());
  for (const auto& [column, source] : stats.propagated) {
    out.str(column);
    out.str(source.first);
    out.str(source.second);
  }
}

RelationStats read_relation(Reader& in) {
  auto stats = RelationStats{};
  stats.row_count = in.u64();
  stats.join_columns = in.strings();
  stats.filter_columns = in.strings();
  const auto columns = in.count(8);
  for (auto index = size_t{0}; index < columns; ++index) {
    auto name = in.str();
    auto summary = ColumnSummary{};
    const auto kind = in.u8();
    if (kind > 1) {
      throw FormatError("catalog is corrupt (bad column kind)");
    }
    summary.kind = static_cast<ColumnKind>(kind);
    summary.null_count = in.u64();
    summary.distinct_count = in.u64();
    summary.cds = read_cds(in);
    stats.columns.emplace(std::move(name), std::move(summary));
  }
  const auto conditioned = in.count(8);
  for (auto index = size_t{0}; index < conditioned; ++index) {
    auto join = in.str();
    auto filter = in.str();
    stats.conditioned.emplace(std::make_pair(std::move(join), std::move(filter)), read_conditioned(in));
  }
  const auto propagated = in.count(8);
  for (auto index = size_t{0}; index < propagated; ++index) {
    auto column = in.str();
    auto dim = in.str();
    auto source = in.str();
    stats.propagated.emplace(std::move(column), std::make_pair(std::move(dim), std::move(source)));
  }
  return stats;
}

uint32_t checksum(std::string_view bytes) {
  auto crc = crc32(0L, Z_NULL, 0);
  auto offset = size_t{0};
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<uint32_t>(crc);
}

// ---------------------------------------------------------------------------------------------------------------------

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  auto records = std::vector<std::vector<std::string>>{};
  auto record = std::vector<std::string>{};
  auto field = std::string{};
  auto quoted = false;
  auto field_started = false;
  const auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  for (auto index = size_t{0}; index < text.size(); ++index) {
    const auto character = text[index];
    if (quoted) {
      if (character == '"') {
        if (index + 1 < text.size() && text[index + 1] == '"') {
          field.push_back('"');
          ++index;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(character);
      }
      continue;
    }
    if (character == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (character == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (character == '\n' || character == '\r') {
      if (character == '\r' && index + 1 < text.size() && text[index + 1] == '\n') {
        ++index;
      }
      end_record();
    } else {
      field.push_back(character);
      field_started = true;
    }
  }
  if (quoted) {
    throw ConfigError("CSV ends inside a quoted field");
  }
  if (field_started || !record.empty()) {
    end_record();
  }
  return records;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  return text;
}

std::string read_file(const std::filesystem::path& path, const std::string& what) {
  auto stream = std::ifstream{path, std::ios::binary};
  if (!stream) {
    throw IoError(what + " not found: " + path.string());
  }
  auto buffer = std::ostringstream{};
  buffer << stream.rdbuf();
  if (stream.bad()) {
    throw IoError("cannot read " + path.string());
  }
  return buffer.str();
}

template <typename T>
T json_get(const nlohmann::json& object, const char* key, const std::string& context) {
  if (!object.contains(key)) {
    throw ConfigError(context + ": missing '" + key + "'");
  }
  try {
    return object.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(context + ": '" + key + "' has the wrong type");
  }
}

std::vector<std::string> json_strings(const nlohmann::json& object, const char* key, const std::string& context) {
  if (!object.contains(key)) {
    return {};
  }
  return json_get<std::vector<std::string>>(object, key, context);
}

}  // namespace

// ---------------------------------------------------------------------------------------------------------------------

std::string serialize_catalog(const StatisticsCatalog& catalog) {
  auto payload = Writer{};
  write_parameters(payload, catalog.parameters);
  payload.u64(catalog.pk_fk.size());
  for (const auto& edge : catalog.pk_fk) {
    payload.str(edge.fact);
    payload.str(edge.fk_column);
    payload.str(edge.dim);
    payload.str(edge.pk_column);
  }
  payload.u64(catalog.relations.size());
  for (const auto& [name, stats] : catalog.relations) {
    payload.str(name);
    write_relation(payload, stats);
  }
  const auto body = payload.take();

  auto out = Writer{};
  auto header = std::string{kCatalogMagic};
  auto bytes = header;
  out.u32(kCatalogFormatVersion);
  out.u64(body.size());
  bytes += out.take();
  bytes += body;
  auto trailer = Writer{};
  trailer.u32(checksum(body));
  bytes += trailer.take();
  return bytes;
}

StatisticsCatalog deserialize_catalog(std::string_view bytes) {
  if (bytes.size() < kCatalogMagic.size() || bytes.substr(0, kCatalogMagic.size()) != kCatalogMagic) {
    throw FormatError("not a catalog (bad magic header)");
  }
  auto header = Reader{bytes.substr(kCatalogMagic.size())};
  const auto version = header.u32();
  if (version != kCatalogFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(version) + " (this build reads version " +
                      std::to_string(kCatalogFormatVersion) + ")");
  }
  const auto length = header.u64();
  const auto body_offset = kCatalogMagic.size() + 12;
  if (bytes.size() < body_offset || bytes.size() - body_offset < 4 || length != bytes.size() - body_offset - 4) {
    throw FormatError("catalog is truncated or has trailing bytes");
  }
  const auto body = bytes.substr(body_offset, length);
  auto trailer = Reader{bytes.substr(body_offset + length)};
  if (trailer.u32() != checksum(body)) {
    throw FormatError("checksum mismatch: catalog is corrupt");
  }

  auto in = Reader{body};
  auto catalog = StatisticsCatalog{};
  catalog.parameters = read_parameters(in);
  const auto edges = in.count(32);
  for (auto index = size_t{0}; index < edges; ++index) {
    auto edge = PkFkEdge{};
    edge.fact = in.str();
    edge.fk_column = in.str();
    edge.dim = in.str();
    edge.pk_column = in.str();
    catalog.pk_fk.push_back(std::move(edge));
  }
  const auto relations = in.count(8);
  for (auto index = size_t{0}; index < relations; ++index) {
    auto name = in.str();
    catalog.relations.emplace(std::move(name), read_relation(in));
  }
  if (!in.done()) {
    throw FormatError("catalog payload has trailing bytes");
  }
  return catalog;
}

void save_catalog(const StatisticsCatalog& catalog, const std::filesystem::path& path) {
  const auto bytes = serialize_catalog(catalog);
  auto stream = std::ofstream{path, std::ios::binary | std::ios::trunc};
  if (!stream) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  stream.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  stream.close();
  if (!stream) {
    throw IoError("failed writing " + path.string());
  }
}

StatisticsCatalog load_catalog(const std::filesystem::path& path) {
  if (path.empty()) {
    throw IoError("no catalog path given");
  }
  return deserialize_catalog(read_file(path, "catalog file"));
}

// ---------------------------------------------------------------------------------------------------------------------

Relation parse_csv(std::string_view text, const std::string& relation_name, std::span<const ColumnDeclaration> columns,
                   CsvLoadStats* stats) {
  const auto records = split_csv(text);
  if (records.empty()) {
    throw ConfigError("relation '" + relation_name + "': CSV has no header row");
  }
  const auto& header = records.front();
  auto positions = std::vector<size_t>{};
  for (const auto& declared : columns) {
    auto found = header.size();
    for (auto index = size_t{0}; index < header.size(); ++index) {
      if (trim(header[index]) == declared.name) {
        found = index;
        break;
      }
    }
    if (found == header.size()) {
      throw ConfigError("relation '" + relation_name + "': missing column '" + declared.name + "' in CSV header");
    }
    positions.push_back(found);
  }

  auto built = std::vector<Column>{};
  for (const auto& declared : columns) {
    built.emplace_back(declared.name, declared.kind);
  }
  auto warnings = size_t{0};
  for (auto row = size_t{1}; row < records.size(); ++row) {
    const auto& record = records[row];
    if (record.size() != header.size()) {
      throw ConfigError("relation '" + relation_name + "': row " + std::to_string(row) + " has " +
                        std::to_string(record.size()) + " fields, header has " + std::to_string(header.size()));
    }
    for (auto index = size_t{0}; index < columns.size(); ++index) {
      const auto& raw = record[positions[index]];
      if (columns[index].kind == ColumnKind::Text) {
        if (raw.empty()) {
          built[index].append_null();
        } else {
          built[index].append(raw);
        }
        continue;
      }
      const auto field = trim(raw);
      if (field.empty()) {
        built[index].append_null();
        continue;
      }
      auto number = 0.0;
      const auto [end, error] = std::from_chars(field.data(), field.data() + field.size(), number);
      if (error != std::errc{} || end != field.data() + field.size() || !std::isfinite(number)) {
        ++warnings;
        built[index].append_null();
      } else {
        built[index].append(number);
      }
    }
  }

  auto relation = Relation{relation_name};
  for (auto& column : built) {
    relation.add_column(std::move(column));
  }
  if (stats) {
    stats->rows += records.size() - 1;
    stats->parse_warnings += warnings;
  }
  return relation;
}

Relation load_csv(const std::filesystem::path& path, const std::string& relation_name,
                  std::span<const ColumnDeclaration> columns, CsvLoadStats* stats) {
  return parse_csv(read_file(path, "relation file"), relation_name, columns, stats);
}

SchemaConfig parse_schema(std::string_view json_text, const std::filesystem::path& base_directory) {
  auto document = nlohmann::json{};
  try {
    document = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& error) {
    throw ConfigError(std::string{"schema is not valid JSON: "} + error.what());
  }
  if (!document.is_object()) {
    throw ConfigError("schema must be a JSON object");
  }

  auto config = SchemaConfig{};
  if (!document.contains("relations") || !document["relations"].is_array()) {
    throw ConfigError("schema: 'relations' must be an array");
  }
  for (const auto& entry : document["relations"]) {
    auto source = RelationSource{};
    source.name = json_get<std::string>(entry, "name", "relation");
    const auto context = "relation '" + source.name + "'";
    source.csv = base_directory / json_get<std::string>(entry, "csv", context);
    if (!entry.contains("columns") || !entry["columns"].is_array()) {
      throw ConfigError(context + ": 'columns' must be an array");
    }
    for (const auto& column : entry["columns"]) {
      auto declaration = ColumnDeclaration{};
      declaration.name = json_get<std::string>(column, "name", context + " column");
      declaration.kind = column.contains("kind")
                             ? column_kind_from_string(json_get<std::string>(column, "kind", context + " column"))
                             : ColumnKind::Numeric;
      source.columns.push_back(std::move(declaration));
    }
    auto role = ColumnRole{};
    role.join_columns = json_strings(entry, "join_columns", context);
    role.filter_columns = json_strings(entry, "filter_columns", context);
    if (!config.schema.roles.emplace(source.name, std::move(role)).second) {
      throw ConfigError("duplicate relation '" + source.name + "' in schema");
    }
    config.relations.push_back(std::move(source));
  }

  if (document.contains("pk_fk")) {
    for (const auto& entry : document["pk_fk"]) {
      auto edge = PkFkEdge{};
      edge.fact = json_get<std::string>(entry, "fact", "pk_fk");
      edge.fk_column = json_get<std::string>(entry, "fk", "pk_fk");
      edge.dim = json_get<std::string>(entry, "dim", "pk_fk");
      edge.pk_column = json_get<std::string>(entry, "pk", "pk_fk");
      config.schema.pk_fk.push_back(std::move(edge));
    }
  }

  if (document.contains("parameters")) {
    const auto& entry = document["parameters"];
    auto& parameters = config.schema.parameters;
    if (entry.contains("c")) {
      parameters.accuracy = json_get<double>(entry, "c", "parameters");
    }
    if (entry.contains("max_segments")) {
      parameters.max_segments = json_get<size_t>(entry, "max_segments", "parameters");
    }
    if (entry.contains("hist_depth")) {
      parameters.histogram_depth = json_get<uint32_t>(entry, "hist_depth", "parameters");
    }
    if (entry.contains("mcv_size")) {
      parameters.mcv_size = json_get<uint32_t>(entry, "mcv_size", "parameters");
    }
    if (entry.contains("clusters")) {
      const auto& clusters = entry["clusters"];
      parameters.clusters = ClusterPolicy::parse(clusters.is_string() ? clusters.get<std::string>() : clusters.dump());
    }
    if (entry.contains("bloom_bits")) {
      parameters.bloom_bits_per_value = json_get<double>(entry, "bloom_bits", "parameters");
    }
  }
  config.schema.parameters.validate();
  return config;
}

SchemaConfig load_schema(const std::filesystem::path& path) {
  return parse_schema(read_file(path, "schema file"), path.parent_path());
}

std::vector<Relation> load_database(const SchemaConfig& config, CsvLoadStats* stats) {
  auto database = std::vector<Relation>{};
  database.reserve(config.relations.size());
  for (const auto& source : config.relations) {
    database.push_back(load_csv(source.csv, source.name, source.columns, stats));
  }
  return database;
}

}  // namespace seqbound
