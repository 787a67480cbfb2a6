#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqbound/relation.hpp"
#include "seqbound/stats_builder.hpp"

namespace seqbound {

inline constexpr std::string_view kCatalogMagic = "SEQBOUND-STATS";
inline constexpr uint32_t kCatalogFormatVersion = 1;

// Layout: magic, u32 version, u64 payload length, payload, u32 CRC-32 of the payload. All integers little endian,
// doubles as their IEEE-754 bit pattern, maps in key order, so equal catalogs serialize to equal bytes.
std::string serialize_catalog(const StatisticsCatalog& catalog);

// Throws FormatError with "not a catalog", "unsupported version" or "checksum mismatch" diagnostics.
StatisticsCatalog deserialize_catalog(std::string_view bytes);

// Throws IoError if the file cannot be written.
void save_catalog(const StatisticsCatalog& catalog, const std::filesystem::path& path);

// Throws IoError if the file cannot be read and FormatError on malformed content.
StatisticsCatalog load_catalog(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------------------------------
// CSV ingestion and schema configuration
// ---------------------------------------------------------------------------------------------------------------------

struct ColumnDeclaration {
  std::string name;
  ColumnKind kind{ColumnKind::Numeric};
};

struct CsvLoadStats {
  size_t rows{0};
  // Non-empty numeric fields that failed to parse and were stored as null.
  size_t parse_warnings{0};
};

// RFC 4180 input with a header row. Declared columns are looked up by header name; undeclared columns are
// ignored. Empty fields and unparsable numbers become nulls. Throws IoError ("relation file not found") and
// ConfigError (missing column, ragged rows).
Relation load_csv(const std::filesystem::path& path, const std::string& relation_name,
                  std::span<const ColumnDeclaration> columns, CsvLoadStats* stats = nullptr);

// Same, from an in-memory document.
Relation parse_csv(std::string_view text, const std::string& relation_name, std::span<const ColumnDeclaration> columns,
                   CsvLoadStats* stats = nullptr);

struct RelationSource {
  std::string name;
  std::filesystem::path csv;
  std::vector<ColumnDeclaration> columns;
};

struct SchemaConfig {
  std::vector<RelationSource> relations;
  DatabaseSchema schema;
};

// JSON document:
//   {"relations": [{"name", "csv", "columns": [{"name", "kind"}], "join_columns", "filter_columns"}],
//    "pk_fk": [{"fact", "fk", "dim", "pk"}],
//    "parameters": {"c", "max_segments", "hist_depth", "mcv_size", "clusters", "bloom_bits"}}
// CSV paths are resolved against the directory of the config file. Throws IoError and ConfigError.
SchemaConfig load_schema(const std::filesystem::path& path);
SchemaConfig parse_schema(std::string_view json_text, const std::filesystem::path& base_directory);

// Loads every declared relation.
std::vector<Relation> load_database(const SchemaConfig& config, CsvLoadStats* stats = nullptr);

}  // namespace seqbound
