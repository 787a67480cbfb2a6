#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqbound {

// Standard Bloom filter with double hashing. No false negatives; the false-positive rate follows from bits per value
// and the hash count, which is chosen as round(bits_per_value * ln 2).
class BloomFilter {
 public:
  // Empty filter: answers negative for every key.
  BloomFilter() = default;

  // Throws ConfigError if bits_per_value < 4.
  BloomFilter(size_t expected_values, double bits_per_value);

  static BloomFilter build(std::span<const std::string> keys, double bits_per_value);

  // Reconstructs a serialized filter. Throws FormatError on inconsistent sizes.
  static BloomFilter from_parts(uint64_t bit_count, uint32_t hash_count, std::vector<uint64_t> words);

  void insert(std::string_view key);

  bool possibly_contains(std::string_view key) const;

  uint64_t bit_count() const {
    return _bit_count;
  }

  uint32_t hash_count() const {
    return _hash_count;
  }

  const std::vector<uint64_t>& words() const {
    return _words;
  }

  size_t byte_size() const {
    return _words.size() * sizeof(uint64_t);
  }

  bool operator==(const BloomFilter&) const = default;

 private:
  uint64_t _bit_count{0};
  uint32_t _hash_count{0};
  std::vector<uint64_t> _words;
};

// Deterministic 64-bit hash (FNV-1a followed by a splitmix64 finalizer); stable across platforms and runs.
uint64_t stable_hash(std::string_view bytes, uint64_t seed = 0);

}  // namespace seqbound
