#include "seqbound/bloom_filter.hpp"

#include <cmath>
#include <numbers>

#include "seqbound/errors.hpp"

namespace seqbound {

namespace {

uint64_t splitmix64(uint64_t value) {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

}  // namespace

uint64_t stable_hash(std::string_view bytes, uint64_t seed) {
  auto hash = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (const auto byte : bytes) {
    hash ^= static_cast<uint8_t>(byte);
    hash *= 0x100000001b3ULL;
  }
  return splitmix64(hash);
}

BloomFilter::BloomFilter(size_t expected_values, double bits_per_value) {
  if (!(bits_per_value >= 4.0)) {
    throw ConfigError("bloom filter needs at least 4 bits per value");
  }
  if (expected_values == 0) {
    return;
  }
  const auto bits = std::max<uint64_t>(64, static_cast<uint64_t>(std::ceil(static_cast<double>(expected_values) * bits_per_value)));
  _bit_count = bits;
  _hash_count = std::max<uint32_t>(1, static_cast<uint32_t>(std::lround(bits_per_value * std::numbers::ln2)));
  _words.assign((bits + 63) / 64, 0);
}

BloomFilter BloomFilter::build(std::span<const std::string> keys, double bits_per_value) {
  auto filter = BloomFilter{keys.size(), bits_per_value};
  for (const auto& key : keys) {
    filter.insert(key);
  }
  return filter;
}

BloomFilter BloomFilter::from_parts(uint64_t bit_count, uint32_t hash_count, std::vector<uint64_t> words) {
  if (words.size() != (bit_count + 63) / 64 || (bit_count > 0 && hash_count == 0)) {
    throw FormatError("inconsistent bloom filter layout");
  }
  auto filter = BloomFilter{};
  filter._bit_count = bit_count;
  filter._hash_count = hash_count;
  filter._words = std::move(words);
  return filter;
}

void BloomFilter::insert(std::string_view key) {
  if (_bit_count == 0) {
    throw ArgumentError("cannot insert into a zero-capacity bloom filter");
  }
  const auto h1 = stable_hash(key, 0);
  const auto h2 = stable_hash(key, 1) | 1;
  for (auto index = uint32_t{0}; index < _hash_count; ++index) {
    const auto bit = (h1 + index * h2) % _bit_count;
    _words[bit / 64] |= uint64_t{1} << (bit % 64);
  }
}

bool BloomFilter::possibly_contains(std::string_view key) const {
  if (_bit_count == 0) {
    return false;
  }
  const auto h1 = stable_hash(key, 0);
  const auto h2 = stable_hash(key, 1) | 1;
  for (auto index = uint32_t{0}; index < _hash_count; ++index) {
    const auto bit = (h1 + index * h2) % _bit_count;
    if ((_words[bit / 64] & (uint64_t{1} << (bit % 64))) == 0) {
      return false;
    }
  }
  return true;
}

}  // namespace seqbound
