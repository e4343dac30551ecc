#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tracegan {

// FNV-1a over raw bytes; used for config hashes and parameter fingerprints
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 1469598103934665603ull);
std::uint64_t fnv1a(const std::string& s);
std::uint64_t fnv1a(std::span<const double> values);

std::string hash_hex(std::uint64_t h);

}  // namespace tracegan
