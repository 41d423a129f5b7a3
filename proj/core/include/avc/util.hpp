#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace avc {

// FNV-1a over arbitrary bytes; used for cache keys and config fingerprints.
uint64_t fnv1a64(std::span<const uint8_t> bytes);
uint64_t fnv1a64(std::string_view text);
std::string to_hex(uint64_t value);

// Runs fn(i) for i in [0, n) on up to `jobs` worker threads (0 = hardware
// concurrency). Results must be written to per-index slots; the first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace avc
