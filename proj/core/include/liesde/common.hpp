#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace liesde {

// Locale-independent decimal formatting with 17 significant digits, enough to
// round-trip any double.  All CSV output goes through this.
std::string format_double(double value);

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

// Derives the RNG substream key for one Monte Carlo path.  For a fixed seed
// the map path_index -> key is injective, so per-path streams never collide
// and results do not depend on how paths are distributed over threads.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t path_index);

// Least-squares slope of log(y) against log(x).  Returns nullopt when any
// coordinate is non-positive or non-finite, or fewer than two points given.
std::optional<double> fit_loglog_slope(const std::vector<double>& x,
                                       const std::vector<double>& y);

// Runs body(i) for i in [0, count) on up to `threads` workers.  Each index is
// processed exactly once; callers keep determinism by writing to per-index
// slots and aggregating in index order afterwards.
void parallel_for_indexed(std::size_t count, std::size_t threads,
                          const std::function<void(std::size_t)>& body);

}  // namespace liesde
