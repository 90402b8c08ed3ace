#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace pfu {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

//! Independent stream for (master, i, j): the stream only depends on the
//! indices, never on which worker consumes it.
Rng make_stream(std::uint64_t master, std::uint64_t i, std::uint64_t j = 0);

//! Uniform variate on the open interval (0, 1).
double open_uniform(Rng& rng);

//! Runs fn(0..n-1) on up to `threads` workers. If any call throws, the
//! exception of the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t n,
                  unsigned threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace pfu
