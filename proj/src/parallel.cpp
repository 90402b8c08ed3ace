#include "pfu/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pfu {

std::uint64_t
splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng
make_stream(std::uint64_t master, std::uint64_t i, std::uint64_t j)
{
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ splitmix64(i + 0x632BE59BD9B4E019ull));
  s = splitmix64(s ^ splitmix64(j + 0x85157AF5ull));
  return Rng(s);
}

double
open_uniform(Rng& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

void
parallel_for(std::size_t n,
             unsigned threads,
             const std::function<void(std::size_t)>& fn)
{
  if (n == 0)
    return;
  const unsigned workers =
    static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));

  std::atomic<std::size_t> next{ 0 };
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace pfu
