#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <future>
#include <optional>
#include <vector>

namespace dynres::detail {

/// Evaluates fn(0..n-1) on up to `workers` threads; results come back in
/// index order. The first exception (lowest index) is rethrown.
template <class R, class Fn>
std::vector<R> ordered_map(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      slots[i].emplace(fn(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (unsigned k = 0; k < w; ++k)
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      }));
    for (auto& f : pool) f.get();
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace dynres::detail
