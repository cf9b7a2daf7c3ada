#pragma once

// Enumeration kernels. Every kernel has a serial reference path and an
// OpenMP path; results are integer counts so both paths agree exactly.

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ltcd {

enum class Exec { serial, parallel };

void set_workers(int workers);
int workers();

namespace kernels {

template <class Pred>
std::uint64_t count_if_serial(std::uint64_t n, Pred&& pred) {
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (pred(i)) ++c;
  return c;
}

template <class Pred>
std::uint64_t count_if_parallel(std::uint64_t n, Pred&& pred) {
  std::uint64_t c = 0;
  const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for reduction(+ : c) schedule(static)
  for (std::int64_t i = 0; i < sn; ++i)
    if (pred(static_cast<std::uint64_t>(i))) ++c;
  return c;
}

template <class Pred>
std::uint64_t count_if(std::uint64_t n, Pred&& pred, Exec ex) {
  return ex == Exec::parallel ? count_if_parallel(n, pred) : count_if_serial(n, pred);
}

// hist[key(i)] += 1 for i in [0, n); key must return < bins
template <class Key>
std::vector<std::uint64_t> histogram_serial(std::uint64_t n, std::size_t bins, Key&& key) {
  std::vector<std::uint64_t> h(bins, 0);
  for (std::uint64_t i = 0; i < n; ++i) ++h[key(i)];
  return h;
}

template <class Key>
std::vector<std::uint64_t> histogram_parallel(std::uint64_t n, std::size_t bins, Key&& key) {
  std::vector<std::uint64_t> h(bins, 0);
  const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < sn; ++i) ++local[key(static_cast<std::uint64_t>(i))];
#pragma omp critical
    for (std::size_t b = 0; b < bins; ++b) h[b] += local[b];
  }
  return h;
}

template <class Key>
std::vector<std::uint64_t> histogram(std::uint64_t n, std::size_t bins, Key&& key, Exec ex) {
  return ex == Exec::parallel ? histogram_parallel(n, bins, key) : histogram_serial(n, bins, key);
}

// sum of f(i) as unsigned 64-bit integers
template <class F>
std::uint64_t sum_serial(std::uint64_t n, F&& f) {
  std::uint64_t s = 0;
  for (std::uint64_t i = 0; i < n; ++i) s += f(i);
  return s;
}

template <class F>
std::uint64_t sum_parallel(std::uint64_t n, F&& f) {
  std::uint64_t s = 0;
  const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for reduction(+ : s) schedule(static)
  for (std::int64_t i = 0; i < sn; ++i) s += f(static_cast<std::uint64_t>(i));
  return s;
}

template <class F>
std::uint64_t sum(std::uint64_t n, F&& f, Exec ex) {
  return ex == Exec::parallel ? sum_parallel(n, f) : sum_serial(n, f);
}

// out[i] = f(i); f must be safe to call concurrently
template <class T, class F>
void map_into(std::vector<T>& out, F&& f, Exec ex) {
  const std::int64_t sn = static_cast<std::int64_t>(out.size());
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < sn; ++i) out[i] = f(static_cast<std::uint64_t>(i));
  } else {
    for (std::int64_t i = 0; i < sn; ++i) out[i] = f(static_cast<std::uint64_t>(i));
  }
}

// f(i) for every i in [0, n), f must be safe to call concurrently
template <class F>
void for_each(std::uint64_t n, F&& f, Exec ex) {
  const std::int64_t sn = static_cast<std::int64_t>(n);
  if (ex == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < sn; ++i) f(static_cast<std::uint64_t>(i));
  } else {
    for (std::int64_t i = 0; i < sn; ++i) f(static_cast<std::uint64_t>(i));
  }
}

}  // namespace kernels
}  // namespace ltcd
