// Copyright 2026 The wsibench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace wsibench {

/// Splits [0, n) into min(workers, n) contiguous bands and calls
/// fn(begin, end, band) once per band. Band boundaries depend only on n and
/// the band count, so callers that reduce per-band results in band order get
/// the same answer as long as the reduction is exact.
template <typename Fn>
void parallel_bands(std::ptrdiff_t n, int workers, Fn&& fn) {
  if (n <= 0) return;
  const std::ptrdiff_t bands = std::clamp<std::ptrdiff_t>(workers, 1, n);
  auto band_begin = [&](std::ptrdiff_t b) { return n * b / bands; };
  if (bands == 1) {
    fn(std::ptrdiff_t{0}, n, std::ptrdiff_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(bands);
  std::vector<std::thread> threads;
  threads.reserve(bands);
  for (std::ptrdiff_t b = 0; b < bands; ++b) {
    threads.emplace_back([&, b] {
      try {
        fn(band_begin(b), band_begin(b + 1), b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Number of bands parallel_bands will use.
inline std::ptrdiff_t band_count(std::ptrdiff_t n, int workers) {
  return n <= 0 ? 0 : std::clamp<std::ptrdiff_t>(workers, 1, n);
}

/// Dynamic work distribution for uneven per-item cost. Items are claimed
/// from a shared counter; callers must write results into per-item slots.
template <typename Fn>
void parallel_items(std::ptrdiff_t n, int workers, Fn&& fn) {
  if (n <= 0) return;
  const std::ptrdiff_t threads_wanted = std::clamp<std::ptrdiff_t>(workers, 1, n);
  if (threads_wanted == 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::ptrdiff_t> next{0};
  std::vector<std::exception_ptr> errors(threads_wanted);
  std::vector<std::thread> threads;
  threads.reserve(threads_wanted);
  for (std::ptrdiff_t t = 0; t < threads_wanted; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::ptrdiff_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace wsibench
