#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "taffy/hash.hpp"
#include "taffy/oracle.hpp"

namespace taffy {

// One CSV row of a growth benchmark, taken at a checkpoint of n inserted keys.
struct BenchRecord {
  uint64_t n = 0;
  uint64_t allocated_bytes = 0;
  double bits_per_key = 0.0;
  double insert_ns_per_key = 0.0;
  double lookup_present_ns = 0.0;
  double lookup_absent_ns = 0.0;
  double measured_fpp = 0.0;
};

inline constexpr char kBenchCsvHeader[] =
    "n,allocated_bytes,bits_per_key,insert_ns_per_key,lookup_present_ns,"
    "lookup_absent_ns,measured_fpp";

// Rows are plain decimal ASCII, never scientific notation.
inline void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << kBenchCsvHeader << '\n';
  char line[256];
  for (const BenchRecord& r : rows) {
    std::snprintf(line, sizeof(line),
                  "%llu,%llu,%.3f,%.2f,%.2f,%.2f,%.9f\n",
                  static_cast<unsigned long long>(r.n),
                  static_cast<unsigned long long>(r.allocated_bytes),
                  r.bits_per_key, r.insert_ns_per_key, r.lookup_present_ns,
                  r.lookup_absent_ns, r.measured_fpp);
    out << line;
  }
}

namespace detail {

inline double now_ns() {
  return static_cast<double>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

// Minimum ns/op over `reps` timed passes of `probes` lookups.
template <class Fn>
double min_lookup_ns(Fn pass, uint64_t probes, int reps) {
  double best = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const double start = now_ns();
    pass();
    const double ns = (now_ns() - start) / static_cast<double>(probes);
    if (rep == 0 || ns < best) best = ns;
  }
  return best;
}

}  // namespace detail

/**
 * Inserts n seeded-random keys into a fresh filter and records a BenchRecord
 * at every power-of-two checkpoint plus the final n. All randomness derives
 * from `seed`, so two runs produce identical non-timing columns. Lookup
 * timings are the minimum over `timing_reps` passes of `probes` operations;
 * the false positive rate is measured against an exact oracle with `probes`
 * negative probes.
 */
template <class Filter>
std::vector<BenchRecord> run_growth_bench(Filter& filter, uint64_t n,
                                          uint64_t probes, uint64_t seed,
                                          int timing_reps = 9) {
  std::vector<BenchRecord> rows;
  std::vector<uint64_t> keys;
  keys.reserve(n);
  OracleSet oracle;
  SplitMix64 key_rng(splitmix64_at(seed, 0xbe7c));
  SplitMix64 absent_rng(splitmix64_at(seed, 0xab5e));

  uint64_t inserted = 0;
  uint64_t next_checkpoint = 1;

  while (inserted < n) {
    const uint64_t target = next_checkpoint < n ? next_checkpoint : n;
    const uint64_t batch = target - inserted;
    const size_t base = keys.size();
    for (uint64_t i = 0; i < batch; ++i) keys.push_back(key_rng.next());

    const double start = detail::now_ns();
    for (uint64_t i = 0; i < batch; ++i) filter.insert(keys[base + i]);
    const double insert_ns = detail::now_ns() - start;

    for (uint64_t i = 0; i < batch; ++i) {
      oracle.add(filter.hash()(keys[base + i]));
    }
    inserted = target;
    while (next_checkpoint <= inserted) next_checkpoint *= 2;

    BenchRecord row;
    row.n = inserted;
    row.allocated_bytes = filter.allocated_bytes();
    row.bits_per_key = 8.0 * static_cast<double>(row.allocated_bytes) /
                       static_cast<double>(inserted);
    row.insert_ns_per_key = insert_ns / static_cast<double>(batch);
    volatile uint64_t sink = 0;
    row.lookup_present_ns = detail::min_lookup_ns(
        [&] {
          uint64_t hits = 0;
          for (uint64_t i = 0; i < probes; ++i) {
            hits += filter.contains(keys[i % keys.size()]);
          }
          sink = hits;
        },
        probes, timing_reps);
    row.lookup_absent_ns = detail::min_lookup_ns(
        [&] {
          SplitMix64 rng = absent_rng;
          uint64_t hits = 0;
          for (uint64_t i = 0; i < probes; ++i) {
            hits += filter.contains(rng.next());
          }
          sink = hits;
        },
        probes, timing_reps);
    row.measured_fpp =
        measure_fpp(filter, oracle, probes, splitmix64_at(seed, inserted)).rate;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace taffy
