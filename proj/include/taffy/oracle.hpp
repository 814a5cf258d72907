#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>

#include "taffy/hash.hpp"

namespace taffy {

// Exact membership reference: the set of digests actually inserted into a
// filter under test.
class OracleSet {
 public:
  void add(uint64_t digest) { digests_.insert(digest); }
  bool contains(uint64_t digest) const { return digests_.count(digest) != 0; }
  size_t size() const noexcept { return digests_.size(); }
  auto begin() const noexcept { return digests_.begin(); }
  auto end() const noexcept { return digests_.end(); }

 private:
  std::unordered_set<uint64_t> digests_;
};

struct FppEstimate {
  uint64_t positives = 0;
  uint64_t probes = 0;
  double rate = 0.0;
  double sigma = 0.0;
};

// True iff every digest in the oracle is positive in the filter.
template <class Filter>
bool check_no_false_negatives(const Filter& filter, const OracleSet& oracle) {
  for (uint64_t digest : oracle) {
    if (!filter.find_hash(digest)) return false;
  }
  return true;
}

// Probes the filter with seeded random digests that are not in the oracle
// and reports the observed positive rate with its binomial standard error.
template <class Filter>
FppEstimate measure_fpp(const Filter& filter, const OracleSet& oracle,
                        uint64_t probes, uint64_t rng_seed) {
  if (probes == 0) throw std::invalid_argument("measure_fpp: zero probes");
  SplitMix64 rng(rng_seed);
  FppEstimate est;
  est.probes = probes;
  for (uint64_t i = 0; i < probes; ++i) {
    uint64_t digest = rng.next();
    while (oracle.contains(digest)) digest = rng.next();
    if (filter.find_hash(digest)) ++est.positives;
  }
  est.rate = static_cast<double>(est.positives) / static_cast<double>(probes);
  est.sigma = std::sqrt(est.rate * (1.0 - est.rate) /
                        static_cast<double>(probes));
  return est;
}

}  // namespace taffy
