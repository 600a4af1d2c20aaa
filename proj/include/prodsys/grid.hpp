#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace prodsys {

// A positive dyadic rational numerator / 2^level, kept canonical (odd
// numerator unless level is 0).
struct DyadicTime {
  std::int64_t numerator = 1;
  int level = 0;

  DyadicTime() = default;
  DyadicTime(std::int64_t num, int lvl);

  double value() const;
  // numerator once rescaled to the given (finer or equal) level
  std::int64_t units_at(int lvl) const;
  bool representable_at(int lvl) const;

  std::string str() const;  // "m/2^L"
  static DyadicTime parse(const std::string& text);

  friend bool operator==(const DyadicTime& a, const DyadicTime& b) = default;
};

DyadicTime operator+(const DyadicTime& a, const DyadicTime& b);
bool operator<(const DyadicTime& a, const DyadicTime& b);

// An ordered composition of a dyadic duration.
struct DyadicPartition {
  std::vector<DyadicTime> durations;

  DyadicPartition() = default;
  explicit DyadicPartition(std::vector<DyadicTime> ds) : durations(std::move(ds)) {}

  std::size_t size() const { return durations.size(); }
  DyadicTime total() const;

  friend bool operator==(const DyadicPartition& a, const DyadicPartition& b) = default;
};

DyadicPartition concat(const DyadicPartition& p, const DyadicPartition& q);

// Grouping of the fine partition's entries into consecutive blocks, one per
// coarse duration.
struct RefinementWitness {
  std::vector<DyadicPartition> blocks;
};

// Returns the unique block structure when fine refines coarse, nullopt
// otherwise. Throws TotalMismatch when the totals differ.
std::optional<RefinementWitness> refines(const DyadicPartition& coarse,
                                         const DyadicPartition& fine);

// All ordered compositions of t into positive multiples of 2^-level.
std::vector<DyadicPartition> all_partitions(const DyadicTime& t, int level);

// The all-cells composition, the unique maximum of all_partitions(t, level).
DyadicPartition finest(const DyadicTime& t, int level);

nlohmann::json partition_to_json(const DyadicPartition& p);
DyadicPartition partition_from_json(const nlohmann::json& j);

}  // namespace prodsys
