#include "prodsys/grid.hpp"

#include <numeric>

#include <nlohmann/json.hpp>

#include "prodsys/linalg.hpp"

namespace prodsys {

DyadicTime::DyadicTime(std::int64_t num, int lvl) : numerator(num), level(lvl) {
  if (num <= 0 || lvl < 0) raise(Errc::BadInput, "dyadic times are positive with level >= 0");
  while (level > 0 && numerator % 2 == 0) {
    numerator /= 2;
    --level;
  }
}

double DyadicTime::value() const {
  return static_cast<double>(numerator) / static_cast<double>(std::int64_t(1) << level);
}

std::int64_t DyadicTime::units_at(int lvl) const {
  if (!representable_at(lvl)) raise(Errc::LevelTooCoarse, "time not representable at level " + std::to_string(lvl));
  return numerator << (lvl - level);
}

bool DyadicTime::representable_at(int lvl) const { return lvl >= level; }

std::string DyadicTime::str() const {
  return std::to_string(numerator) + "/2^" + std::to_string(level);
}

DyadicTime DyadicTime::parse(const std::string& text) {
  auto slash = text.find("/2^");
  if (slash == std::string::npos) {
    // plain integers are accepted as level-0 times
    return DyadicTime(std::stoll(text), 0);
  }
  std::int64_t num = std::stoll(text.substr(0, slash));
  int lvl = std::stoi(text.substr(slash + 3));
  return DyadicTime(num, lvl);
}

DyadicTime operator+(const DyadicTime& a, const DyadicTime& b) {
  int lvl = std::max(a.level, b.level);
  return DyadicTime(a.units_at(lvl) + b.units_at(lvl), lvl);
}

bool operator<(const DyadicTime& a, const DyadicTime& b) {
  int lvl = std::max(a.level, b.level);
  return a.units_at(lvl) < b.units_at(lvl);
}

DyadicTime DyadicPartition::total() const {
  if (durations.empty()) raise(Errc::BadInput, "partitions are nonempty");
  DyadicTime t = durations[0];
  for (std::size_t i = 1; i < durations.size(); ++i) t = t + durations[i];
  return t;
}

DyadicPartition concat(const DyadicPartition& p, const DyadicPartition& q) {
  DyadicPartition out = p;
  out.durations.insert(out.durations.end(), q.durations.begin(), q.durations.end());
  return out;
}

std::optional<RefinementWitness> refines(const DyadicPartition& coarse,
                                         const DyadicPartition& fine) {
  if (!(coarse.total() == fine.total()))
    raise(Errc::TotalMismatch, "partitions have different totals");

  RefinementWitness w;
  std::size_t pos = 0;
  int lvl = 0;
  for (const auto& d : coarse.durations) lvl = std::max(lvl, d.level);
  for (const auto& d : fine.durations) lvl = std::max(lvl, d.level);

  for (const auto& block_total : coarse.durations) {
    std::int64_t want = block_total.units_at(lvl);
    std::int64_t have = 0;
    DyadicPartition block;
    while (have < want) {
      if (pos >= fine.size()) return std::nullopt;
      have += fine.durations[pos].units_at(lvl);
      block.durations.push_back(fine.durations[pos]);
      ++pos;
    }
    if (have != want) return std::nullopt;  // block boundary not respected
    w.blocks.push_back(std::move(block));
  }
  if (pos != fine.size()) return std::nullopt;
  return w;
}

std::vector<DyadicPartition> all_partitions(const DyadicTime& t, int level) {
  std::int64_t m = t.units_at(level);
  if (m > 24) raise(Errc::SizeLimit, "too many cells for exhaustive partition enumeration");
  std::vector<DyadicPartition> out;
  // compositions of m cells <-> subsets of the m-1 interior boundaries
  for (std::int64_t mask = 0; mask < (std::int64_t(1) << (m - 1)); ++mask) {
    DyadicPartition p;
    std::int64_t run = 1;
    for (std::int64_t b = 0; b < m - 1; ++b) {
      if (mask & (std::int64_t(1) << b)) {
        p.durations.emplace_back(run, level);
        run = 1;
      } else {
        ++run;
      }
    }
    p.durations.emplace_back(run, level);
    out.push_back(std::move(p));
  }
  return out;
}

DyadicPartition finest(const DyadicTime& t, int level) {
  std::int64_t m = t.units_at(level);
  DyadicPartition p;
  p.durations.assign(static_cast<std::size_t>(m), DyadicTime(1, level));
  return p;
}

nlohmann::json partition_to_json(const DyadicPartition& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : p.durations) arr.push_back(d.str());
  return arr;
}

DyadicPartition partition_from_json(const nlohmann::json& j) {
  DyadicPartition p;
  for (const auto& item : j) p.durations.push_back(DyadicTime::parse(item.get<std::string>()));
  return p;
}

}  // namespace prodsys
