#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace defectmc {

/// One outcome of the vacancy distribution on a supercell: a bitmask over
/// the supercell's removable units in canonical unit order.
class DefectConfiguration {
public:
  DefectConfiguration() = default;
  DefectConfiguration(int n, std::size_t unit_count);

  int n() const { return n_; }
  std::size_t unit_count() const { return unit_count_; }

  bool vacant(std::size_t unit) const { return (words_[unit / 64] >> (unit % 64)) & 1u; }
  void set_vacant(std::size_t unit, bool value = true);

  std::size_t vacancy_count() const;
  std::vector<std::size_t> vacant_units() const;
  bool empty() const { return vacancy_count() == 0; }

  /// Canonical key: identical bitmasks on the same supercell compare equal.
  const std::vector<std::uint64_t>& key() const { return words_; }

  friend bool operator==(const DefectConfiguration&, const DefectConfiguration&) = default;

private:
  int n_ = 0;
  std::size_t unit_count_ = 0;
  std::vector<std::uint64_t> words_;
};

struct DefectConfigurationHash {
  std::size_t operator()(const DefectConfiguration& config) const noexcept;
};

} // namespace defectmc
