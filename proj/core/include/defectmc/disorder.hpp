#pragma once

#include "defectmc/defects.hpp"
#include "defectmc/lattice.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace defectmc {

/// Identifies one independent random stream. The generator for a sample is
/// seeded from a hash of all fields, so results never depend on which
/// worker ran the sample.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::int64_t level = 0;
  std::int64_t replicate = 0;
  std::uint64_t stream = 0; // separates estimators sharing a master seed

  std::uint64_t derive() const;
};

/// Uniform doubles in [0, 1) with 53 random bits, reproducible across
/// standard-library implementations.
class SampleRng {
public:
  explicit SampleRng(const SeedSpec& seed) : engine_(seed.derive()) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

DefectConfiguration empty_configuration(const Supercell& supercell);

/// Each removable unit vacant independently with probability p_vac; one
/// draw per unit in canonical unit order.
DefectConfiguration sample_defects(const Supercell& supercell, double p_vac, const SeedSpec& seed);

/// The parent's vacancies that fall in subdomain `label`, expressed on the
/// partition's subcell.
DefectConfiguration restrict_to_subdomain(const DefectConfiguration& config,
                                          const PartitionMap& partition, int label);

struct WeightedConfiguration {
  DefectConfiguration config;
  double weight = 0.0;           // total probability represented
  std::size_t multiplicity = 1;  // configurations folded into this one
};

struct EnumerationOptions {
  std::size_t max_units = 24;
  /// Visit one representative per supercell-translation orbit, weighted by
  /// the orbit size. Only valid for translation-invariant quantities.
  bool translation_symmetry = false;
};

/// Visits all 2^N vacancy configurations with their binomial weights.
void for_each_configuration(const Supercell& supercell, double p_vac,
                            const std::function<void(const WeightedConfiguration&)>& visit,
                            const EnumerationOptions& options = {});

std::vector<WeightedConfiguration> enumerate_configs(const Supercell& supercell, double p_vac,
                                                     const EnumerationOptions& options = {});

/// Stores per-sample results keyed by (tag, defect bitmask) so repeated
/// outcomes are solved once. Safe for concurrent use; the first insert for a
/// key wins and later readers see that value.
class SampleCache {
public:
  using Value = std::shared_ptr<const std::vector<double>>;

  struct Key {
    std::uint64_t tag = 0; // identifies supercell size, k-grid, model
    DefectConfiguration config;
    friend bool operator==(const Key&, const Key&) = default;
  };

  std::optional<Value> lookup(const Key& key) const;
  Value insert(const Key& key, Value value);

  /// Returns the cached value and whether it was a hit.
  std::pair<Value, bool> get_or_compute(const Key& key, const std::function<std::vector<double>()>& compute);

  std::size_t size() const;
  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

private:
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, Value, KeyHash> entries_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

} // namespace defectmc
