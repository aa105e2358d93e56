#include "defectmc/disorder.hpp"

#include "defectmc/error.hpp"

#include <bit>
#include <cmath>
#include <mutex>

namespace defectmc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_probability(double p_vac) {
  if (!(p_vac >= 0.0 && p_vac <= 1.0))
    throw ConfigError("vacancy probability must lie in [0, 1], got " + std::to_string(p_vac));
}

} // namespace

DefectConfiguration::DefectConfiguration(int n, std::size_t unit_count)
    : n_(n), unit_count_(unit_count), words_((unit_count + 63) / 64, 0) {}

void DefectConfiguration::set_vacant(std::size_t unit, bool value) {
  const std::uint64_t bit = std::uint64_t{1} << (unit % 64);
  if (value)
    words_[unit / 64] |= bit;
  else
    words_[unit / 64] &= ~bit;
}

std::size_t DefectConfiguration::vacancy_count() const {
  std::size_t count = 0;
  for (const auto w : words_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

std::vector<std::size_t> DefectConfiguration::vacant_units() const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < unit_count_; ++u)
    if (vacant(u)) out.push_back(u);
  return out;
}

std::size_t DefectConfigurationHash::operator()(const DefectConfiguration& config) const noexcept {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(config.n()) ^ (config.unit_count() << 20));
  for (const auto w : config.key()) h = splitmix64(h ^ w);
  return static_cast<std::size_t>(h);
}

std::uint64_t SeedSpec::derive() const {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(level));
  h = splitmix64(h ^ static_cast<std::uint64_t>(replicate));
  h = splitmix64(h ^ stream);
  return h;
}

DefectConfiguration empty_configuration(const Supercell& supercell) {
  return DefectConfiguration(supercell.n(), supercell.unit_count());
}

DefectConfiguration sample_defects(const Supercell& supercell, double p_vac, const SeedSpec& seed) {
  check_probability(p_vac);
  DefectConfiguration config = empty_configuration(supercell);
  SampleRng rng(seed);
  for (std::size_t u = 0; u < supercell.unit_count(); ++u) {
    if (rng.uniform() < p_vac) config.set_vacant(u);
  }
  return config;
}

DefectConfiguration restrict_to_subdomain(const DefectConfiguration& config,
                                          const PartitionMap& partition, int label) {
  if (label < 1 || label > PartitionMap::kSubdomains)
    throw ConfigError("subdomain label " + std::to_string(label) + " out of range 1..4");
  const Supercell& parent = partition.parent;
  if (config.unit_count() != parent.unit_count() || config.n() != parent.n())
    throw ConfigError("defect configuration does not belong to the partitioned supercell");
  DefectConfiguration out = empty_configuration(partition.subcell);
  for (std::size_t u = 0; u < parent.unit_count(); ++u) {
    if (!config.vacant(u)) continue;
    const std::size_t site = parent.removable_units()[u].front();
    if (partition.assignment[site] != label) continue;
    out.set_vacant(partition.subcell.unit_of_site(partition.sub_site[site]));
  }
  return out;
}

void for_each_configuration(const Supercell& supercell, double p_vac,
                            const std::function<void(const WeightedConfiguration&)>& visit,
                            const EnumerationOptions& options) {
  check_probability(p_vac);
  const std::size_t units = supercell.unit_count();
  if (units > options.max_units || units >= 63)
    throw ConfigError("exhaustive enumeration over " + std::to_string(units) +
                      " removable units exceeds the cap of " + std::to_string(options.max_units) +
                      "; use Monte Carlo sampling instead");

  std::vector<double> weight_by_count(units + 1);
  for (std::size_t k = 0; k <= units; ++k)
    weight_by_count[k] = std::pow(p_vac, static_cast<double>(k)) *
                         std::pow(1.0 - p_vac, static_cast<double>(units - k));

  // Unit permutations induced by the n*n supercell translations.
  std::vector<std::vector<std::size_t>> translations;
  if (options.translation_symmetry) {
    const int n = supercell.n();
    const auto& sites = supercell.sites();
    for (int ti = 0; ti < n; ++ti) {
      for (int tj = 0; tj < n; ++tj) {
        std::vector<std::size_t> perm(units);
        for (std::size_t u = 0; u < units; ++u) {
          const auto& site = sites[supercell.removable_units()[u].front()];
          const std::size_t moved =
              supercell.site_index((site.i + ti) % n, (site.j + tj) % n, site.basis);
          perm[u] = supercell.unit_of_site(moved);
        }
        translations.push_back(std::move(perm));
      }
    }
  }
  auto translate = [&](std::uint64_t mask, const std::vector<std::size_t>& perm) {
    std::uint64_t out = 0;
    for (std::size_t u = 0; u < units; ++u)
      if ((mask >> u) & 1u) out |= std::uint64_t{1} << perm[u];
    return out;
  };

  const std::uint64_t total = std::uint64_t{1} << units;
  std::vector<std::uint64_t> orbit;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::size_t multiplicity = 1;
    if (options.translation_symmetry) {
      orbit.clear();
      bool representative = true;
      for (const auto& perm : translations) {
        const std::uint64_t image = translate(mask, perm);
        if (image < mask) {
          representative = false;
          break;
        }
        orbit.push_back(image);
      }
      if (!representative) continue;
      std::sort(orbit.begin(), orbit.end());
      multiplicity = static_cast<std::size_t>(std::unique(orbit.begin(), orbit.end()) - orbit.begin());
    }
    WeightedConfiguration item{empty_configuration(supercell), 0.0, multiplicity};
    for (std::size_t u = 0; u < units; ++u)
      if ((mask >> u) & 1u) item.config.set_vacant(u);
    item.weight = static_cast<double>(multiplicity) *
                  weight_by_count[static_cast<std::size_t>(std::popcount(mask))];
    visit(item);
  }
}

std::vector<WeightedConfiguration> enumerate_configs(const Supercell& supercell, double p_vac,
                                                     const EnumerationOptions& options) {
  std::vector<WeightedConfiguration> out;
  for_each_configuration(supercell, p_vac, [&](const WeightedConfiguration& item) { out.push_back(item); },
                         options);
  return out;
}

std::size_t SampleCache::KeyHash::operator()(const Key& key) const noexcept {
  return DefectConfigurationHash{}(key.config) ^ static_cast<std::size_t>(splitmix64(key.tag));
}

std::optional<SampleCache::Value> SampleCache::lookup(const Key& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SampleCache::Value SampleCache::insert(const Key& key, Value value) {
  std::unique_lock lock(mutex_);
  return entries_.try_emplace(key, std::move(value)).first->second;
}

std::pair<SampleCache::Value, bool> SampleCache::get_or_compute(
    const Key& key, const std::function<std::vector<double>()>& compute) {
  if (auto found = lookup(key)) {
    ++hits_;
    return {*found, true};
  }
  ++misses_;
  auto value = std::make_shared<const std::vector<double>>(compute());
  return {insert(key, std::move(value)), false};
}

std::size_t SampleCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

} // namespace defectmc
