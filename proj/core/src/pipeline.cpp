#include "defectmc/pipeline.hpp"

#include "defectmc/error.hpp"

#include <algorithm>
#include <limits>

namespace defectmc {

std::string to_string(AreaUnit unit) { return unit == AreaUnit::Cell ? "cell" : "physical"; }

AreaUnit parse_area_unit(const std::string& text) {
  if (text == "cell") return AreaUnit::Cell;
  if (text == "physical") return AreaUnit::Physical;
  throw ConfigError("unknown area unit '" + text + "' (expected cell or physical)");
}

SamplePipeline::SamplePipeline(TightBindingModel model, PipelineSettings settings)
    : model_(std::move(model)), settings_(settings) {
  model_.validate();
  if (!(settings_.p_vac >= 0.0 && settings_.p_vac <= 1.0))
    throw ConfigError("vacancy probability must lie in [0, 1]");
  if (settings_.smoothing.delta < 0.0) throw ConfigError("smoothing width must be >= 0");
  if (settings_.grid.points < 2) throw ConfigError("pipeline needs an energy grid");
}

const SamplePipeline::Geometry& SamplePipeline::geometry(int n) const {
  std::lock_guard lock(mutex_);
  auto it = geometry_.find(n);
  if (it == geometry_.end()) {
    Geometry geo;
    geo.supercell = std::make_unique<Supercell>(model_.lattice, n);
    if (n % 2 == 0) geo.partition = std::make_unique<PartitionMap>(partition_quarters(*geo.supercell));
    it = geometry_.emplace(n, std::move(geo)).first;
  }
  return it->second;
}

const Supercell& SamplePipeline::supercell(int n) const { return *geometry(n).supercell; }

const PartitionMap& SamplePipeline::partition(int n) const {
  const auto& geo = geometry(n);
  if (!geo.partition) throw ConfigError("supercell factor " + std::to_string(n) + " is not divisible by 2");
  return *geo.partition;
}

const BzGrid& SamplePipeline::bz_grid(int n, int q) const {
  std::lock_guard lock(mutex_);
  auto& slot = grids_[{n, q}];
  if (!slot) slot = std::make_unique<BzGrid>(make_bz_grid(model_.lattice, n, q, settings_.bz_mode));
  return *slot;
}

double SamplePipeline::area(int n) const {
  const double cells = static_cast<double>(n) * n;
  return settings_.area_unit == AreaUnit::Cell ? cells : cells * model_.lattice.cell_area();
}

DefectConfiguration SamplePipeline::draw(int n, const SeedSpec& seed) const {
  return sample_defects(supercell(n), settings_.p_vac, seed);
}

std::vector<double> SamplePipeline::compute_quantity(int n, int q, const DefectConfiguration& config) const {
  const Supercell& cell = supercell(n);
  std::vector<double> values(settings_.grid.points, 0.0);
  // Count surviving orbitals first: a fully vacant cell has no states.
  std::size_t surviving = 0;
  for (const auto& site : cell.sites()) {
    const std::size_t unit = cell.unit_of_site(&site - cell.sites().data());
    if (unit == Supercell::npos || !config.vacant(unit))
      surviving += static_cast<std::size_t>(cell.spec().basis[site.basis].orbitals);
  }
  if (surviving == 0) return values;
  const BandGrid bands = solve_bands(model_, cell, config, bz_grid(n, q));
  accumulate_idos(bands, settings_.grid, settings_.smoothing, area(n), values);
  return values;
}

SamplePipeline::Evaluation SamplePipeline::quantity(int n, int q, const DefectConfiguration& config) const {
  if (!settings_.use_cache) {
    return {std::make_shared<const std::vector<double>>(compute_quantity(n, q, config)), 0};
  }
  const std::uint64_t tag = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n)) << 32) |
                            static_cast<std::uint32_t>(q);
  auto [values, hit] = cache_.get_or_compute({tag, config}, [&] { return compute_quantity(n, q, config); });
  return {std::move(values), hit ? std::size_t{1} : std::size_t{0}};
}

SamplePipeline::ControlVariateEvaluation SamplePipeline::control_variate_sample(
    int n, int q, const DefectConfiguration& config) const {
  const PartitionMap& parts = partition(n);
  ControlVariateEvaluation out;
  auto fine = quantity(n, q, config);
  out.fine = std::move(fine.values);
  out.cache_hits = fine.cache_hits;
  out.coarse.assign(settings_.grid.points, 0.0);
  for (int label = 1; label <= PartitionMap::kSubdomains; ++label) {
    const auto sub = quantity(n / 2, 2 * q, restrict_to_subdomain(config, parts, label));
    out.cache_hits += sub.cache_hits;
    for (std::size_t m = 0; m < out.coarse.size(); ++m) out.coarse[m] += (*sub.values)[m];
  }
  for (auto& v : out.coarse) v *= 0.25;
  return out;
}

std::pair<double, double> unperturbed_energy_range(const TightBindingModel& model,
                                                   const std::vector<int>& nq_values, BzMode mode) {
  if (nq_values.empty()) throw ConfigError("no k-resolution given for the energy range");
  const Supercell cell(model.lattice, 1);
  const DefectConfiguration none = empty_configuration(cell);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<int> seen;
  for (const int nq : nq_values) {
    if (std::find(seen.begin(), seen.end(), nq) != seen.end()) continue;
    seen.push_back(nq);
    const BandGrid bands = solve_bands(model, cell, none, make_bz_grid(model.lattice, 1, nq, mode));
    for (const auto& row : bands.energies) {
      if (row.empty()) continue;
      lo = std::min(lo, row.front());
      hi = std::max(hi, row.back());
    }
  }
  if (!(lo <= hi)) throw NumericalError("unperturbed spectrum is empty");
  return {lo, hi};
}

} // namespace defectmc
