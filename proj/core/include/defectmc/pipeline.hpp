#pragma once

#include "defectmc/disorder.hpp"
#include "defectmc/qoi.hpp"
#include "defectmc/spectrum.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace defectmc {

enum class AreaUnit {
  Cell,     // per fundamental cell, |F1| = 1
  Physical, // per area in units of the lattice vectors
};

std::string to_string(AreaUnit unit);
AreaUnit parse_area_unit(const std::string& text);

struct PipelineSettings {
  double p_vac = 0.0;
  SmoothingSpec smoothing;
  EnergyGrid grid;
  BzMode bz_mode = BzMode::Reduced;
  AreaUnit area_unit = AreaUnit::Cell;
  bool use_cache = true;
};

/// Per-sample quantity of interest: the smoothed IDoS of one defect
/// outcome, and its control variate built from the four quarter cells.
/// Thread-safe; geometry and k-grids are built once per (n, q).
class SamplePipeline {
public:
  using Curve = std::shared_ptr<const std::vector<double>>;

  struct Evaluation {
    Curve values;
    std::size_t cache_hits = 0;
  };

  struct ControlVariateEvaluation {
    Curve fine;                // Q_l(omega)
    std::vector<double> coarse; // Q_l^CV(omega), mean of the four quarters
    std::size_t cache_hits = 0;
  };

  SamplePipeline(TightBindingModel model, PipelineSettings settings);

  const TightBindingModel& model() const { return model_; }
  const PipelineSettings& settings() const { return settings_; }
  const EnergyGrid& grid() const { return settings_.grid; }

  const Supercell& supercell(int n) const;
  const PartitionMap& partition(int n) const;
  const BzGrid& bz_grid(int n, int q) const;
  double area(int n) const;

  DefectConfiguration draw(int n, const SeedSpec& seed) const;

  /// IDoS per unit area of configuration `config` on the (n, q) pipeline.
  /// An outcome with every orbital removed has no states and yields zeros.
  Evaluation quantity(int n, int q, const DefectConfiguration& config) const;
  std::vector<double> compute_quantity(int n, int q, const DefectConfiguration& config) const;

  /// Q_l on (n, q) and the mean of Q_{l-1} over the four restrictions on
  /// (n/2, 2q). Both use the same outcome.
  ControlVariateEvaluation control_variate_sample(int n, int q, const DefectConfiguration& config) const;

  const SampleCache& cache() const { return cache_; }

private:
  struct Geometry {
    std::unique_ptr<Supercell> supercell;
    std::unique_ptr<PartitionMap> partition;
  };

  const Geometry& geometry(int n) const;

  TightBindingModel model_;
  PipelineSettings settings_;
  mutable std::mutex mutex_;
  mutable std::map<int, Geometry> geometry_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<BzGrid>> grids_;
  mutable SampleCache cache_;
};

/// Lowest and highest eigenvalue of the defect-free material over the
/// folded k-sets of the given n*q resolutions. Vacancies only remove rows
/// and columns, so defected spectra stay inside this range.
std::pair<double, double> unperturbed_energy_range(const TightBindingModel& model,
                                                   const std::vector<int>& nq_values, BzMode mode);

} // namespace defectmc
