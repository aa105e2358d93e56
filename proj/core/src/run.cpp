#include "defectmc/run.hpp"

#include "defectmc/error.hpp"
#include "defectmc/output.hpp"
#include "defectmc/parallel.hpp"
#include "defectmc/rates.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace defectmc {

using nlohmann::json;
namespace fs = std::filesystem;

void apply_overrides(RunConfig& config, const RunOverrides& overrides) {
  if (overrides.mode) config.mode = *overrides.mode;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.workers) {
    if (*overrides.workers < 1) throw ConfigError("worker count must be >= 1");
    config.workers = *overrides.workers;
  }
  if (overrides.output) config.output = *overrides.output;
}

TightBindingModel build_model(const RunConfig& config) {
  if (config.material.kind == MaterialConfig::Kind::Graphene)
    return config.material.graphene.build(config.lattice_constant);
  return load_coupling_table(config.material.couplings).build(config.lattice_constant);
}

namespace {

// n*q of the finest k-set the mode touches; the unperturbed spectrum on it
// bounds every defected spectrum of the run.
int resolution(const RunConfig& config) {
  switch (config.mode) {
  case RunMode::Mc: return config.mc.n * config.mc.q;
  case RunMode::Mlmc: return config.levels.nq;
  case RunMode::Exhaustive: return config.exhaustive.n * config.exhaustive.q;
  case RunMode::Rates: return config.rates.nq;
  case RunMode::Bands: return config.bands.n * config.bands.q;
  }
  return 1;
}

} // namespace

ResolvedGrid resolve_energy_grid(const RunConfig& config, const TightBindingModel& model) {
  double lo = 0.0;
  double hi = 0.0;
  if (config.energy_min) {
    lo = *config.energy_min;
    hi = *config.energy_max;
  } else {
    const auto range = unperturbed_energy_range(model, {resolution(config)}, config.bz_mode);
    const double pad = 2.0 * config.smoothing.delta + 0.01 * (range.second - range.first);
    lo = range.first - pad;
    hi = range.second + pad;
  }

  ResolvedGrid out;
  if (config.energy_step) {
    out.grid = EnergyGrid::with_step(lo, hi, *config.energy_step);
  } else if (config.dos_step) {
    // Refine the requested resolution until the DoS stencil is a whole
    // number of steps.
    const double base = (hi - lo) / static_cast<double>(config.energy_points - 1);
    const double steps = std::ceil(*config.dos_step / base - 1e-9);
    out.grid = EnergyGrid::with_step(lo, hi, *config.dos_step / steps);
  } else {
    out.grid = EnergyGrid::spanning(lo, hi, config.energy_points);
  }
  if (config.dos_step) {
    out.dos_step = *config.dos_step;
  } else {
    const double steps = std::max(1.0, std::round(config.smoothing.delta / out.grid.step));
    out.dos_step = steps * out.grid.step;
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

json rate_json(const std::optional<Rate>& rate) {
  if (!rate) return nullptr;
  return {{"value", number(rate->value)}, {"stderr", number(rate->stderr_value)}, {"points", rate->points}};
}

json level_record(const LevelResult& level) {
  return {{"level", level.level},
          {"n", level.n},
          {"q", level.q},
          {"nsamples", level.samples},
          {"mean_level_variance", number(level.mean_level_variance)},
          {"wall_time_s", number(level.wall_time_s)},
          {"cache_hits", level.cache_hits},
          {"exhaustive", level.exhaustive},
          {"mean_q_variance", number(level.mean_q_variance)},
          {"work_per_sample_s", number(level.work_per_sample())}};
}

class RunWriter {
public:
  RunWriter(const RunConfig& config, const ResolvedGrid& grid) : config_(config), grid_(grid), dir_(config.output) {
    fs::create_directories(dir_);
  }

  void idos(const std::vector<double>& mean, const std::vector<double>& variance) {
    const auto dos = dos_by_differentiation(IdosCurve{grid_.grid, mean}, grid_.dos_step);
    const auto path = dir_ / "idos.csv";
    auto out = open_output(path);
    out << "energy_eV,idos_mean,idos_variance,dos\n";
    for (std::size_t m = 0; m < grid_.grid.points; ++m)
      out << format_double(grid_.grid.at(m)) << ',' << format_double(mean[m]) << ','
          << format_double(variance[m]) << ',' << format_double(dos[m]) << '\n';
    close_output(out, path);
  }

  void curve(const std::string& name, const std::vector<std::string>& columns,
             const std::vector<const std::vector<double>*>& values) {
    const auto path = dir_ / name;
    auto out = open_output(path);
    out << "energy_eV";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (std::size_t m = 0; m < grid_.grid.points; ++m) {
      out << format_double(grid_.grid.at(m));
      for (const auto* v : values) out << ',' << format_double((*v)[m]);
      out << '\n';
    }
    close_output(out, path);
  }

  void levels(const std::vector<json>& records) {
    const auto path = dir_ / "levels.jsonl";
    auto out = open_output(path);
    for (const auto& r : records) out << r.dump() << '\n';
    close_output(out, path);
  }

  void bands(const BandGrid& bands) {
    const auto path = dir_ / "bands.csv";
    auto out = open_output(path);
    write_band_csv(out, bands);
    close_output(out, path);
  }

  void summary(json body, double total_time, const SampleCache& cache) {
    body["mode"] = to_string(config_.mode);
    body["master_seed"] = config_.seed;
    body["workers"] = config_.workers;
    body["total_wall_time_s"] = number(total_time);
    body["energy_grid"] = {{"start", grid_.grid.start}, {"step", grid_.grid.step}, {"points", grid_.grid.points}};
    body["dos_step"] = grid_.dos_step;
    body["cache"] = {{"enabled", config_.cache}, {"hits", cache.hits()}, {"misses", cache.misses()}};
    body["config"] = json::parse(config_.echo);
    const auto path = dir_ / "summary.json";
    auto out = open_output(path);
    out << body.dump(2) << '\n';
    close_output(out, path);
  }

private:
  const RunConfig& config_;
  const ResolvedGrid& grid_;
  fs::path dir_;
};

json complexity_json(const ComplexityExponents& e) {
  return {{"fixed_samples", number(e.fixed_samples)},
          {"slmc", number(e.slmc)},
          {"mlmc", number(e.mlmc)},
          {"sampling_regime_valid", e.sampling_regime_valid}};
}

// Complexity exponents and the splitting parameter from rates, or a reason
// why they are not available.
void add_complexity(json& body, double W, double S, double D, double C) {
  try {
    body["complexity"] = complexity_json(complexity_exponents(W, S, D, C));
  } catch (const ConfigError& e) {
    body["complexity"] = nullptr;
    body["complexity_unavailable"] = e.what();
  }
  try {
    body["theta"] = number(splitting_theta(W, S, C));
  } catch (const ConfigError& e) {
    body["theta"] = nullptr;
    body["theta_unavailable"] = e.what();
  }
}

json estimate_summary(const MlmcEstimate& est, double lo, double hi) {
  return {{"window_mean_estimator_variance",
           est.variance_available ? number(window_mean(est.grid, est.variance, lo, hi)) : json(nullptr)},
          {"variance_available", est.variance_available},
          {"levels", est.levels.size()},
          {"wall_time_s", number(est.wall_time_s)}};
}

} // namespace

void execute_run(const RunConfig& config, std::ostream& log) {
  const auto start = Clock::now();
  const TightBindingModel model = build_model(config);
  const ResolvedGrid grid = resolve_energy_grid(config, model);

  PipelineSettings settings;
  settings.p_vac = config.p_vac;
  settings.smoothing = config.smoothing;
  settings.grid = grid.grid;
  settings.bz_mode = config.bz_mode;
  settings.area_unit = config.area_unit;
  settings.use_cache = config.cache;
  const SamplePipeline pipeline(model, settings);

  EstimatorOptions options;
  options.master_seed = config.seed;
  options.workers = config.workers;
  if (config.energy_window) {
    options.window_lo = config.energy_window->first;
    options.window_hi = config.energy_window->second;
  }
  const double lo = options.window_lo;
  const double hi = options.window_hi;

  RunWriter writer(config, grid);
  json body;
  std::vector<json> records;

  switch (config.mode) {
  case RunMode::Mc: {
    const auto est = mc_estimate(pipeline, {config.mc.n, config.mc.q, config.mc.samples, false}, options);
    writer.idos(est.mean, est.variance);
    for (const auto& l : est.levels) records.push_back(level_record(l));
    body["estimate"] = estimate_summary(est, lo, hi);
    break;
  }
  case RunMode::Mlmc: {
    const auto& lc = config.levels;
    LevelPlan plan = LevelPlan::doubling(lc.c, lc.count, lc.nq, lc.samples);
    if (lc.exhaustive_first) plan.levels.front().exhaustive = true;
    log << "mlmc: " << plan.levels.size() << " levels, n*q = " << lc.nq << '\n';
    const auto est = mlmc_estimate(pipeline, plan, options);
    writer.idos(est.mean, est.variance);
    for (const auto& l : est.levels) records.push_back(level_record(l));
    body["estimate"] = estimate_summary(est, lo, hi);

    if (config.slmc_samples > 0) {
      const auto& finest = plan.levels.back();
      EstimatorOptions slmc_options = options;
      slmc_options.stream = 1;
      const auto slmc = mc_estimate(pipeline, {finest.n, finest.q, config.slmc_samples, false}, slmc_options);
      const auto cmp = slmc_comparison(est, slmc.levels.front(), lo, hi);
      writer.curve("variance.csv", {"mlmc_variance", "slmc_variance", "slmc_rescaled"},
                   {&cmp.mlmc_variance, &cmp.slmc_variance, &cmp.rescaled_slmc});
      body["slmc_comparison"] = {{"n", finest.n},
                                 {"q", finest.q},
                                 {"samples", config.slmc_samples},
                                 {"rescale", number(cmp.rescale)},
                                 {"samples_needed", number(cmp.slmc_samples_needed)},
                                 {"time_per_sample_s", number(cmp.slmc_time_per_sample)},
                                 {"mlmc_time_s", number(cmp.mlmc_time_s)},
                                 {"slmc_time_needed_s", number(cmp.slmc_time_needed_s)},
                                 {"work_ratio", number(cmp.work_ratio)}};
    }
    if (config.allocation) {
      std::vector<double> V;
      std::vector<double> W;
      for (const auto& l : est.levels) {
        V.push_back(l.mean_level_variance);
        W.push_back(l.work_per_sample());
      }
      const auto& a = *config.allocation;
      try {
        body["allocation"] = {{"tol", a.tol},
                              {"theta", a.theta},
                              {"c_alpha", a.c_alpha},
                              {"samples", optimal_samples(V, W, a.tol, a.theta, a.c_alpha)}};
      } catch (const ConfigError& e) {
        body["allocation"] = {{"unavailable", e.what()}};
      }
    }
    break;
  }
  case RunMode::Exhaustive: {
    const auto& ec = config.exhaustive;
    const auto level = exhaustive_level(pipeline, ec.n, ec.q, options, {ec.max_units, ec.translation_symmetry});
    // Estimator variance is zero here; report the spread of Q instead.
    writer.idos(level.mean, level.variance);
    records.push_back(level_record(level));
    body["exhaustive"] = {{"configurations", level.samples},
                          {"terminal_idos", level.mean.back()},
                          {"window_mean_variance", number(level.mean_level_variance)}};
    break;
  }
  case RunMode::Rates: {
    const auto& rc = config.rates;
    std::vector<SizeStatistics> sizes;
    for (int n : rc.sizes) {
      log << "rates: n = " << n << ", q = " << rc.nq / n << '\n';
      sizes.push_back(size_statistics(pipeline, n, rc.nq / n, rc.samples, options));
      const auto& s = sizes.back();
      json r = {{"level", sizes.size()},
                {"n", s.n},
                {"q", s.q},
                {"nsamples", s.samples},
                {"mean_level_variance", number(s.mean_diff_variance.value_or(s.mean_q_variance))},
                {"wall_time_s", number(s.wall_time_s)},
                {"cache_hits", s.cache_hits},
                {"mean_q_variance", number(s.mean_q_variance)},
                {"mean_diff_variance", s.mean_diff_variance ? number(*s.mean_diff_variance) : json(nullptr)},
                {"work_per_sample_s", number(s.fine_time_per_sample)}};
      records.push_back(r);
    }
    const auto& finest = sizes.back();
    std::vector<double> variance = finest.q_variance;
    for (auto& v : variance) v /= static_cast<double>(finest.samples);
    writer.idos(finest.q_mean, variance);

    const auto obs = observations_from(sizes, grid.grid, lo, hi);
    const auto rates = fit_rates(obs);
    body["rates"] = {{"W", rate_json(rates.W)},
                     {"S", rate_json(rates.S)},
                     {"D", rate_json(rates.D)},
                     {"C", rate_json(rates.C)},
                     {"mlmc_benefit", rates.mlmc_benefit()},
                     {"mc_benefit", rates.mc_benefit()},
                     {"observations",
                      {{"sizes", obs.sizes},
                       {"bias_proxy", obs.bias_proxy},
                       {"variance", obs.variance},
                       {"work", obs.work}}}};
    if (rates.W && rates.S && rates.D && rates.C)
      add_complexity(body, rates.W->value, rates.S->value, rates.D->value, rates.C->value);
    break;
  }
  case RunMode::Bands: {
    const auto& bc = config.bands;
    const Supercell& supercell = pipeline.supercell(bc.n);
    const DefectConfiguration defects =
        bc.sample_defects ? pipeline.draw(bc.n, SeedSpec{config.seed, 1, 0, 0}) : empty_configuration(supercell);
    const auto bands = solve_bands(model, supercell, defects, pipeline.bz_grid(bc.n, bc.q));
    writer.bands(bands);
    const auto values = pipeline.compute_quantity(bc.n, bc.q, defects);
    writer.idos(values, std::vector<double>(values.size(), 0.0));
    body["bands"] = {{"n", bc.n}, {"q", bc.q}, {"vacancies", defects.vacancy_count()}, {"kpoints", bands.kpoints.size()}};
    break;
  }
  }

  if (config.complexity && !body.contains("complexity")) {
    const auto& r = *config.complexity;
    add_complexity(body, r.W, r.S, r.D, r.C);
  }
  const auto unperturbed =
      pipeline.compute_quantity(1, resolution(config), empty_configuration(pipeline.supercell(1)));
  writer.curve("unperturbed.csv", {"idos"}, {&unperturbed});
  writer.levels(records);
  writer.summary(body, std::chrono::duration<double>(Clock::now() - start).count(), pipeline.cache());
  log << "wrote " << config.output << '\n';
}

namespace {

int report(std::ostream& err, const std::optional<std::string>& output, const std::string& kind,
           const std::string& message, int code, const std::optional<std::string>& task = std::nullopt) {
  json record = {{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
  if (task) record["task"] = *task;
  err << record.dump() << '\n';
  if (output) {
    std::error_code ec;
    fs::create_directories(*output, ec);
    std::ofstream file(fs::path(*output) / "error.json");
    if (file) file << record.dump(2) << '\n';
  }
  return code;
}

} // namespace

int run_config_file(const std::string& path, const RunOverrides& overrides, std::ostream& log, std::ostream& err) {
  std::optional<std::string> output = overrides.output;
  try {
    RunConfig config = load_run_config(path);
    apply_overrides(config, overrides);
    output = config.output;
    execute_run(config, log);
    return kExitOk;
  } catch (const TaskFailure& e) {
    return report(err, output, "numerical", e.what(), kExitNumerical, e.task());
  } catch (const ConfigError& e) {
    return report(err, output, "config", e.what(), kExitConfig);
  } catch (const NumericalError& e) {
    return report(err, output, "numerical", e.what(), kExitNumerical);
  } catch (const std::exception& e) {
    return report(err, output, "failure", e.what(), kExitFailure);
  }
}

} // namespace defectmc
