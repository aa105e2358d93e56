#include "defectmc/config.hpp"

#include "defectmc/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace defectmc {

using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
  case RunMode::Mc: return "mc";
  case RunMode::Mlmc: return "mlmc";
  case RunMode::Exhaustive: return "exhaustive";
  case RunMode::Rates: return "rates";
  case RunMode::Bands: return "bands";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& text) {
  for (RunMode m : {RunMode::Mc, RunMode::Mlmc, RunMode::Exhaustive, RunMode::Rates, RunMode::Bands})
    if (to_string(m) == text) return m;
  throw ConfigError("unknown mode '" + text + "' (expected mc, mlmc, exhaustive, rates or bands)");
}

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be reported as unknown.
class Section {
public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "configuration must be a JSON object" : "must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_.at(key), qualify(key));
  }

  [[noreturn]] void fail(const std::string& message, const std::string& key = "") const {
    const std::string where = key.empty() ? path_ : qualify(key);
    throw ConfigError(where.empty() ? message : "'" + where + "': " + message);
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) fail("unknown key", item.key());
  }

private:
  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  T convert(const std::string& key) {
    const json& v = node_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail("expected true or false", key);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail("expected an integer", key);
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && !v.is_number_unsigned()) fail("must not be negative", key);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail("expected a number", key);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail("expected a string", key);
    }
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      fail(e.what(), key);
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void parse_material(Section s, RunConfig& cfg, const std::string& base_dir) {
  const auto kind = s.get<std::string>("kind", "graphene");
  if (kind == "graphene") {
    cfg.material.kind = MaterialConfig::Kind::Graphene;
    auto& g = cfg.material.graphene;
    g.eps_2p = s.get("eps_2p", g.eps_2p);
    g.t = s.get("t", g.t);
    g.s = s.get("s", g.s);
    if (s.has("couplings")) s.fail("only valid for kind multi_orbital", "couplings");
    g.validate();
  } else if (kind == "multi_orbital") {
    cfg.material.kind = MaterialConfig::Kind::MultiOrbital;
    for (const char* key : {"eps_2p", "t", "s"})
      if (s.has(key)) s.fail("only valid for kind graphene", key);
    if (!s.has("couplings")) s.fail("needs a coupling table path", "couplings");
    std::filesystem::path path = s.get<std::string>("couplings", "");
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    if (!std::filesystem::exists(path)) s.fail("file not found: " + path.string(), "couplings");
    cfg.material.couplings = path.lexically_normal().string();
  } else {
    s.fail("unknown material kind '" + kind + "' (expected graphene or multi_orbital)", "kind");
  }
  s.finish();
}

std::vector<std::size_t> sample_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("'" + where + "': expected an array of sample counts");
  std::vector<std::size_t> out;
  for (const auto& item : v) {
    if (!item.is_number_unsigned()) throw ConfigError("'" + where + "': sample counts must be non-negative integers");
    out.push_back(item.get<std::size_t>());
  }
  return out;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }

  RunConfig cfg;
  try {
    Section root(doc, "");
    cfg.mode = parse_run_mode(root.get<std::string>("mode", to_string(cfg.mode)));
    if (root.has("material")) parse_material(root.child("material"), cfg, base_dir);
    else cfg.material.graphene.validate();

    if (root.has("lattice")) {
      auto s = root.child("lattice");
      cfg.lattice_constant = s.get("constant", cfg.lattice_constant);
      cfg.area_unit = parse_area_unit(s.get<std::string>("area_unit", to_string(cfg.area_unit)));
      s.finish();
      require(cfg.lattice_constant > 0.0, "'lattice.constant' must be positive");
    }

    cfg.p_vac = root.get("p_vac", cfg.p_vac);
    require(cfg.p_vac >= 0.0 && cfg.p_vac <= 1.0, "'p_vac' must lie in [0, 1]");

    if (root.has("smoothing")) {
      auto s = root.child("smoothing");
      cfg.smoothing.delta = s.get("delta", cfg.smoothing.delta);
      s.finish();
      require(cfg.smoothing.delta >= 0.0, "'smoothing.delta' must be >= 0 (0 selects the sharp step)");
    }

    if (root.has("energy_grid")) {
      auto s = root.child("energy_grid");
      cfg.energy_points = s.get("points", cfg.energy_points);
      cfg.energy_min = s.optional<double>("min");
      cfg.energy_max = s.optional<double>("max");
      cfg.energy_step = s.optional<double>("step");
      s.finish();
      require(cfg.energy_points >= 2, "'energy_grid.points' must be >= 2");
      require(cfg.energy_min.has_value() == cfg.energy_max.has_value(),
              "'energy_grid.min' and 'energy_grid.max' must be given together");
      if (cfg.energy_min) require(*cfg.energy_min < *cfg.energy_max, "'energy_grid.min' must be below 'max'");
      if (cfg.energy_step) require(*cfg.energy_step > 0.0, "'energy_grid.step' must be positive");
    }
    cfg.dos_step = root.optional<double>("dos_step");
    if (cfg.dos_step) require(*cfg.dos_step > 0.0, "'dos_step' must be positive");

    if (root.has("energy_window")) {
      const json& w = doc.at("energy_window");
      require(w.is_array() && w.size() == 2 && w[0].is_number() && w[1].is_number(),
              "'energy_window' must be [lo, hi]");
      cfg.energy_window = std::pair{w[0].get<double>(), w[1].get<double>()};
      require(cfg.energy_window->first < cfg.energy_window->second, "'energy_window' must have lo < hi");
    }

    cfg.bz_mode = parse_bz_mode(root.get<std::string>("bz_mode", to_string(cfg.bz_mode)));
    cfg.seed = root.get("seed", cfg.seed);
    cfg.workers = root.get("workers", cfg.workers);
    require(cfg.workers >= 1, "'workers' must be >= 1");
    cfg.cache = root.get("cache", cfg.cache);
    cfg.output = root.get("output", cfg.output);

    if (root.has("levels")) {
      auto s = root.child("levels");
      auto& l = cfg.levels;
      l.c = s.get("c", l.c);
      l.count = s.get("count", l.count);
      l.nq = s.get("nq", l.nq);
      if (s.has("samples")) l.samples = sample_list(doc.at("levels").at("samples"), "levels.samples");
      l.exhaustive_first = s.get("exhaustive_first", l.exhaustive_first);
      s.finish();
      require(l.count >= 1, "'levels.count' must be >= 1");
      require(l.samples.size() == static_cast<std::size_t>(l.count),
              "'levels.samples' needs one entry per level (" + std::to_string(l.count) + ")");
    }
    if (root.has("mc")) {
      auto s = root.child("mc");
      cfg.mc.n = s.get("n", cfg.mc.n);
      cfg.mc.q = s.get("q", cfg.mc.q);
      cfg.mc.samples = s.get("samples", cfg.mc.samples);
      s.finish();
      require(cfg.mc.n >= 1 && cfg.mc.q >= 1, "'mc.n' and 'mc.q' must be >= 1");
      require(cfg.mc.samples >= 1, "'mc.samples' must be >= 1");
    }
    if (root.has("rates")) {
      auto s = root.child("rates");
      cfg.rates.sizes = s.get("sizes", cfg.rates.sizes);
      cfg.rates.nq = s.get("nq", cfg.rates.nq);
      cfg.rates.samples = s.get("samples", cfg.rates.samples);
      s.finish();
      require(cfg.rates.sizes.size() >= 3, "'rates.sizes' needs at least three sizes");
      for (std::size_t i = 0; i < cfg.rates.sizes.size(); ++i) {
        const int n = cfg.rates.sizes[i];
        require(n >= 1 && cfg.rates.nq % n == 0, "'rates.sizes' entries must divide 'rates.nq'");
        if (i > 0) require(n == 2 * cfg.rates.sizes[i - 1], "'rates.sizes' must double from one size to the next");
      }
      require(cfg.rates.samples >= 2, "'rates.samples' must be >= 2");
    }
    if (root.has("exhaustive")) {
      auto s = root.child("exhaustive");
      auto& e = cfg.exhaustive;
      e.n = s.get("n", e.n);
      e.q = s.get("q", e.q);
      e.max_units = s.get("max_units", e.max_units);
      e.translation_symmetry = s.get("translation_symmetry", e.translation_symmetry);
      s.finish();
      require(e.n >= 1 && e.q >= 1, "'exhaustive.n' and 'exhaustive.q' must be >= 1");
    }
    if (root.has("bands")) {
      auto s = root.child("bands");
      cfg.bands.n = s.get("n", cfg.bands.n);
      cfg.bands.q = s.get("q", cfg.bands.q);
      cfg.bands.sample_defects = s.get("sample_defects", cfg.bands.sample_defects);
      s.finish();
      require(cfg.bands.n >= 1 && cfg.bands.q >= 1, "'bands.n' and 'bands.q' must be >= 1");
    }
    cfg.slmc_samples = root.get("slmc_samples", cfg.slmc_samples);
    require(cfg.slmc_samples != 1, "'slmc_samples' must be 0 (off) or >= 2");
    if (root.has("allocation")) {
      auto s = root.child("allocation");
      AllocationConfig a;
      a.tol = s.get("tol", a.tol);
      a.theta = s.get("theta", a.theta);
      a.c_alpha = s.get("c_alpha", a.c_alpha);
      s.finish();
      require(a.tol > 0.0 && a.c_alpha > 0.0, "'allocation.tol' and 'allocation.c_alpha' must be positive");
      require(a.theta > 0.0 && a.theta < 1.0, "'allocation.theta' must lie in (0, 1)");
      cfg.allocation = a;
    }
    if (root.has("complexity")) {
      auto s = root.child("complexity");
      RateInputs r;
      for (auto [key, field] : {std::pair{"W", &r.W}, {"S", &r.S}, {"D", &r.D}, {"C", &r.C}}) {
        if (!s.has(key)) s.fail("missing rate", key);
        *field = s.get(key, 0.0);
      }
      s.finish();
      cfg.complexity = r;
    }
    root.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  cfg.echo = doc.dump();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_run_config(text.str(), path, dir.empty() ? "." : dir.string());
}

} // namespace defectmc
