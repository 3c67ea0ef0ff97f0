#include "emse_lab/config.hpp"

#include <fstream>

namespace emse::lab {
namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

std::vector<double> number_list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    throw UsageError(std::string("'") + key + "' must be a non-empty array of numbers");
  }
  return j.at(key).get<std::vector<double>>();
}

AmpRunSettings amp_from_json(const json& j, AmpRunSettings s) {
  if (!j.is_object()) return s;
  s.n = get_or(j, "n", s.n);
  s.trials = get_or(j, "trials", s.trials);
  s.max_iters = get_or(j, "max_iters", s.max_iters);
  s.halt_tol = get_or(j, "halt_tol", s.halt_tol);
  if (s.n < 10) throw UsageError("amp.n must be at least 10");
  if (s.trials < 2) throw UsageError("amp.trials must be at least 2");
  if (s.max_iters < 1) throw UsageError("amp.max_iters must be positive");
  if (!(s.halt_tol >= 0.0)) throw UsageError("amp.halt_tol must be non-negative");
  return s;
}

json amp_to_json(const AmpRunSettings& s) {
  return {{"n", s.n}, {"trials", s.trials}, {"max_iters", s.max_iters}, {"halt_tol", s.halt_tol}};
}

ExperimentConfig parse(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw UsageError("config needs a string 'kind'");
  }
  ExperimentConfig cfg;
  cfg.kind = kind_from_name(j.at("kind").get<std::string>());
  cfg.name = get_or<std::string>(j, "name", "");
  cfg.output_dir = get_or<std::string>(j, "output_dir", ".");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (j.contains("system")) {
    const auto& s = j.at("system");
    cfg.system.delta = get_or(s, "delta", cfg.system.delta);
    cfg.system.sigma_z2 = get_or(s, "sigma_z2", cfg.system.sigma_z2);
  }
  if (j.contains("eval")) cfg.eval = eval_config_from_json(j.at("eval"));
  cfg.eval.seed = cfg.seed;

  switch (cfg.kind) {
    case Kind::table1:
    case Kind::table2:
    case Kind::custom: {
      cfg.system.validate();
      if (!j.contains("prior")) throw UsageError("config needs a 'prior'");
      cfg.prior = prior_from_json(j.at("prior"));
      if (!j.contains("sweep")) throw UsageError("config needs a 'sweep'");
      cfg.sweep.parameter = get_or<std::string>(j.at("sweep"), "parameter", "theta");
      cfg.sweep.values = number_list(j.at("sweep"), "values");
      for (double v : cfg.sweep.values) swept_prior(cfg.prior, cfg.sweep, v);
      break;
    }
    case Kind::fig1: {
      cfg.system.validate();
      if (!j.contains("prior") || !j.contains("postulated")) {
        throw UsageError("fig1 needs 'prior' and 'postulated'");
      }
      cfg.prior = prior_from_json(j.at("prior"));
      cfg.postulated = prior_from_json(j.at("postulated"));
      if (j.contains("grid")) {
        const auto& g = j.at("grid");
        cfg.grid.lo = get_or(g, "lo", cfg.grid.lo);
        cfg.grid.hi = get_or(g, "hi", cfg.grid.hi);
        cfg.grid.points = get_or(g, "points", cfg.grid.points);
      }
      if (!(cfg.grid.lo > 0.0) || !(cfg.grid.hi > cfg.grid.lo) || cfg.grid.points < 2) {
        throw UsageError("fig1 grid needs 0 < lo < hi and at least two points");
      }
      break;
    }
    case Kind::amp_validate: {
      cfg.system.validate();
      if (!j.contains("cases") || !j.at("cases").is_array() || j.at("cases").empty()) {
        throw UsageError("amp-validate needs a non-empty 'cases' array");
      }
      for (const auto& c : j.at("cases")) {
        cfg.cases.push_back({get_or<std::string>(c, "name", "case" + std::to_string(cfg.cases.size())),
                             prior_from_json(c.at("prior")), prior_from_json(c.at("postulated"))});
      }
      cfg.amp = amp_from_json(j.value("amp", json::object()), cfg.amp);
      break;
    }
    case Kind::fig2: {
      if (!(cfg.system.sigma_z2 >= 0.0)) throw UsageError("sigma_z2 must be non-negative");
      const auto f = j.value("fig2", json::object());
      if (f.contains("chain")) {
        const auto& c = f.at("chain");
        cfg.fig2.chain.p10 = get_or(c, "p10", cfg.fig2.chain.p10);
        cfg.fig2.chain.p01 = get_or(c, "p01", cfg.fig2.chain.p01);
      }
      cfg.fig2.chain.validate();
      cfg.fig2.deltas = number_list(f, "deltas");
      for (double d : cfg.fig2.deltas) {
        if (!(d > 0.0)) throw UsageError("fig2 deltas must be positive");
      }
      cfg.fig2.better_window = get_or(f, "better_window", cfg.fig2.better_window);
      cfg.fig2.worse_window = get_or(f, "worse_window", cfg.fig2.worse_window);
      for (int w : {cfg.fig2.better_window, cfg.fig2.worse_window}) {
        if (w < 1 || w > 3) throw UsageError("window sizes must be 1, 2 or 3");
      }
      if (f.contains("mc")) {
        const auto& m = f.at("mc");
        cfg.fig2.mc.samples = get_or(m, "samples", cfg.fig2.mc.samples);
        cfg.fig2.mc.chunks = get_or(m, "chunks", cfg.fig2.mc.chunks);
      }
      if (cfg.fig2.mc.chunks < 2 || cfg.fig2.mc.samples < 1000) {
        throw UsageError("fig2 mc needs at least 2 chunks and 1000 samples");
      }
      cfg.amp = amp_from_json(j.value("amp", json::object()), cfg.amp);
      break;
    }
  }
  return cfg;
}

}  // namespace

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::table1: return "table1";
    case Kind::table2: return "table2";
    case Kind::fig1: return "fig1";
    case Kind::fig2: return "fig2";
    case Kind::amp_validate: return "amp-validate";
    case Kind::custom: return "custom";
  }
  return "custom";
}

Kind kind_from_name(const std::string& name) {
  for (Kind k : {Kind::table1, Kind::table2, Kind::fig1, Kind::fig2, Kind::amp_validate,
                 Kind::custom}) {
    if (kind_name(k) == name) return k;
  }
  throw UsageError("unknown experiment kind '" + name + "'");
}

Prior swept_prior(const Prior& prior, const Sweep& sweep, double value) {
  auto j = prior_to_json(prior);
  if (!j.contains(sweep.parameter) || !j.at(sweep.parameter).is_number()) {
    throw UsageError("prior has no numeric field '" + sweep.parameter + "' to sweep");
  }
  j[sweep.parameter] = value;
  try {
    return prior_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("sweep value rejected: ") + e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  try {
    return parse(j);
  } catch (const UsageError&) {
    throw;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json j = {{"kind", kind_name(cfg.kind)},
            {"name", cfg.stem()},
            {"output_dir", cfg.output_dir.string()},
            {"seed", cfg.seed},
            {"system", {{"delta", cfg.system.delta}, {"sigma_z2", cfg.system.sigma_z2}}},
            {"eval", eval_config_to_json(cfg.eval)}};
  switch (cfg.kind) {
    case Kind::table1:
    case Kind::table2:
    case Kind::custom:
      j["prior"] = prior_to_json(cfg.prior);
      j["sweep"] = {{"parameter", cfg.sweep.parameter}, {"values", cfg.sweep.values}};
      break;
    case Kind::fig1:
      j["prior"] = prior_to_json(cfg.prior);
      j["postulated"] = prior_to_json(cfg.postulated);
      j["grid"] = {{"lo", cfg.grid.lo}, {"hi", cfg.grid.hi}, {"points", cfg.grid.points}};
      break;
    case Kind::amp_validate: {
      json cases = json::array();
      for (const auto& c : cfg.cases) {
        cases.push_back({{"name", c.name},
                         {"prior", prior_to_json(c.prior)},
                         {"postulated", prior_to_json(c.postulated)}});
      }
      j["cases"] = cases;
      j["amp"] = amp_to_json(cfg.amp);
      break;
    }
    case Kind::fig2:
      j["fig2"] = {{"chain", {{"p10", cfg.fig2.chain.p10}, {"p01", cfg.fig2.chain.p01}}},
                   {"deltas", cfg.fig2.deltas},
                   {"better_window", cfg.fig2.better_window},
                   {"worse_window", cfg.fig2.worse_window},
                   {"mc", {{"samples", cfg.fig2.mc.samples}, {"chunks", cfg.fig2.mc.chunks}}}};
      j["amp"] = amp_to_json(cfg.amp);
      j["system"].erase("delta");
      break;
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig builtin_config(Kind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case Kind::table1:
      cfg.prior = Prior::bernoulli(0.1);
      cfg.sweep = {"theta", {0.11, 0.13, 0.15, 0.17, 0.20}};
      break;
    case Kind::table2:
      cfg.prior = Prior::bernoulli_gaussian(0.1);
      cfg.sweep = {"theta", {0.11, 0.13, 0.15, 0.17, 0.20}};
      break;
    case Kind::fig1:
      cfg.prior = Prior::bernoulli_gaussian(0.1);
      cfg.postulated = Prior::bernoulli_gaussian(0.2);
      break;
    case Kind::amp_validate:
      cfg.cases = {{"bernoulli", Prior::bernoulli(0.1), Prior::bernoulli(0.2)},
                   {"bernoulli_gaussian", Prior::bernoulli_gaussian(0.1),
                    Prior::bernoulli_gaussian(0.2)}};
      break;
    case Kind::fig2:
      cfg.system.sigma_z2 = 0.1;
      cfg.fig2.deltas = {0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55};
      cfg.amp.max_iters = 30;
      cfg.amp.halt_tol = 1e-4;
      break;
    case Kind::custom:
      throw UsageError("custom experiments need a config file");
  }
  return cfg;
}

}  // namespace emse::lab
