#include "emse/serialization.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace emse {
namespace {

double required_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("prior field '") + key + "' missing or not a number");
  }
  return j.at(key).get<double>();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json prior_to_json(const Prior& prior) {
  struct Visitor {
    json operator()(const BernoulliPointMass& b) const {
      return {{"type", "bernoulli"}, {"theta", b.theta}, {"value", b.value}};
    }
    json operator()(const BernoulliGaussian& b) const {
      return {{"type", "bernoulli_gaussian"}, {"theta", b.theta}, {"variance", b.variance}};
    }
    json operator()(const Gaussian& g) const {
      return {{"type", "gaussian"}, {"mean", g.mean}, {"variance", g.variance}};
    }
    json operator()(const FiniteMixture& m) const {
      json comps = json::array();
      for (const auto& c : m.components) {
        if (c.is_atom()) {
          comps.push_back({{"weight", c.weight}, {"atom", c.mean}});
        } else {
          comps.push_back(
              {{"weight", c.weight}, {"gaussian", {{"mean", c.mean}, {"variance", c.variance}}}});
        }
      }
      return {{"type", "mixture"}, {"components", comps}};
    }
  };
  return std::visit(Visitor{}, prior.spec());
}

Prior prior_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw std::invalid_argument("prior must be an object with a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "bernoulli") {
    return Prior::bernoulli(required_number(j, "theta"), j.value("value", 1.0));
  }
  if (type == "bernoulli_gaussian") {
    return Prior::bernoulli_gaussian(required_number(j, "theta"), j.value("variance", 1.0));
  }
  if (type == "gaussian") {
    return Prior::gaussian(required_number(j, "mean"), required_number(j, "variance"));
  }
  if (type == "mixture") {
    if (!j.contains("components") || !j.at("components").is_array()) {
      throw std::invalid_argument("mixture prior needs a 'components' array");
    }
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
      MixtureComponent mc;
      mc.weight = required_number(c, "weight");
      if (c.contains("atom")) {
        mc.mean = required_number(c, "atom");
      } else if (c.contains("gaussian")) {
        const auto& g = c.at("gaussian");
        mc.mean = required_number(g, "mean");
        mc.variance = required_number(g, "variance");
        if (!(mc.variance > 0.0)) {
          throw std::invalid_argument("mixture Gaussian variance must be positive");
        }
      } else {
        throw std::invalid_argument("mixture component needs 'atom' or 'gaussian'");
      }
      comps.push_back(mc);
    }
    return Prior::mixture(std::move(comps));
  }
  throw std::invalid_argument("unknown prior type '" + type + "'");
}

json eval_config_to_json(const MseEvalConfig& cfg) {
  return {{"quadrature", cfg.quadrature == QuadratureMethod::adaptive ? "adaptive" : "gauss_hermite"},
          {"quadrature_order", cfg.quadrature_order},
          {"quadrature_tol", cfg.quadrature_tol},
          {"mc_samples", cfg.mc_samples},
          {"seed", cfg.seed},
          {"derivative_step", cfg.derivative_step}};
}

MseEvalConfig eval_config_from_json(const json& j, MseEvalConfig defaults) {
  MseEvalConfig cfg = defaults;
  if (!j.is_object()) return cfg;
  if (j.contains("quadrature")) {
    const auto method = j.at("quadrature").get<std::string>();
    if (method == "adaptive") {
      cfg.quadrature = QuadratureMethod::adaptive;
    } else if (method == "gauss_hermite") {
      cfg.quadrature = QuadratureMethod::gauss_hermite;
    } else {
      throw std::invalid_argument("unknown quadrature method '" + method + "'");
    }
  }
  cfg.quadrature_order = j.value("quadrature_order", cfg.quadrature_order);
  cfg.quadrature_tol = j.value("quadrature_tol", cfg.quadrature_tol);
  cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.derivative_step = j.value("derivative_step", cfg.derivative_step);
  cfg.validate();
  return cfg;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : "n/a";
}

json report_to_json(const EmseReport& r) {
  return {{"delta", r.delta},
          {"sigma_z2", r.sigma_z2},
          {"sigma_p2", r.sigma_p2},
          {"sigma_q2", r.sigma_q2},
          {"Delta", r.Delta},
          {"emse_s", r.emse_s},
          {"emse_l_exact", r.emse_l_exact},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"alpha_error", r.alpha_error},
          {"beta_error", r.beta_error},
          {"beta_positive", r.beta_positive},
          {"amplification", r.delta > r.alpha ? json(r.amplification()) : json(nullptr)},
          {"approx_first", optional_json(r.approx_first)},
          {"approx_second_taylor", optional_json(r.approx_second_taylor)},
          {"approx_second_sqrt", optional_json(r.approx_second_sqrt)},
          {"rel_err_first", optional_json(r.rel_err_first)},
          {"rel_err_second_taylor", optional_json(r.rel_err_second_taylor)},
          {"rel_err_second_sqrt", optional_json(r.rel_err_second_sqrt)},
          {"approximation_note", r.approximation_note},
          {"identity_residual", r.identity_residual}};
}

std::string report_csv_header() { return "theta_mismatch,Delta,rel_err_first,rel_err_second_taylor,rel_err_second_sqrt"; }

std::string report_csv_row(double theta_mismatch, const EmseReport& r) {
  return format_double(theta_mismatch) + "," + format_double(r.Delta) + "," +
         format_optional(r.rel_err_first) + "," + format_optional(r.rel_err_second_taylor) + "," +
         format_optional(r.rel_err_second_sqrt);
}

json instance_to_json(const LinearSystemInstance& inst) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < inst.matrix.rows(); ++i) {
    rows.push_back(std::vector<double>(inst.matrix.row(i).begin(), inst.matrix.row(i).end()));
  }
  return {{"n", inst.n},
          {"m", inst.m},
          {"sigma_z2", inst.sigma_z2},
          {"seed", inst.seed},
          {"matrix", rows},
          {"x_true", std::vector<double>(inst.x_true.begin(), inst.x_true.end())},
          {"y", std::vector<double>(inst.y.begin(), inst.y.end())}};
}

json trace_to_json(const AmpTrace& trace) {
  return {{"mse", trace.mse},
          {"sigma2_est", trace.sigma2_est},
          {"converged", trace.converged},
          {"estimate", std::vector<double>(trace.estimate.begin(), trace.estimate.end())}};
}

void write_trace_csv(std::ostream& os, const AmpTrace& trace) {
  os << "iteration,mse,sigma2_est\n";
  for (std::size_t t = 0; t < trace.mse.size(); ++t) {
    os << t + 1 << ',' << format_double(trace.mse[t]) << ','
       << format_double(trace.sigma2_est[t]) << '\n';
  }
}

json fig2_row_to_json(const Fig2Row& row) {
  return {{"delta", row.delta},
          {"sigma2_of_delta", row.sigma2_of_delta},
          {"mse_x3", row.mse_x3},
          {"mse_x2_scalar", row.mse_x2_scalar},
          {"emse_s", row.emse_s},
          {"emse_s_stderr", row.emse_s_stderr},
          {"alpha", row.alpha},
          {"beta", row.beta},
          {"predicted_emse_l", row.predicted_emse_l},
          {"predicted_mse_x2_amp", row.predicted_mse_x2_amp}};
}

}  // namespace emse
