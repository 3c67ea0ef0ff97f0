#ifndef EMSE_SERIALIZATION_HPP
#define EMSE_SERIALIZATION_HPP

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "emse/amp.hpp"
#include "emse/emse_analysis.hpp"
#include "emse/markov_window.hpp"
#include "emse/prior.hpp"

namespace emse {

using json = nlohmann::json;

/// {"type": "bernoulli", "theta": .., "value": ..}
/// {"type": "bernoulli_gaussian", "theta": .., "variance": ..}
/// {"type": "gaussian", "mean": .., "variance": ..}
/// {"type": "mixture", "components": [{"weight": w, "atom": a} |
///                                    {"weight": w, "gaussian": {"mean": m, "variance": v}}]}
json prior_to_json(const Prior& prior);
/// Throws std::invalid_argument on unknown types or missing fields.
Prior prior_from_json(const json& j);

json eval_config_to_json(const MseEvalConfig& cfg);
MseEvalConfig eval_config_from_json(const json& j, MseEvalConfig defaults = {});

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
std::string format_optional(const std::optional<double>& value);

/// Flat object; undefined optional fields are null.
json report_to_json(const EmseReport& report);

/// theta_mismatch,Delta,rel_err_first,rel_err_second_taylor,rel_err_second_sqrt
std::string report_csv_header();
/// Relative errors as fractions; undefined values are written as "n/a".
std::string report_csv_row(double theta_mismatch, const EmseReport& report);

json instance_to_json(const LinearSystemInstance& instance);
json trace_to_json(const AmpTrace& trace);
/// iteration,mse,sigma2_est
void write_trace_csv(std::ostream& os, const AmpTrace& trace);

json fig2_row_to_json(const Fig2Row& row);

}  // namespace emse

#endif  // EMSE_SERIALIZATION_HPP
