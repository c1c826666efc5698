#pragma once

#include "quditls/config.hpp"
#include "quditls/entangle.hpp"
#include "quditls/measure.hpp"
#include "quditls/noise.hpp"

#include <json.hpp>

#include <string>

namespace quditls {
namespace report {

using json = nlohmann::json;

/// Reports are schema-versioned and embed the fully resolved config.
constexpr int kSchemaVersion = 1;

json complex_to_json(Complex z);
json matrix_to_json(const CMat& m);
json real_matrix_to_json(const Eigen::MatrixXd& m);

json config_to_json(const config::ExperimentConfig& cfg);
json params_to_json(const lightshift::LightShiftParams& p);
json entanglement_to_json(const entangle::EntanglementReport& rep);
json decay_fit_to_json(const measure::DecayFit& fit);
json budget_to_json(const noise::BudgetTable& table, const std::vector<int>& dims);
json state_estimate_to_json(const measure::StateEstimate& est);

std::string budget_to_csv(const noise::BudgetTable& table, const std::vector<int>& dims);

/// Canonical serialization: sorted keys, 2-space indent, trailing newline.
std::string dump(const json& j);

void write_text(const std::string& path, const std::string& text);

/// One-line machine-parsable error record.
std::string error_record(int code, const std::string& stage, const std::string& message);

}  // namespace report
}  // namespace quditls
