#pragma once

#include <filesystem>
#include <string>

#include "phslab/gp/gp_phs_model.hpp"

namespace phslab::gp {

/// Self-describing JSON document with hyperparameters (natural units plus
/// structure family and raw parameters), training data, beta, risk and the
/// pinning reference state. Floating point values round-trip exactly.
std::string serialize_model(const GpPhsModel& model);
GpPhsModel deserialize_model(const std::string& text);

void save_model(const std::filesystem::path& path, const GpPhsModel& model);
GpPhsModel load_model(const std::filesystem::path& path);

}  // namespace phslab::gp
