#pragma once
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "far/linear.hpp"
#include "far/nonlinear.hpp"
#include "far/tuning.hpp"

namespace far {

nlohmann::json model_to_json(const LinearFarModel& model);
nlohmann::json model_to_json(const NonlinearFarModel& model);

/// Either linear or nonlinear, picked by the "method" field. Fitted blocks
/// are not serialized; loaded models predict but carry empty blocks.
struct LoadedModel {
    std::optional<LinearFarModel> linear;
    std::optional<NonlinearFarModel> nonlinear;
};

LoadedModel model_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const TuningReport& report);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

}  // namespace far
