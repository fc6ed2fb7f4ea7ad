#pragma once

#include "ocplan/domains.hpp"
#include "ocplan/grounding.hpp"
#include "ocplan/planner.hpp"
#include "ocplan/simworld.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace ocplan::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kScenarioSchema = "ocplan.scenario/1";
inline constexpr const char* kModelSchema = "ocplan.model/1";
inline constexpr const char* kPlanSchema = "ocplan.plan/1";
inline constexpr const char* kValidationSchema = "ocplan.validation/1";

/// File or format failure; the message carries the path.
class IoError : public Error {
public:
    IoError(const std::filesystem::path& path, const std::string& what);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
/// Creates missing parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

json scenario_to_json(const simworld::Scenario& sc);
/// Throws Error on a missing field or a wrong schema string.
simworld::Scenario scenario_from_json(const json& j);

json model_to_json(const grounding::ModelSet& models);
/// Restores a model set; throws grounding::ModelCorruptError on bad content.
grounding::ModelSet model_from_json(const json& j);

json plan_to_json(const Plan& plan);
json validation_to_json(const planner::ValidationReport& v, const domains::ConsistencyReport& c);

/// CSV whose first header field is "schema" and whose rows start with the
/// schema id.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::string schema, std::vector<std::string> columns);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    std::string schema_;
    std::size_t width_;
};

/// Shortest round-trip decimal formatting.
std::string fmt(double v);

}  // namespace ocplan::io
