#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "sigood/dataio.hpp"
#include "sigood/detector.hpp"
#include "sigood/eval.hpp"
#include "sigood/gnn.hpp"

namespace sigood {

// Config documents are strict: every key must be known, so typos fail loudly
// instead of silently keeping a default.

nlohmann::json load_json_file(const std::filesystem::path& path);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
PretrainConfig pretrain_config_from_json(const nlohmann::json& j);
DetectorConfig detector_config_from_json(const nlohmann::json& j);
DataSourceSpec data_source_from_json(const nlohmann::json& j);
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);

}  // namespace sigood
