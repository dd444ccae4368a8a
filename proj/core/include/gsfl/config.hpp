#pragma once

#include <cstdint>
#include <string>

#include "gsfl/schemes.hpp"

namespace gsfl {

// Reads the flat JSON experiment config. Unknown keys are rejected; missing
// keys take the documented defaults. The seed priority is: "seed" key, then
// the GSFL_SEED environment variable, then 42.
ExperimentConfig parse_config(const std::string& path);

// Same, from an in-memory JSON document.
ExperimentConfig parse_config_text(const std::string& text);

// FNV-1a 64 over the canonicalized (parsed and re-serialized with sorted
// keys, no whitespace) config text; stable across platforms.
std::string config_hash(const std::string& config_text);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string started_at;  // UTC, ISO 8601
    std::string config_path;
    std::string output_csv;
};

RunManifest make_manifest(const std::string& config_path, const std::string& config_text,
                          const ExperimentConfig& cfg, const std::string& output_csv);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace gsfl
