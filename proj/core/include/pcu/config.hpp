#pragma once

#include <filesystem>
#include <string>

#include "pcu/training.hpp"

namespace pcu::io {

// Everything a CLI run needs: training/network/loss settings plus paths.
// Files are a flat TOML-compatible subset: `key = value` lines, '#' comments,
// quoted strings, booleans, numbers, and [a, b, c] number arrays. Unknown
// keys are fatal.
struct RunConfig {
    train::TrainConfig train;
    std::string dataset_dir;
    std::string output_dir;
    std::string checkpoint_path;
};

RunConfig parse_config_text(const std::string& text);
RunConfig read_config(const std::filesystem::path& path);

// Canonical serialization: every key in a fixed order, shortest
// round-trippable decimals. parse(serialize(c)) == c, byte for byte.
std::string serialize_config(const RunConfig& cfg);

}  // namespace pcu::io
