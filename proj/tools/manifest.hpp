#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rbdsde::cli {

struct ManifestInput {
    std::string subcommand;
    std::string scenario_path;
    std::string scenario_name;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> b_streams;
    std::size_t workers = 1;
    double wall_seconds = 0.0;
    std::filesystem::path directory;
    std::vector<std::string> files;  // relative to directory
};

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes directory/manifest.json.
void write_manifest(const ManifestInput& input);

}  // namespace rbdsde::cli
