// Copyright 2026 The ITCG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITCG_CLI_MANIFEST_HPP
#define ITCG_CLI_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace itcg::cli {

/// Lowercase hex SHA-256 of a file. Throws IoError.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

struct FileDigest {
    std::string path;  // relative to the output root
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string command;
    std::string tool_version;
    nlohmann::json config;
    std::vector<std::uint64_t> seeds;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    double wall_seconds = 0.0;

    /// Hashes root/rel and appends it.
    void add_input(const std::string& root, const std::string& rel);
    void add_output(const std::string& root, const std::string& rel);

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Writes root/stage/manifest.json.
void write_manifest(const std::string& root, const std::string& stage, const RunManifest& m);

/// Reads root/stage/manifest.json. Throws MissingArtifact when absent,
/// Malformed when unreadable.
RunManifest read_manifest(const std::string& root, const std::string& stage);

/// Paths (relative to root) whose current digest differs from the manifest,
/// including missing files.
std::vector<std::string> verify_outputs(const std::string& root, const RunManifest& m);
/// Same for the recorded inputs: non-empty means the stage is stale.
std::vector<std::string> verify_inputs(const std::string& root, const RunManifest& m);

}  // namespace itcg::cli

#endif  // ITCG_CLI_MANIFEST_HPP
