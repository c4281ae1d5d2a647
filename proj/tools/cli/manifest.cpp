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

#include "manifest.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "itcg/errors.hpp"
#include "itcg/text.hpp"

namespace itcg::cli {

namespace fs = std::filesystem;

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("SHA-256 final failed");
        static constexpr char kHex[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += kHex[md[i] >> 4];
            out += kHex[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

nlohmann::json digests_to_json(const std::vector<FileDigest>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
    return a;
}

std::vector<FileDigest> digests_from_json(const nlohmann::json& a) {
    std::vector<FileDigest> v;
    for (const auto& d : a) v.push_back({d.at("path"), d.at("sha256"), d.at("bytes")});
    return v;
}

FileDigest digest(const std::string& root, const std::string& rel) {
    const std::string p = (fs::path(root) / rel).string();
    return {rel, sha256_file(p), fs::file_size(p)};
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

void RunManifest::add_input(const std::string& root, const std::string& rel) { inputs.push_back(digest(root, rel)); }
void RunManifest::add_output(const std::string& root, const std::string& rel) { outputs.push_back(digest(root, rel)); }

nlohmann::json RunManifest::to_json() const {
    return {{"command", command},
            {"tool_version", tool_version},
            {"config", config},
            {"seeds", seeds},
            {"inputs", digests_to_json(inputs)},
            {"outputs", digests_to_json(outputs)},
            {"wall_seconds", wall_seconds}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command");
    m.tool_version = j.at("tool_version");
    m.config = j.at("config");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.inputs = digests_from_json(j.at("inputs"));
    m.outputs = digests_from_json(j.at("outputs"));
    m.wall_seconds = j.at("wall_seconds");
    return m;
}

void write_manifest(const std::string& root, const std::string& stage, const RunManifest& m) {
    text::write_file((fs::path(root) / stage / kManifestName).string(), m.to_json().dump(2) + "\n");
}

RunManifest read_manifest(const std::string& root, const std::string& stage) {
    const fs::path p = fs::path(root) / stage / kManifestName;
    if (!fs::exists(p)) throw MissingArtifact("no " + stage + " manifest at " + p.string() + "; run '" + (stage == "model" ? std::string("train") : stage) + "' first");
    try {
        return RunManifest::from_json(nlohmann::json::parse(text::read_file(p.string())));
    } catch (const nlohmann::json::exception& e) {
        throw Malformed(p.string() + ": " + e.what());
    }
}

namespace {

std::vector<std::string> changed(const std::string& root, const std::vector<FileDigest>& files) {
    std::vector<std::string> bad;
    for (const auto& d : files) {
        const fs::path p = fs::path(root) / d.path;
        if (!fs::exists(p) || fs::file_size(p) != d.bytes || sha256_file(p.string()) != d.sha256) bad.push_back(d.path);
    }
    return bad;
}

}  // namespace

std::vector<std::string> verify_outputs(const std::string& root, const RunManifest& m) { return changed(root, m.outputs); }
std::vector<std::string> verify_inputs(const std::string& root, const RunManifest& m) { return changed(root, m.inputs); }

}  // namespace itcg::cli
