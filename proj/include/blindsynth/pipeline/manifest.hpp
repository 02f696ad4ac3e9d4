#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blindsynth/core/blindness_type.hpp"
#include "blindsynth/core/error.hpp"
#include "blindsynth/core/random.hpp"

namespace blindsynth::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kManifestVersion = "blindsynth-manifest/1 rng=xoshiro256**";

enum class Split { Train, Test };

[[nodiscard]] inline const char* split_name(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

[[nodiscard]] inline Split split_from_name(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + s + "'");
}

/// Paths are stored as written: outputs relative to the manifest directory,
/// inputs absolute.
struct SampleRecord {
    std::string id;
    BlindnessType blindness_type = BlindnessType::NoBlindness;
    std::string clean_path;
    std::string degraded_path;
    std::string gt_map_path;
    std::optional<std::string> aux_mask_path;
    nlohmann::json params = nlohmann::json::object();
    Split split = Split::Train;

    bool operator==(const SampleRecord&) const = default;
};

inline void to_json(nlohmann::json& j, const SampleRecord& r) {
    j = nlohmann::json{{"id", r.id},
                       {"blindness_type", name(r.blindness_type)},
                       {"clean_path", r.clean_path},
                       {"degraded_path", r.degraded_path},
                       {"gt_map_path", r.gt_map_path},
                       {"aux_mask_path", r.aux_mask_path ? nlohmann::json(*r.aux_mask_path) : nlohmann::json()},
                       {"params", r.params},
                       {"split", split_name(r.split)}};
}

inline void from_json(const nlohmann::json& j, SampleRecord& r) {
    j.at("id").get_to(r.id);
    const auto& t = j.at("blindness_type");
    if (t.is_number_integer()) {
        r.blindness_type = blindness_type_from_code(t.get<int>());
    } else {
        auto parsed = blindness_type_from_name(t.get<std::string>());
        if (!parsed) throw std::invalid_argument("unknown blindness_type '" + t.get<std::string>() + "'");
        r.blindness_type = *parsed;
    }
    j.at("clean_path").get_to(r.clean_path);
    j.at("degraded_path").get_to(r.degraded_path);
    j.at("gt_map_path").get_to(r.gt_map_path);
    const auto aux = j.find("aux_mask_path");
    r.aux_mask_path = (aux == j.end() || aux->is_null()) ? std::nullopt : std::optional(aux->get<std::string>());
    r.params = j.value("params", nlohmann::json::object());
    r.split = split_from_name(j.at("split").get<std::string>());
}

struct DatasetManifest {
    std::string version = kManifestVersion;
    std::uint64_t seed = 0;
    std::vector<SampleRecord> records;
    /// Directory relative output paths resolve against. Not serialized.
    fs::path root;

    [[nodiscard]] fs::path resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : root / path;
    }

    [[nodiscard]] std::size_t count(BlindnessType t) const {
        std::size_t n = 0;
        for (const auto& r : records) n += r.blindness_type == t ? 1 : 0;
        return n;
    }

    [[nodiscard]] std::size_t count(BlindnessType t, Split s) const {
        std::size_t n = 0;
        for (const auto& r : records) n += (r.blindness_type == t && r.split == s) ? 1 : 0;
        return n;
    }
};

inline void to_json(nlohmann::json& j, const DatasetManifest& m) {
    j = nlohmann::json{{"version", m.version}, {"seed", m.seed}, {"records", m.records}};
}

inline void from_json(const nlohmann::json& j, DatasetManifest& m) {
    j.at("version").get_to(m.version);
    if (m.version.rfind("blindsynth-manifest/1", 0) != 0) {
        throw std::invalid_argument("unsupported manifest version '" + m.version + "'");
    }
    m.seed = j.value("seed", std::uint64_t{0});
    j.at("records").get_to(m.records);
}

[[nodiscard]] inline std::string manifest_text(const DatasetManifest& m) { return nlohmann::json(m).dump(2) + "\n"; }

inline void save_manifest(const DatasetManifest& m, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UnwritablePathError("cannot write manifest " + path.string());
    os << manifest_text(m);
    if (!os) throw UnwritablePathError("failed writing manifest " + path.string());
}

/// Relative paths in the result resolve against the manifest's directory.
[[nodiscard]] inline DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingFileError("manifest not found: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptStreamError("manifest " + path.string() + ": " + e.what());
    }
    DatasetManifest m = j.get<DatasetManifest>();
    m.root = path.parent_path();
    return m;
}

}  // namespace blindsynth::pipeline
