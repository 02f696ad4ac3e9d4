#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "blindsynth/core/blindness_type.hpp"
#include "blindsynth/core/error.hpp"
#include "blindsynth/flow.hpp"

namespace blindsynth::pipeline {

/// Invalid or unreadable pipeline configuration. Fatal for the CLI.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool valid() const noexcept { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
    friend bool operator==(const Range&, const Range&) = default;
};

struct HazeRanges {
    /// 1/m. Applied to metric depth; see README for why this is not [0.5, 2].
    Range beta_atm{0.01, 0.08};
    int patch = 15;
    friend bool operator==(const HazeRanges&, const HazeRanges&) = default;
};

struct DefocusRanges {
    int max_diameter = 31;
    int layers = 16;
    Range focus_quantile{0.2, 0.8};
    Range p99_fraction{0.3, 1.0};
    friend bool operator==(const DefocusRanges&, const DefocusRanges&) = default;
};

struct MotionRanges {
    double v_max = 32.0;
    double mask_threshold = 0.02;
    motion::FlowParams flow{};
    friend bool operator==(const MotionRanges&, const MotionRanges&) = default;
};

struct PipelineConfig {
    std::filesystem::path rgb_root;
    std::filesystem::path depth_root;
    std::filesystem::path output_root;
    std::uint64_t seed = 0;
    double split_ratio = 0.98;
    std::map<BlindnessType, std::size_t> counts{{BlindnessType::NoBlindness, 0},
                                                {BlindnessType::Haze, 0},
                                                {BlindnessType::MotionBlur, 0},
                                                {BlindnessType::DefocusBlur, 0}};
    HazeRanges haze;
    DefocusRanges defocus;
    MotionRanges motion;

    void validate() const {
        if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must be in (0,1)");
        if (rgb_root.empty()) throw ConfigError("rgb_root is required");
        if (output_root.empty()) throw ConfigError("output_root is required");
        if (!haze.beta_atm.valid() || haze.beta_atm.lo <= 0.0) throw ConfigError("haze.beta_atm must be a range > 0");
        if (haze.patch < 1 || haze.patch % 2 == 0) throw ConfigError("haze.patch must be odd");
        if (defocus.max_diameter < 1 || defocus.max_diameter % 2 == 0) {
            throw ConfigError("defocus.max_diameter must be odd and >= 1");
        }
        if (defocus.layers < 2) throw ConfigError("defocus.layers must be >= 2");
        if (!defocus.focus_quantile.valid() || defocus.focus_quantile.lo < 0.0 || defocus.focus_quantile.hi > 1.0) {
            throw ConfigError("defocus.focus_quantile must lie in [0,1]");
        }
        if (!defocus.p99_fraction.valid() || defocus.p99_fraction.lo < 0.0) {
            throw ConfigError("defocus.p99_fraction must be a range >= 0");
        }
        if (!(motion.v_max > 0.0)) throw ConfigError("motion.v_max must be > 0");
        try {
            motion.flow.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("motion.flow: ") + e.what());
        }
    }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Largest-remainder apportionment of `total` samples by weights; ties go to
/// the lower type code.
[[nodiscard]] inline std::map<BlindnessType, std::size_t> apportion(std::size_t total,
                                                                    const std::map<BlindnessType, double>& weights) {
    double sum = 0.0;
    for (const auto& [t, w] : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("proportions must be finite and >= 0");
        sum += w;
    }
    if (!(sum > 0.0)) throw ConfigError("proportions must not all be zero");
    std::map<BlindnessType, std::size_t> out;
    std::vector<std::pair<double, BlindnessType>> rem;
    std::size_t given = 0;
    for (const auto& [t, w] : weights) {
        const double exact = total * w / sum;
        const auto n = static_cast<std::size_t>(std::floor(exact));
        out[t] = n;
        given += n;
        rem.emplace_back(exact - n, t);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; given < total; ++i, ++given) ++out[rem[i % rem.size()].second];
    return out;
}

namespace detail {

inline Range range_from_json(const nlohmann::json& j, const char* key, Range def) {
    const auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_array() || it->size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]");
    Range r{(*it)[0].get<double>(), (*it)[1].get<double>()};
    if (!r.valid()) throw ConfigError(std::string(key) + " must satisfy lo <= hi");
    return r;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [t, n] : c.counts) counts[std::string(name(t))] = n;
    const auto& f = c.motion.flow;
    j = nlohmann::json{
        {"rgb_root", c.rgb_root.generic_string()},
        {"depth_root", c.depth_root.generic_string()},
        {"output_root", c.output_root.generic_string()},
        {"seed", c.seed},
        {"split_ratio", c.split_ratio},
        {"counts", counts},
        {"haze", {{"beta_atm", {c.haze.beta_atm.lo, c.haze.beta_atm.hi}}, {"patch", c.haze.patch}}},
        {"defocus",
         {{"max_diameter", c.defocus.max_diameter},
          {"layers", c.defocus.layers},
          {"focus_quantile", {c.defocus.focus_quantile.lo, c.defocus.focus_quantile.hi}},
          {"p99_fraction", {c.defocus.p99_fraction.lo, c.defocus.p99_fraction.hi}}}},
        {"motion",
         {{"v_max", c.motion.v_max},
          {"mask_threshold", c.motion.mask_threshold},
          {"flow",
           {{"pyramid_levels", f.pyramid_levels},
            {"pyramid_scale", f.pyramid_scale},
            {"window", f.window},
            {"iterations", f.iterations},
            {"poly_n", f.poly_n},
            {"poly_sigma", f.poly_sigma}}}}}};
}

/// Missing keys keep their defaults. Either `counts` or `total` plus
/// `proportions` selects how many samples of each type to make.
inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.rgb_root = j.value("rgb_root", std::string());
    c.depth_root = j.value("depth_root", std::string());
    c.output_root = j.value("output_root", std::string());
    c.seed = j.value("seed", std::uint64_t{0});
    c.split_ratio = j.value("split_ratio", 0.98);

    auto parse_type = [](const std::string& key) {
        const auto t = blindness_type_from_name(key);
        if (!t) throw ConfigError("unknown blindness type '" + key + "'");
        return *t;
    };
    if (j.contains("counts") && j.contains("total")) throw ConfigError("give either counts or total, not both");
    if (const auto it = j.find("counts"); it != j.end()) {
        for (const auto& [k, v] : it->items()) c.counts[parse_type(k)] = v.get<std::size_t>();
    } else if (const auto tt = j.find("total"); tt != j.end()) {
        std::map<BlindnessType, double> w;
        const auto p = j.find("proportions");
        if (p == j.end()) throw ConfigError("total requires proportions");
        for (const auto& [k, v] : p->items()) w[parse_type(k)] = v.get<double>();
        for (const auto& [t, n] : apportion(tt->get<std::size_t>(), w)) c.counts[t] = n;
    }

    if (const auto h = j.find("haze"); h != j.end()) {
        c.haze.beta_atm = detail::range_from_json(*h, "beta_atm", c.haze.beta_atm);
        c.haze.patch = h->value("patch", c.haze.patch);
    }
    if (const auto d = j.find("defocus"); d != j.end()) {
        c.defocus.max_diameter = d->value("max_diameter", c.defocus.max_diameter);
        c.defocus.layers = d->value("layers", c.defocus.layers);
        c.defocus.focus_quantile = detail::range_from_json(*d, "focus_quantile", c.defocus.focus_quantile);
        c.defocus.p99_fraction = detail::range_from_json(*d, "p99_fraction", c.defocus.p99_fraction);
    }
    if (const auto m = j.find("motion"); m != j.end()) {
        c.motion.v_max = m->value("v_max", c.motion.v_max);
        c.motion.mask_threshold = m->value("mask_threshold", c.motion.mask_threshold);
        if (const auto f = m->find("flow"); f != m->end()) {
            auto& p = c.motion.flow;
            p.pyramid_levels = f->value("pyramid_levels", p.pyramid_levels);
            p.pyramid_scale = f->value("pyramid_scale", p.pyramid_scale);
            p.window = f->value("window", p.window);
            p.iterations = f->value("iterations", p.iterations);
            p.poly_n = f->value("poly_n", p.poly_n);
            p.poly_sigma = f->value("poly_sigma", p.poly_sigma);
        }
    }
}

/// Parses and validates; every failure surfaces as ConfigError. Relative
/// roots resolve against the config file's directory.
[[nodiscard]] inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read config " + path.string());
    PipelineConfig c;
    try {
        c = nlohmann::json::parse(is).get<PipelineConfig>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    for (auto* p : {&c.rgb_root, &c.depth_root, &c.output_root}) {
        if (!p->empty() && p->is_relative()) *p = base / *p;
    }
    c.validate();
    return c;
}

}  // namespace blindsynth::pipeline
