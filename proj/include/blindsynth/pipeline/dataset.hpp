#pragma once

// Corpus construction: enumerate frames, synthesize each requested sample,
// write images and maps, record everything in the manifest.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "blindsynth/core/png_io.hpp"
#include "blindsynth/core/random.hpp"
#include "blindsynth/defocus.hpp"
#include "blindsynth/haze.hpp"
#include "blindsynth/motion.hpp"
#include "blindsynth/pipeline/config.hpp"
#include "blindsynth/pipeline/manifest.hpp"

namespace blindsynth::pipeline {

using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Sorted PNG frames under a root, relative paths in generic form. A frame's
/// successor is the next frame in the same directory.
class FrameIndex {
public:
    explicit FrameIndex(const fs::path& root) : root_(root) {
        if (!fs::is_directory(root)) throw ConfigError("rgb_root is not a directory: " + root.string());
        for (const auto& e : fs::recursive_directory_iterator(root)) {
            if (!e.is_regular_file()) continue;
            std::string ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (ext == ".png") frames_.push_back(fs::relative(e.path(), root));
        }
        std::sort(frames_.begin(), frames_.end(),
                  [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    }

    [[nodiscard]] std::size_t size() const noexcept { return frames_.size(); }
    [[nodiscard]] const fs::path& relative(std::size_t i) const { return frames_.at(i); }
    [[nodiscard]] fs::path absolute(std::size_t i) const { return fs::absolute(root_ / frames_.at(i)); }

    [[nodiscard]] std::optional<std::size_t> successor(std::size_t i) const {
        if (i + 1 < frames_.size() && frames_[i + 1].parent_path() == frames_[i].parent_path()) return i + 1;
        return std::nullopt;
    }

private:
    fs::path root_;
    std::vector<fs::path> frames_;
};

/// Raised inside sample generation for recoverable data holes.
struct SkipSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-type training count: ratio * n rounded up (toward training).
[[nodiscard]] inline std::size_t train_count(std::size_t n, double ratio) {
    const double exact = ratio * static_cast<double>(n);
    return std::min(n, static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact))));
}

/// Per-type shuffled split. Record order is preserved; only `split` changes.
[[nodiscard]] inline DatasetManifest split_dataset(DatasetManifest manifest, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0,1)");
    if (manifest.records.empty()) throw std::invalid_argument("split_dataset: manifest is empty");
    for (BlindnessType t : kAllBlindnessTypes) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < manifest.records.size(); ++i) {
            if (manifest.records[i].blindness_type == t) idx.push_back(i);
        }
        Xoshiro256 rng(derive_seed({seed, 0x73706c6974ULL, static_cast<std::uint64_t>(code(t) + 1)}));
        rng.shuffle(idx);
        const std::size_t n_train = train_count(idx.size(), ratio);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            manifest.records[idx[k]].split = k < n_train ? Split::Train : Split::Test;
        }
    }
    return manifest;
}

namespace detail {

inline RasterImage as_rgb(const RasterImage& img) {
    if (img.channels() == 3) return img;
    RasterImage out(img.height(), img.width(), 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, 0);
        }
    }
    return out;
}

inline std::string sample_id(BlindnessType t, std::size_t j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%06zu", j);
    return std::string(name(t)) + buf;
}

inline DepthMap load_filled_depth(const PipelineConfig& cfg, const FrameIndex& frames, std::size_t f,
                                  const RasterImage& rgb) {
    const fs::path p = cfg.depth_root / frames.relative(f);
    if (!fs::exists(p)) throw SkipSample("missing depth " + p.string());
    DepthMap sparse = load_depth(p);
    if (sparse.height() != rgb.height() || sparse.width() != rgb.width()) {
        throw SkipSample("depth size differs from frame " + frames.relative(f).generic_string());
    }
    if (sparse.valid_count() == 0) throw SkipSample("depth has no valid pixels " + p.string());
    return fill_depth(sparse);
}

inline nlohmann::json flow_params_json(const motion::FlowParams& f) {
    return {{"pyramid_levels", f.pyramid_levels}, {"pyramid_scale", f.pyramid_scale}, {"window", f.window},
            {"iterations", f.iterations},         {"poly_n", f.poly_n},               {"poly_sigma", f.poly_sigma}};
}

/// Generates one sample; file names are relative to the output root.
inline SampleRecord make_sample(const PipelineConfig& cfg, const FrameIndex& frames, BlindnessType type,
                                std::size_t j) {
    const std::size_t f = j % frames.size();
    Xoshiro256 rng(derive_seed({cfg.seed, static_cast<std::uint64_t>(code(type) + 1), j}));

    SampleRecord r;
    r.id = sample_id(type, j);
    r.blindness_type = type;
    r.clean_path = frames.absolute(f).generic_string();
    const std::string dir(name(type));
    r.degraded_path = dir + "/" + r.id + "_image.png";
    r.gt_map_path = dir + "/" + r.id + "_gt.png";

    const RasterImage clean = as_rgb(load_image(frames.absolute(f)));
    RasterImage degraded;
    BlindnessMap gt;
    std::optional<BinaryMap> mask;

    switch (type) {
        case BlindnessType::NoBlindness:
            degraded = clean;
            gt = BlindnessMap(clean.height(), clean.width());
            break;
        case BlindnessType::Haze: {
            const DepthMap depth = load_filled_depth(cfg, frames, f, clean);
            const double beta = rng.uniform(cfg.haze.beta_atm.lo, cfg.haze.beta_atm.hi);
            const haze::AtmosphericLight light = haze::estimate_atmospheric_light(clean, cfg.haze.patch);
            const BlindnessMap t = haze::transmission_from_depth(depth, beta);
            degraded = haze::synthesize_haze(clean, t, light);
            gt = haze::haze_ground_truth(t);
            r.params = {{"beta_atm", beta}, {"A", light.rgb}, {"patch", cfg.haze.patch}};
            break;
        }
        case BlindnessType::DefocusBlur: {
            const DepthMap depth = load_filled_depth(cfg, frames, f, clean);
            const double q = rng.uniform(cfg.defocus.focus_quantile.lo, cfg.defocus.focus_quantile.hi);
            const double frac = rng.uniform(cfg.defocus.p99_fraction.lo, cfg.defocus.p99_fraction.hi);
            const defocus::CocModel model = defocus::calibrate_coc_model(depth, q, frac, cfg.defocus.max_diameter);
            auto res = defocus::synthesize_defocus(clean, depth, model, cfg.defocus.layers);
            degraded = std::move(res.image);
            gt = std::move(res.ground_truth);
            r.params = {{"d_f", model.focus_depth},    {"kappa", model.kappa},
                        {"D_max", model.max_diameter}, {"layers", cfg.defocus.layers},
                        {"focus_quantile", q},         {"p99_fraction", frac}};
            break;
        }
        case BlindnessType::MotionBlur: {
            const auto next = frames.successor(f);
            if (!next) throw SkipSample("no successor frame for " + frames.relative(f).generic_string());
            const RasterImage f1 = as_rgb(load_image(frames.absolute(*next)));
            if (f1.height() != clean.height() || f1.width() != clean.width()) {
                throw SkipSample("successor size differs for " + frames.relative(f).generic_string());
            }
            auto res = motion::synthesize_motion(clean, f1, cfg.motion.v_max, cfg.motion.flow,
                                                 cfg.motion.mask_threshold);
            degraded = std::move(res.image);
            gt = std::move(res.ground_truth);
            mask = std::move(res.mask);
            r.aux_mask_path = dir + "/" + r.id + "_mask.png";
            r.params = {{"V_max", cfg.motion.v_max},
                        {"mask_threshold", cfg.motion.mask_threshold},
                        {"flow", flow_params_json(cfg.motion.flow)},
                        {"successor_path", frames.absolute(*next).generic_string()}};
            break;
        }
    }

    fs::create_directories(cfg.output_root / dir);
    save_image(degraded, cfg.output_root / r.degraded_path);
    save_blindness_map(gt, cfg.output_root / r.gt_map_path);
    if (mask) save_binary_map(*mask, cfg.output_root / *r.aux_mask_path);
    return r;
}

}  // namespace detail

inline constexpr const char* kManifestFileName = "manifest.json";

/// Builds the corpus under cfg.output_root and writes manifest.json there.
/// Record order is type order (clear, haze, motion, defocus) then sample
/// index; sample j of a type uses frame j mod frame count. Missing depth or
/// successor frames skip that sample with a warning.
[[nodiscard]] inline DatasetManifest build_dataset(const PipelineConfig& cfg, const WarningSink& warn = warn_to_stderr) {
    cfg.validate();
    const FrameIndex frames(cfg.rgb_root);
    if (frames.size() == 0) throw ConfigError("no PNG frames under " + cfg.rgb_root.string());
    fs::create_directories(cfg.output_root);

    DatasetManifest m;
    m.seed = cfg.seed;
    m.root = cfg.output_root;
    for (BlindnessType t : kAllBlindnessTypes) {
        const auto it = cfg.counts.find(t);
        const std::size_t n = it == cfg.counts.end() ? 0 : it->second;
        for (std::size_t j = 0; j < n; ++j) {
            try {
                m.records.push_back(detail::make_sample(cfg, frames, t, j));
            } catch (const SkipSample& e) {
                warn("skipping " + detail::sample_id(t, j) + ": " + e.what());
            } catch (const IoError& e) {
                warn("skipping " + detail::sample_id(t, j) + ": " + e.what());
            }
        }
    }
    if (!m.records.empty()) m = split_dataset(std::move(m), cfg.split_ratio, cfg.seed);
    save_manifest(m, cfg.output_root / kManifestFileName);
    return m;
}

}  // namespace blindsynth::pipeline
