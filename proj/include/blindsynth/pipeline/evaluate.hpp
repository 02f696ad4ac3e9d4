#pragma once

// Scoring a predictions directory against a manifest's test split, and the
// classical dark-channel baseline scored through the same path.
//
// Predictions layout, keyed by record id:
//   <id>.png                              one map, scored as is
//   <id>_haze.png, <id>_motion.png, <id>_defocus.png
//                                         per-head maps; the head of the
//                                         predicted type is scored
//   probabilities.json                    {id: [p_haze, p_motion, p_defocus]}

#include <algorithm>
#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blindsynth/core/png_io.hpp"
#include "blindsynth/core/resize.hpp"
#include "blindsynth/haze.hpp"
#include "blindsynth/metrics.hpp"
#include "blindsynth/pipeline/dataset.hpp"
#include "blindsynth/pipeline/manifest.hpp"

namespace blindsynth::pipeline {

inline constexpr const char* kProbabilitiesFileName = "probabilities.json";

/// Type probabilities in head order (haze, motion, defocus).
using TypeProbabilities = std::array<double, 3>;

/// Argmax over the heads; below `none_below` on every head means no blindness.
[[nodiscard]] inline BlindnessType predicted_type(const TypeProbabilities& p, double none_below = 0.5) {
    const auto it = std::max_element(p.begin(), p.end());
    if (*it < none_below) return BlindnessType::NoBlindness;
    return blindness_type_from_code(static_cast<int>(it - p.begin()));
}

[[nodiscard]] inline std::map<std::string, TypeProbabilities> load_probabilities(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingFileError("probabilities not found: " + path.string());
    std::map<std::string, TypeProbabilities> out;
    try {
        const auto j = nlohmann::json::parse(is);
        for (const auto& [id, v] : j.items()) {
            if (!v.is_array() || v.size() != 3) throw CorruptStreamError("probabilities for '" + id + "' must be [3]");
            TypeProbabilities p{};
            for (int k = 0; k < 3; ++k) {
                p[k] = v[k].get<double>();
                if (!(p[k] >= 0.0 && p[k] <= 1.0)) throw CorruptStreamError("probability out of [0,1] for '" + id + "'");
            }
            out[id] = p;
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptStreamError("probabilities " + path.string() + ": " + e.what());
    }
    return out;
}

struct EvaluateOptions {
    double alpha = 0.455;
    double beta_f = 1.0;
    /// Reported as is when set; otherwise the scoring loop's own rate.
    std::optional<double> fps;
    std::optional<fs::path> pr_csv;
    std::optional<fs::path> report_json;
    /// Restricts scoring to these types (all when empty).
    std::vector<BlindnessType> types;
    WarningSink warn = warn_to_stderr;
};

namespace detail {

inline std::optional<BlindnessMap> find_prediction(const fs::path& root, const std::string& id, BlindnessType type) {
    const fs::path single = root / (id + ".png");
    if (fs::exists(single)) return load_blindness_map(single);
    if (type == BlindnessType::NoBlindness) {
        // No per-head map stands for "clear"; an existing head map marks the
        // prediction as present and is replaced by zeros.
        for (const char* head : {"haze", "motion", "defocus"}) {
            const fs::path p = root / (id + "_" + head + ".png");
            if (fs::exists(p)) {
                const BlindnessMap m = load_blindness_map(p);
                return BlindnessMap(m.height(), m.width());
            }
        }
        return std::nullopt;
    }
    const fs::path p = root / (id + "_" + std::string(name(type)) + ".png");
    if (fs::exists(p)) return load_blindness_map(p);
    return std::nullopt;
}

}  // namespace detail

/// Scores every test record (optionally filtered by type). Missing predictions
/// are reported through the warning sink and scored as worst case.
[[nodiscard]] inline metrics::EvalReport evaluate_run(const DatasetManifest& manifest, const fs::path& predictions_root,
                                                      const EvaluateOptions& opt = {}) {
    std::map<std::string, TypeProbabilities> probs;
    if (const fs::path pp = predictions_root / kProbabilitiesFileName; fs::exists(pp)) probs = load_probabilities(pp);

    metrics::ReportAccumulator acc;
    metrics::PrCurve curve;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& r : manifest.records) {
        if (r.split != Split::Test) continue;
        if (!opt.types.empty() && std::find(opt.types.begin(), opt.types.end(), r.blindness_type) == opt.types.end()) {
            continue;
        }
        const BlindnessMap gt = load_blindness_map(manifest.resolve(r.gt_map_path));
        BlindnessType head = r.blindness_type;
        if (const auto it = probs.find(r.id); it != probs.end()) {
            head = predicted_type(it->second);
            acc.add_classification(head == r.blindness_type);
        }
        auto pred = detail::find_prediction(predictions_root, r.id, head);
        if (!pred) {
            opt.warn("missing prediction for " + r.id);
            acc.add(metrics::ImageScore::worst());
            continue;
        }
        if (pred->height() != gt.height() || pred->width() != gt.width()) {
            *pred = resize_bilinear(*pred, gt.height(), gt.width());
        }
        acc.add(metrics::score_image(*pred, gt, opt.alpha, opt.beta_f));
        if (opt.pr_csv) curve.add(*pred, gt, opt.alpha);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (acc.size() == 0) throw std::invalid_argument("evaluate_run: no test records to score");
    const double fps = opt.fps ? *opt.fps : static_cast<double>(acc.size()) / std::max(seconds, 1e-9);
    const metrics::EvalReport report = acc.report(fps);

    if (opt.pr_csv) {
        std::ofstream os(*opt.pr_csv);
        if (!os) throw UnwritablePathError("cannot write " + opt.pr_csv->string());
        curve.write_csv(os);
    }
    if (opt.report_json) {
        std::ofstream os(*opt.report_json);
        if (!os) throw UnwritablePathError("cannot write " + opt.report_json->string());
        os << nlohmann::json(report).dump(2) << '\n';
    }
    return report;
}

/// Dark-channel baseline on the haze and clear test records. Predictions are
/// written under work_dir/dcp and scored by evaluate_run; fps comes from
/// measure_fps over the same images (cycled up to at least 15 frames).
[[nodiscard]] inline std::map<std::string, metrics::EvalReport> run_baselines(const DatasetManifest& manifest,
                                                                               const fs::path& work_dir,
                                                                               const haze::HazeParams& params = {},
                                                                               const WarningSink& warn = warn_to_stderr) {
    const std::vector<BlindnessType> types{BlindnessType::Haze, BlindnessType::NoBlindness};
    const fs::path out = work_dir / "dcp";
    fs::create_directories(out);
    std::vector<RasterImage> images;
    for (const auto& r : manifest.records) {
        if (r.split != Split::Test || std::find(types.begin(), types.end(), r.blindness_type) == types.end()) continue;
        RasterImage img = detail::as_rgb(load_image(manifest.resolve(r.degraded_path)));
        save_blindness_map(haze::estimate_haze_amount(img, params), out / (r.id + ".png"));
        images.push_back(std::move(img));
    }
    if (images.empty()) throw std::invalid_argument("run_baselines: no haze or clear records in the test split");

    std::vector<const RasterImage*> frames;
    while (frames.size() < 15) {
        for (const auto& img : images) frames.push_back(&img);
    }
    volatile float sink = 0.0f;
    const double fps = metrics::measure_fps(
        [&](const RasterImage* img) { sink = sink + haze::estimate_haze_amount(*img, params).values()[0]; }, frames);

    EvaluateOptions opt;
    opt.types = types;
    opt.fps = fps;
    opt.warn = warn;
    return {{"dcp", evaluate_run(manifest, out, opt)}};
}

}  // namespace blindsynth::pipeline
