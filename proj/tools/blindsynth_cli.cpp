// blindsynth: corpus synthesis, splitting, evaluation and classical baselines.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blindsynth/blindsynth.hpp"

using namespace blindsynth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<BlindnessType> parse_types(const std::vector<std::string>& names) {
    std::vector<BlindnessType> out;
    for (const auto& n : names) {
        const auto t = blindness_type_from_name(n);
        if (!t) throw pipeline::ConfigError("unknown blindness type '" + n + "'");
        out.push_back(*t);
    }
    return out;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json manifest_summary(const pipeline::DatasetManifest& m) {
    json counts = json::object();
    for (BlindnessType t : kAllBlindnessTypes) {
        counts[std::string(name(t))] = {{"train", m.count(t, pipeline::Split::Train)}, {"test", m.count(t, pipeline::Split::Test)}};
    }
    return {{"records", m.records.size()}, {"seed", m.seed}, {"counts", counts}};
}

int error_line(const char* kind, const std::string& message, int code) {
    std::cerr << "error: " << json{{"kind", kind}, {"message", message}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blindness-map corpus synthesis and evaluation"};
    app.require_subcommand(1);

    // synth
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> type_names;
    auto* synth = app.add_subcommand("synth", "Build a degraded corpus and its manifest from a config file");
    synth->add_option("--config", config_path, "Pipeline config JSON")->required();
    synth->add_option("--seed", seed, "Override the config seed");
    synth->add_option("--out", out_dir, "Override output_root");
    synth->add_option("--types", type_names, "Only these types (clear, haze, motion, defocus)")->delimiter(',');

    // split
    std::string manifest_path;
    double ratio = 0.98;
    auto* split = app.add_subcommand("split", "Re-split a manifest per type");
    split->add_option("--manifest", manifest_path)->required();
    split->add_option("--ratio", ratio, "Training fraction in (0,1)")->capture_default_str();
    split->add_option("--seed", seed, "Defaults to the manifest seed");
    split->add_option("--out", out_dir, "Output manifest path (default: in place)");

    // evaluate
    std::string predictions, pr_csv;
    pipeline::EvaluateOptions eval_opt;
    std::optional<double> fps;
    auto* evaluate = app.add_subcommand("evaluate", "Score a predictions directory against the test split");
    evaluate->add_option("--manifest", manifest_path)->required();
    evaluate->add_option("--predictions", predictions)->required();
    evaluate->add_option("--alpha", eval_opt.alpha, "Binarization alpha")->capture_default_str();
    evaluate->add_option("--beta-f", eval_opt.beta_f, "F-measure beta")->capture_default_str();
    evaluate->add_option("--fps", fps, "Throughput to report, measured elsewhere");
    evaluate->add_option("--pr-csv", pr_csv, "Write the pooled PR curve here");
    evaluate->add_option("--out", out_dir, "Write the report JSON here");
    evaluate->add_option("--types", type_names, "Only score these types")->delimiter(',');

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Run and score the dark-channel baseline");
    baseline->add_option("--manifest", manifest_path)->required();
    baseline->add_option("--out", out_dir, "Work directory for predictions and report")->required();

    // bench
    int bench_size = 256;
    int bench_frames = 30;
    auto* bench = app.add_subcommand("bench", "Throughput of the classical estimators plus metrics");
    bench->add_option("--size", bench_size, "Square frame size")->capture_default_str()->check(CLI::Range(16, 4096));
    bench->add_option("--frames", bench_frames, "Frames, the first 5 untimed")->capture_default_str()->check(
        CLI::Range(10, 100000));
    bench->add_option("--seed", seed);

    // estimate
    std::vector<std::string> images;
    haze::HazeParams haze_params;
    auto* estimate = app.add_subcommand("estimate", "Dark-channel haze amount maps for arbitrary images");
    estimate->add_option("images", images, "Input PNGs")->required()->check(CLI::ExistingFile);
    estimate->add_option("--out", out_dir, "Output directory")->required();
    estimate->add_option("--patch", haze_params.patch)->capture_default_str();
    estimate->add_option("--omega", haze_params.omega)->capture_default_str();

    // toy
    synthetic::ToyCorpusSpec toy_spec;
    toy_spec.scene.height = 128;
    toy_spec.scene.width = 192;
    auto* toy = app.add_subcommand("toy", "Write a procedural RGB + sparse depth corpus");
    toy->add_option("--out", out_dir)->required();
    toy->add_option("--sequences", toy_spec.sequences)->capture_default_str()->check(CLI::PositiveNumber);
    toy->add_option("--frames", toy_spec.frames_per_sequence)->capture_default_str()->check(CLI::PositiveNumber);
    toy->add_option("--height", toy_spec.scene.height)->capture_default_str()->check(CLI::Range(8, 4096));
    toy->add_option("--width", toy_spec.scene.width)->capture_default_str()->check(CLI::Range(8, 4096));
    toy->add_option("--seed", toy_spec.scene.seed)->capture_default_str();
    toy->add_flag("--constant-albedo", toy_spec.scene.constant_albedo);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            pipeline::PipelineConfig cfg = pipeline::load_config(config_path);
            if (seed) cfg.seed = *seed;
            if (!out_dir.empty()) cfg.output_root = out_dir;
            if (!type_names.empty()) {
                const auto keep = parse_types(type_names);
                for (auto& [t, n] : cfg.counts) {
                    if (std::find(keep.begin(), keep.end(), t) == keep.end()) n = 0;
                }
            }
            const auto m = pipeline::build_dataset(cfg);
            json s = manifest_summary(m);
            s["manifest"] = (cfg.output_root / pipeline::kManifestFileName).string();
            print(s);
        } else if (*split) {
            const auto m = pipeline::load_manifest(manifest_path);
            if (!(ratio > 0.0 && ratio < 1.0)) throw pipeline::ConfigError("--ratio must be in (0,1)");
            const auto out = pipeline::split_dataset(m, ratio, seed.value_or(m.seed));
            pipeline::save_manifest(out, out_dir.empty() ? fs::path(manifest_path) : fs::path(out_dir));
            print(manifest_summary(out));
        } else if (*evaluate) {
            const auto m = pipeline::load_manifest(manifest_path);
            eval_opt.fps = fps;
            if (!pr_csv.empty()) eval_opt.pr_csv = pr_csv;
            if (!out_dir.empty()) eval_opt.report_json = out_dir;
            eval_opt.types = parse_types(type_names);
            print(json(pipeline::evaluate_run(m, predictions, eval_opt)));
        } else if (*baseline) {
            const auto m = pipeline::load_manifest(manifest_path);
            const auto reports = pipeline::run_baselines(m, out_dir);
            json j = json::object();
            for (const auto& [k, r] : reports) j[k] = r;
            fs::create_directories(out_dir);
            std::ofstream(fs::path(out_dir) / "baselines.json") << j.dump(2) << '\n';
            print(j);
        } else if (*bench) {
            std::vector<std::pair<RasterImage, BlindnessMap>> frames;
            for (int i = 0; i < bench_frames; ++i) {
                const std::uint64_t s = seed.value_or(1) + static_cast<std::uint64_t>(i);
                const auto f = synthetic::render_toy_frame({.height = bench_size, .width = bench_size, .seed = s}, 0);
                const BlindnessMap t = haze::transmission_from_depth(f.depth, 0.04);
                frames.emplace_back(haze::synthesize_haze(f.rgb, t, haze::estimate_atmospheric_light(f.rgb)),
                                    haze::haze_ground_truth(t));
            }
            volatile double sink = 0.0;
            const double dcp_fps = metrics::measure_fps(
                [&](const auto& fr) {
                    sink = sink + metrics::score_image(haze::estimate_haze_amount(fr.first), fr.second).mae;
                },
                frames);
            std::vector<std::pair<const RasterImage*, const RasterImage*>> pairs;
            for (std::size_t i = 0; i < frames.size(); ++i) {
                pairs.emplace_back(&frames[i].first, &frames[(i + 1) % frames.size()].first);
            }
            const double flow_fps = metrics::measure_fps(
                [&](const auto& p) { sink = sink + motion::dense_flow(*p.first, *p.second).values()[0]; }, pairs);
            print({{"size", bench_size},
                   {"frames", bench_frames},
                   {"dcp_plus_metrics_fps", dcp_fps},
                   {"dense_flow_fps", flow_fps}});
        } else if (*estimate) {
            haze_params.validate();
            fs::create_directories(out_dir);
            json written = json::array();
            for (const auto& in : images) {
                RasterImage img = load_image(in);
                if (img.channels() == 1) img = pipeline::detail::as_rgb(img);
                const fs::path out = fs::path(out_dir) / (fs::path(in).stem().string() + "_haze.png");
                save_blindness_map(haze::estimate_haze_amount(img, haze_params), out);
                written.push_back(out.string());
            }
            print({{"written", written}});
        } else if (*toy) {
            const auto [rgb, depth] = synthetic::write_toy_corpus(out_dir, toy_spec);
            print({{"rgb_root", rgb.string()}, {"depth_root", depth.string()}});
        }
    } catch (const pipeline::ConfigError& e) {
        return error_line("config", e.what(), 2);
    } catch (const std::exception& e) {
        return error_line("runtime", e.what(), 1);
    }
    return 0;
}
