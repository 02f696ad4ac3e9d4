#pragma once

// Evaluation harness: fusion, binarization, per-image scores, aggregate
// report, and throughput measurement.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blindsynth/core/grid.hpp"

namespace blindsynth::metrics {

/// b_final = b_mb * p_mb + b_db * p_db + beta * m, clamped to [0,1].
[[nodiscard]] inline BlindnessMap fuse_maps(const BlindnessMap& b_mb, const BlindnessMap& b_db, double p_mb,
                                            double p_db, const BlindnessMap& mask, double beta_fuse = 0.1) {
    require_same_size(b_mb, b_db, "fuse_maps");
    require_same_size(b_mb, mask, "fuse_maps");
    if (p_mb < 0.0 || p_mb > 1.0 || p_db < 0.0 || p_db > 1.0) {
        throw std::invalid_argument("fuse_maps: probabilities must be in [0,1]");
    }
    BlindnessMap out(b_mb.height(), b_mb.width());
    for (std::size_t i = 0; i < out.values().size(); ++i) {
        out.values()[i] = clamp01(static_cast<double>(b_mb.values()[i]) * p_mb +
                                  static_cast<double>(b_db.values()[i]) * p_db +
                                  beta_fuse * static_cast<double>(mask.values()[i]));
    }
    return out;
}

/// tau = alpha * v_max + (1 - alpha) * v_min over the map.
[[nodiscard]] inline double binarization_threshold(const BlindnessMap& map, double alpha = 0.455) {
    if (map.empty()) throw std::invalid_argument("binarize: empty map");
    const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
    return alpha * static_cast<double>(*hi) + (1.0 - alpha) * static_cast<double>(*lo);
}

/// 1 iff amount > tau. A constant map has tau equal to the constant and so
/// binarizes to all zeros. Evaluated as (v - v_min) > alpha * (v_max - v_min),
/// so exact affine rescalings of the map give bit-identical results.
[[nodiscard]] inline BinaryMap binarize(const BlindnessMap& map, double alpha = 0.455) {
    if (map.empty()) throw std::invalid_argument("binarize: empty map");
    const auto [lo_it, hi_it] = std::minmax_element(map.values().begin(), map.values().end());
    const double lo = *lo_it;
    const double step = alpha * (static_cast<double>(*hi_it) - lo);
    BinaryMap out(map.height(), map.width());
    for (std::size_t i = 0; i < out.values().size(); ++i) {
        out.values()[i] = static_cast<double>(map.values()[i]) - lo > step ? 1 : 0;
    }
    return out;
}

[[nodiscard]] inline BinaryMap complement(const BinaryMap& b) {
    BinaryMap out(b.height(), b.width());
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = b.values()[i] != 0 ? 0 : 1;
    return out;
}

/// Confusion counts with b as prediction and gt as ground truth.
struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

[[nodiscard]] inline Confusion confusion(const BinaryMap& b, const BinaryMap& gt) {
    require_same_size(b, gt, "metrics");
    Confusion c;
    for (std::size_t i = 0; i < b.values().size(); ++i) {
        const bool p = b.values()[i] != 0;
        const bool g = gt.values()[i] != 0;
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

/// (1/N) sum_p (1 - |b_p - gt_p|).
[[nodiscard]] inline double accuracy(const BinaryMap& b, const BinaryMap& gt) {
    const Confusion c = confusion(b, gt);
    if (c.total() == 0) return 1.0;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Mean IoU over the blind and clear classes. A class absent from both maps
/// scores 1.
[[nodiscard]] inline double miou(const BinaryMap& b, const BinaryMap& gt) {
    const Confusion c = confusion(b, gt);
    auto iou = [](std::size_t inter, std::size_t uni) { return uni == 0 ? 1.0 : static_cast<double>(inter) / uni; };
    const double blind = iou(c.tp, c.tp + c.fp + c.fn);
    const double clear = iou(c.tn, c.tn + c.fp + c.fn);
    return 0.5 * (blind + clear);
}

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// Empty prediction: precision 1 if gt is empty too, else 0. Empty gt:
/// recall 1 if the prediction is empty, else 0.
[[nodiscard]] inline PrecisionRecall precision_recall(const Confusion& c) {
    PrecisionRecall pr;
    const std::size_t predicted = c.tp + c.fp;
    const std::size_t positive = c.tp + c.fn;
    pr.precision = predicted == 0 ? (positive == 0 ? 1.0 : 0.0) : static_cast<double>(c.tp) / predicted;
    pr.recall = positive == 0 ? (predicted == 0 ? 1.0 : 0.0) : static_cast<double>(c.tp) / positive;
    return pr;
}

/// F = (1 + beta) * P * R / (beta^2 * P + R), exactly in that form. Equals F1
/// at beta = 1. Both maps empty scores 1; otherwise P + R = 0 scores 0.
[[nodiscard]] inline double f_measure(const BinaryMap& b, const BinaryMap& gt, double beta_f = 1.0) {
    const Confusion c = confusion(b, gt);
    if (c.tp + c.fp == 0 && c.tp + c.fn == 0) return 1.0;
    const PrecisionRecall pr = precision_recall(c);
    const double den = beta_f * beta_f * pr.precision + pr.recall;
    if (den <= 0.0) return 0.0;
    return (1.0 + beta_f) * pr.precision * pr.recall / den;
}

struct ErrorPair {
    double mae = 0.0;
    double mse = 0.0;
};

[[nodiscard]] inline ErrorPair mae_mse(const BlindnessMap& b, const BlindnessMap& gt) {
    require_same_size(b, gt, "mae_mse");
    const std::size_t n = b.values().size();
    if (n == 0) return {};
    double sa = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(b.values()[i]) - static_cast<double>(gt.values()[i]);
        sa += std::abs(e);
        ss += e * e;
    }
    return {sa / n, ss / n};
}

/// Population variance.
[[nodiscard]] inline double accuracy_variance(std::span<const double> per_image) {
    if (per_image.empty()) throw std::invalid_argument("accuracy_variance: empty list");
    // Shifted by the first value: equal inputs give exactly 0.
    const double pivot = per_image.front();
    double m = 0.0;
    for (double v : per_image) m += v - pivot;
    m /= static_cast<double>(per_image.size());
    double s = 0.0;
    for (double v : per_image) s += (v - pivot - m) * (v - pivot - m);
    return s / static_cast<double>(per_image.size());
}

/// Frames per second over the frames after the first `warmup`, which are
/// processed but not timed. Needs at least 10 frames.
template <typename Fn, typename Range>
[[nodiscard]] double measure_fps(Fn&& process, const Range& frames, std::size_t warmup = 5) {
    if (frames.size() < 10) throw std::invalid_argument("measure_fps: need at least 10 frames");
    warmup = std::min(warmup, frames.size() - 1);
    for (std::size_t i = 0; i < warmup; ++i) process(frames[i]);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = warmup; i < frames.size(); ++i) process(frames[i]);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto timed = static_cast<double>(frames.size() - warmup);
    return seconds > 0.0 ? timed / seconds : std::numeric_limits<double>::max();
}

struct EvalReport {
    double accuracy = 0.0;
    double accuracy_variance = 0.0;
    double f_measure = 0.0;
    double miou = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    double fps = 0.0;
    double classification_accuracy = 0.0;
    std::size_t n_samples = 0;
};

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{{"accuracy", r.accuracy},
                       {"accuracy_variance", r.accuracy_variance},
                       {"f_measure", r.f_measure},
                       {"miou", r.miou},
                       {"mae", r.mae},
                       {"mse", r.mse},
                       {"fps", r.fps},
                       {"classification_accuracy", r.classification_accuracy},
                       {"n_samples", r.n_samples}};
}

inline void from_json(const nlohmann::json& j, EvalReport& r) {
    j.at("accuracy").get_to(r.accuracy);
    j.at("accuracy_variance").get_to(r.accuracy_variance);
    j.at("f_measure").get_to(r.f_measure);
    j.at("miou").get_to(r.miou);
    j.at("mae").get_to(r.mae);
    j.at("mse").get_to(r.mse);
    j.at("fps").get_to(r.fps);
    j.at("classification_accuracy").get_to(r.classification_accuracy);
    j.at("n_samples").get_to(r.n_samples);
}

/// Per-image scores for one prediction/ground-truth pair.
struct ImageScore {
    double accuracy = 0.0;
    double miou = 0.0;
    double f_measure = 0.0;
    double mae = 0.0;
    double mse = 0.0;

    /// Scores assigned to a missing prediction.
    static ImageScore worst() { return {0.0, 0.0, 0.0, 1.0, 1.0}; }
};

[[nodiscard]] inline ImageScore score_image(const BlindnessMap& prediction, const BlindnessMap& ground_truth,
                                            double alpha = 0.455, double beta_f = 1.0) {
    const BinaryMap b = binarize(prediction, alpha);
    const BinaryMap g = binarize(ground_truth, alpha);
    const ErrorPair e = mae_mse(prediction, ground_truth);
    return {accuracy(b, g), miou(b, g), f_measure(b, g, beta_f), e.mae, e.mse};
}

/// Running aggregate of per-image scores; summation is in insertion order.
class ReportAccumulator {
public:
    void add(const ImageScore& s) { scores_.push_back(s); }
    void add_classification(bool correct) {
        ++classified_;
        if (correct) ++correct_;
    }

    [[nodiscard]] std::size_t size() const noexcept { return scores_.size(); }

    [[nodiscard]] EvalReport report(double fps) const {
        EvalReport r;
        r.n_samples = scores_.size();
        r.fps = fps;
        r.classification_accuracy = classified_ == 0 ? 0.0 : static_cast<double>(correct_) / classified_;
        if (scores_.empty()) return r;
        std::vector<double> acc;
        acc.reserve(scores_.size());
        for (const auto& s : scores_) {
            acc.push_back(s.accuracy);
            r.miou += s.miou;
            r.f_measure += s.f_measure;
            r.mae += s.mae;
            r.mse += s.mse;
        }
        const auto n = static_cast<double>(scores_.size());
        r.accuracy = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
        r.accuracy_variance = accuracy_variance(acc);
        r.miou /= n;
        r.f_measure /= n;
        r.mae /= n;
        r.mse /= n;
        return r;
    }

private:
    std::vector<ImageScore> scores_;
    std::size_t classified_ = 0;
    std::size_t correct_ = 0;
};

/// Pooled precision/recall at thresholds i/255, i = 0..255 (pixel > threshold
/// counts as blind; ground truth is binarized with the alpha rule).
class PrCurve {
public:
    static constexpr int kThresholds = 256;

    PrCurve() : counts_(kThresholds) {}

    void add(const BlindnessMap& prediction, const BlindnessMap& ground_truth, double alpha = 0.455) {
        require_same_size(prediction, ground_truth, "PrCurve");
        const BinaryMap g = binarize(ground_truth, alpha);
        for (int t = 0; t < kThresholds; ++t) {
            const double thr = static_cast<double>(t) / (kThresholds - 1);
            Confusion& c = counts_[t];
            for (std::size_t i = 0; i < g.values().size(); ++i) {
                const bool p = prediction.values()[i] > thr;
                const bool gt = g.values()[i] != 0;
                if (p && gt) ++c.tp;
                else if (p) ++c.fp;
                else if (gt) ++c.fn;
                else ++c.tn;
            }
        }
    }

    [[nodiscard]] std::vector<PrecisionRecall> points() const {
        std::vector<PrecisionRecall> out;
        out.reserve(kThresholds);
        for (const auto& c : counts_) out.push_back(precision_recall(c));
        return out;
    }

    void write_csv(std::ostream& os) const {
        os << "threshold,precision,recall\n";
        const auto pts = points();
        for (int t = 0; t < kThresholds; ++t) {
            os << static_cast<double>(t) / (kThresholds - 1) << ',' << pts[t].precision << ',' << pts[t].recall
               << '\n';
        }
    }

private:
    std::vector<Confusion> counts_;
};

}  // namespace blindsynth::metrics
