#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blindsynth {

/// Integer codes are fixed: -1 none, 0 haze, 1 motion blur, 2 defocus blur.
enum class BlindnessType : int {
    NoBlindness = -1,
    Haze = 0,
    MotionBlur = 1,
    DefocusBlur = 2,
};

inline constexpr std::array<BlindnessType, 4> kAllBlindnessTypes = {
    BlindnessType::NoBlindness, BlindnessType::Haze, BlindnessType::MotionBlur, BlindnessType::DefocusBlur};

[[nodiscard]] constexpr int code(BlindnessType t) noexcept { return static_cast<int>(t); }

[[nodiscard]] inline BlindnessType blindness_type_from_code(int c) {
    if (c < -1 || c > 2) throw std::invalid_argument("blindness type code out of range: " + std::to_string(c));
    return static_cast<BlindnessType>(c);
}

[[nodiscard]] constexpr std::string_view name(BlindnessType t) noexcept {
    switch (t) {
        case BlindnessType::NoBlindness: return "clear";
        case BlindnessType::Haze: return "haze";
        case BlindnessType::MotionBlur: return "motion";
        case BlindnessType::DefocusBlur: return "defocus";
    }
    return "clear";
}

[[nodiscard]] inline std::optional<BlindnessType> blindness_type_from_name(std::string_view s) {
    for (BlindnessType t : kAllBlindnessTypes) {
        if (name(t) == s) return t;
    }
    return std::nullopt;
}

}  // namespace blindsynth
