#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace toxic {

inline constexpr std::size_t kNumLabels = 6;

// Canonical label order. Metrics, model outputs and files all use it.
inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"};

using LabelVector = std::array<std::uint8_t, kNumLabels>;
using Probabilities = std::array<double, kNumLabels>;

}  // namespace toxic
