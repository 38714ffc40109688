#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace emomix {

// Six-class emotion labels with fixed integer codes.
enum class Emotion : int {
    happiness = 0,
    sadness = 1,
    anger = 2,
    fear = 3,
    disgust = 4,
    surprise = 5,
};

inline constexpr int kNumEmotions = 6;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "happiness", "sadness", "anger", "fear", "disgust", "surprise"};

std::string_view emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(std::string_view name);
std::optional<Emotion> emotion_from_code(int code);

}  // namespace emomix
