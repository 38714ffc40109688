#include "emomix/emotion.hpp"

namespace emomix {

std::string_view emotion_name(Emotion e) {
    return kEmotionNames[static_cast<int>(e)];
}

std::optional<Emotion> emotion_from_name(std::string_view name) {
    for (int i = 0; i < kNumEmotions; ++i) {
        if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
    }
    return std::nullopt;
}

std::optional<Emotion> emotion_from_code(int code) {
    if (code < 0 || code >= kNumEmotions) return std::nullopt;
    return static_cast<Emotion>(code);
}

}  // namespace emomix
