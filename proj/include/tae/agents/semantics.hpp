#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tae/core/project.hpp"

namespace tae {

enum class Tone { Neutral, Positive, Negative, Urgent, Calm };
enum class TemporalPattern { OnEntry, Pulsed, Sustained };

inline constexpr EnumTable<Tone, 5> kToneNames{{{{Tone::Neutral, "neutral"},
                                                 {Tone::Positive, "positive"},
                                                 {Tone::Negative, "negative"},
                                                 {Tone::Urgent, "urgent"},
                                                 {Tone::Calm, "calm"}}}};
inline constexpr EnumTable<TemporalPattern, 3> kTemporalPatternNames{
    {{{TemporalPattern::OnEntry, "on_entry"}, {TemporalPattern::Pulsed, "pulsed"}, {TemporalPattern::Sustained, "sustained"}}}};

/// Half-open code point range [begin, end) within a line.
struct CharRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const CharRange&) const = default;
};

struct SemanticFeatures {
    double importance = 0.0;  // [0,1]
    Tone tone = Tone::Neutral;
    std::vector<CharRange> emphasis_tokens;

    bool operator==(const SemanticFeatures&) const = default;
};

struct StaticDirective {
    double font_size_scale = 1.0;
    std::optional<Color> color;
    std::optional<Point2> position_hint;
    bool operator==(const StaticDirective&) const = default;
};

struct DynamicDirective {
    std::string preset_category;
    double velocity_scale = 1.0;
    TemporalPattern temporal_pattern = TemporalPattern::OnEntry;
    bool operator==(const DynamicDirective&) const = default;
};

struct AnimationDirective {
    StaticDirective static_attrs;
    DynamicDirective dynamic_attrs;
    bool operator==(const AnimationDirective&) const = default;
};

// Lexicon scoring weights.
inline constexpr double kLexiconWeight = 0.2;
inline constexpr double kExclamationWeight = 0.25;
inline constexpr double kShoutWeight = 0.15;

/**
 * @brief Rule-based feature extraction.
 *
 * Words are matched case-insensitively against a fixed tone lexicon.
 * Importance = 0.2 per lexicon hit, +0.25 if the line contains '!',
 * +0.15 if any word of two or more letters is fully upper case, clamped
 * to [0,1]. The tone with the most hits wins; ties go to urgent, then
 * negative, positive, calm. Emphasis tokens are lexicon hits and
 * upper-case words.
 */
SemanticFeatures analyze_semantics_rules(const std::string& line_text);

/// Words that count toward `tone` (lower case).
const std::vector<std::string>& tone_lexicon(Tone tone);

/// Throws RangeViolation for out-of-range importance or token ranges.
void check_features(const SemanticFeatures& features, std::size_t line_length);

/// Pure mapping from features to style and animation directives.
AnimationDirective map_to_directive(const SemanticFeatures& features);

/// Preset chosen for each tone.
std::string_view preset_for_tone(Tone tone);

/// The mapping table rendered as text, included in semantic-matching prompts.
std::string mapping_table_text();

json features_to_json(const SemanticFeatures& features);
json directive_to_json(const AnimationDirective& directive);

}  // namespace tae
