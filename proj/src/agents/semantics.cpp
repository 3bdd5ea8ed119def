#include "tae/agents/semantics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "tae/core/utf8.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

namespace {

struct Word {
    std::string text;  // original bytes
    CharRange range;
};

bool ascii_alnum(unsigned char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Splits on ASCII non-alphanumerics; multi-byte code points stay inside words.
std::vector<Word> split_words(const std::string& text) {
    std::vector<Word> words;
    Word current;
    std::size_t cp = 0;
    for (std::size_t i = 0; i < text.size();) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t width = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : 4;
        bool word_char = c >= 0x80 || ascii_alnum(c) || c == '\'';
        if (word_char) {
            if (current.text.empty()) current.range.begin = cp;
            current.text.append(text, i, width);
            current.range.end = cp + 1;
        } else if (!current.text.empty()) {
            words.push_back(std::move(current));
            current = Word{};
        }
        i += width;
        ++cp;
    }
    if (!current.text.empty()) words.push_back(std::move(current));
    return words;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

bool shouted(const std::string& word) {
    int letters = 0;
    for (char c : word) {
        if (c >= 'a' && c <= 'z') return false;
        if (c >= 'A' && c <= 'Z') ++letters;
    }
    return letters >= 2;
}

const std::map<Tone, std::vector<std::string>>& lexicon() {
    static const std::map<Tone, std::vector<std::string>> table = {
        {Tone::Positive,
         {"amazing", "awesome", "beautiful", "best", "congratulations", "delight", "discount", "excellent", "fantastic",
          "free", "great", "happy", "incredible", "love", "perfect", "win", "wonderful", "wow"}},
        {Tone::Negative,
         {"bad", "fail", "failure", "hate", "loss", "lost", "never", "problem", "sad", "sorry", "terrible",
          "unfortunately", "worst", "wrong"}},
        {Tone::Urgent,
         {"alert", "breaking", "deadline", "fast", "hurry", "immediately", "last", "limited", "now", "quick", "today",
          "urgent", "warning"}},
        {Tone::Calm, {"breathe", "calm", "gentle", "peace", "quiet", "relax", "rest", "slowly", "softly"}},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& tone_lexicon(Tone tone) {
    static const std::vector<std::string> empty;
    auto it = lexicon().find(tone);
    return it == lexicon().end() ? empty : it->second;
}

SemanticFeatures analyze_semantics_rules(const std::string& line_text) {
    SemanticFeatures out;
    if (line_text.empty()) return out;

    std::map<Tone, int> hits;
    int total_hits = 0;
    bool any_shout = false;
    for (const Word& w : split_words(line_text)) {
        std::string lower = lower_ascii(w.text);
        bool emphasized = false;
        for (const auto& [tone, words] : lexicon()) {
            if (std::binary_search(words.begin(), words.end(), lower)) {
                ++hits[tone];
                ++total_hits;
                emphasized = true;
            }
        }
        if (shouted(w.text)) {
            any_shout = true;
            emphasized = true;
        }
        if (emphasized) out.emphasis_tokens.push_back(w.range);
    }

    double importance = kLexiconWeight * total_hits;
    if (line_text.find('!') != std::string::npos) importance += kExclamationWeight;
    if (any_shout) importance += kShoutWeight;
    out.importance = std::clamp(importance, 0.0, 1.0);

    int best = 0;
    for (Tone tone : {Tone::Urgent, Tone::Negative, Tone::Positive, Tone::Calm}) {
        if (hits[tone] > best) {
            best = hits[tone];
            out.tone = tone;
        }
    }
    return out;
}

void check_features(const SemanticFeatures& features, std::size_t line_length) {
    if (!std::isfinite(features.importance) || features.importance < 0.0 || features.importance > 1.0) {
        throw Error(ErrorCode::RangeViolation, "importance must lie in [0,1]", {{"importance", features.importance}});
    }
    for (const auto& r : features.emphasis_tokens) {
        if (r.begin > r.end || r.end > line_length) {
            throw Error(ErrorCode::RangeViolation, "emphasis range outside the line",
                        {{"begin", r.begin}, {"end", r.end}, {"length", line_length}});
        }
    }
}

std::string_view preset_for_tone(Tone tone) {
    switch (tone) {
        case Tone::Positive: return "scale_pop";
        case Tone::Urgent: return "bounce";
        case Tone::Negative: return "fade_out";
        case Tone::Calm: return "fade_in";
        case Tone::Neutral: return "typewriter";
    }
    return "typewriter";
}

AnimationDirective map_to_directive(const SemanticFeatures& features) {
    AnimationDirective d;
    d.static_attrs.font_size_scale = 1.0 + 0.5 * features.importance;
    switch (features.tone) {
        case Tone::Positive: d.static_attrs.color = Color{1.0, 0.84, 0.0, 1.0}; break;
        case Tone::Urgent: d.static_attrs.color = Color{1.0, 0.25, 0.2, 1.0}; break;
        case Tone::Negative: d.static_attrs.color = Color{0.6, 0.65, 0.75, 1.0}; break;
        case Tone::Calm:
        case Tone::Neutral: break;
    }
    d.dynamic_attrs.preset_category = std::string(preset_for_tone(features.tone));
    d.dynamic_attrs.velocity_scale = 1.0 + features.importance;
    const PresetSpec* spec = find_preset(d.dynamic_attrs.preset_category);
    switch (spec->phase) {
        case Phase::Enter: d.dynamic_attrs.temporal_pattern = TemporalPattern::OnEntry; break;
        case Phase::Emphasis: d.dynamic_attrs.temporal_pattern = TemporalPattern::Pulsed; break;
        case Phase::Exit: d.dynamic_attrs.temporal_pattern = TemporalPattern::Sustained; break;
    }
    return d;
}

std::string mapping_table_text() {
    std::string out = "tone | preset | text color\n";
    for (Tone tone : {Tone::Neutral, Tone::Positive, Tone::Negative, Tone::Urgent, Tone::Calm}) {
        SemanticFeatures f;
        f.tone = tone;
        AnimationDirective d = map_to_directive(f);
        std::string color = "unchanged";
        if (d.static_attrs.color) {
            const Color& c = *d.static_attrs.color;
            color = json::array({c[0], c[1], c[2], c[3]}).dump();
        }
        out += std::string(kToneNames.name(tone)) + " | " + d.dynamic_attrs.preset_category + " | " + color + "\n";
    }
    out += "importance in [0,1]: font_size_scale = 1 + 0.5*importance; velocity_scale (preset speed) = 1 + importance\n";
    return out;
}

json features_to_json(const SemanticFeatures& features) {
    json tokens = json::array();
    for (const auto& r : features.emphasis_tokens) tokens.push_back({{"begin", r.begin}, {"end", r.end}});
    return {{"importance", features.importance}, {"tone", kToneNames.name(features.tone)}, {"emphasis_tokens", tokens}};
}

json directive_to_json(const AnimationDirective& d) {
    json st = {{"font_size_scale", d.static_attrs.font_size_scale}};
    if (d.static_attrs.color) st["color"] = *d.static_attrs.color;
    if (d.static_attrs.position_hint) st["position_hint"] = {d.static_attrs.position_hint->x, d.static_attrs.position_hint->y};
    return {{"static", st},
            {"dynamic",
             {{"preset_category", d.dynamic_attrs.preset_category},
              {"velocity_scale", d.dynamic_attrs.velocity_scale},
              {"temporal_pattern", kTemporalPatternNames.name(d.dynamic_attrs.temporal_pattern)}}}};
}

}  // namespace tae
