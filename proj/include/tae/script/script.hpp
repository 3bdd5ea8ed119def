#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tae/core/project.hpp"

namespace tae {

struct ScriptLine {
    ObjectId clip_id;
    std::string text;
    TextStyle style;
    std::vector<ObjectId> suggestion_markers;

    bool operator==(const ScriptLine&) const = default;
};

struct ScriptDocument {
    std::int64_t revision = 0;
    std::vector<ObjectId> selected_tracks;  // sorted
    std::vector<ScriptLine> lines;

    bool operator==(const ScriptDocument&) const = default;
};

/**
 * @brief Projects the text clips of the selected tracks into script lines.
 *
 * Lines are sorted by (start, track order_index, clip id). Throws
 * UnknownTrack or NonTextTrack.
 */
ScriptDocument project_script(const Project& project, const std::vector<ObjectId>& selected_tracks);

/// Text tracks whose script_visible flag is set, sorted by id.
std::vector<ObjectId> visible_text_tracks(const Project& project);

json script_to_json(const ScriptDocument& doc);

enum class PlacementStrategy { SequentialSameTrack, ParallelAdjustedTiming, ParallelNewTrack };

inline constexpr EnumTable<PlacementStrategy, 3> kPlacementStrategyNames{
    {{{PlacementStrategy::SequentialSameTrack, "sequential_same_track"},
      {PlacementStrategy::ParallelAdjustedTiming, "parallel_adjusted_timing"},
      {PlacementStrategy::ParallelNewTrack, "parallel_new_track"}}}};

/// Where a new clip goes. An empty track_id means "create a new text track".
struct PlacementDecision {
    PlacementStrategy strategy = PlacementStrategy::SequentialSameTrack;
    ObjectId track_id;
    TimeMs start;

    bool operator==(const PlacementDecision&) const = default;
};

enum class AnchorPosition { Before, After, End };

/// Insert position relative to a line of the current projection.
struct LineAnchor {
    AnchorPosition position = AnchorPosition::End;
    std::size_t line_index = 0;  // ignored for End
};

inline constexpr TimeMs kDefaultLineDuration{2000};

/// The line an anchor refers to (the last line for End), if any. Throws InvalidAnchor.
std::optional<ScriptLine> anchor_line(const ScriptDocument& doc, const LineAnchor& anchor);

/**
 * @brief Concrete track and start for a strategy at an anchor.
 *
 * Sequential placement starts at the anchor's end (or at its start when
 * inserting before it). Parallel placements start with the anchor;
 * adjusted timing targets `preferred_track` or the nearest other visible
 * text track, falling back to a new track when there is none.
 */
PlacementDecision resolve_placement(const Project& project, const ScriptDocument& doc, const LineAnchor& anchor,
                                    PlacementStrategy strategy,
                                    const std::optional<ObjectId>& preferred_track = std::nullopt);

struct AddLineResult {
    Clip clip;
    PlacementDecision placement;
    std::optional<Track> created_track;
    std::vector<ObjectId> shifted;  // clips rippled right, in start order
    TimeMs shift;
};

// Script operations. Each is a single committed mutation unless noted.

void apply_text_edit(Project& project, const ObjectId& clip, std::string text);

/// Splits at a code point offset; durations follow the character counts.
std::pair<Clip, Clip> split_line(Project& project, const ObjectId& clip, std::size_t char_offset);

/// Duration of the first part for a proportional split, rounded to 1 ms.
TimeMs proportional_first_duration(TimeMs duration, std::size_t first_chars, std::size_t total_chars);

Clip merge_lines(Project& project, const ObjectId& a, const ObjectId& b);

/// Inserts a new text clip at `placement`, rippling conflicting clips right.
AddLineResult add_line(Project& project, const ScriptDocument& doc, const LineAnchor& anchor, std::string text,
                       const PlacementDecision& placement, TimeMs duration = kDefaultLineDuration);

/// Applies `delta` to lines [begin, begin+count); one commit per line.
std::size_t apply_style_batch(Project& project, const ScriptDocument& doc, std::size_t begin, std::size_t count,
                              const TextStyleDelta& delta);

/// Makes exactly `track_ids` script-visible and returns the new projection.
ScriptDocument set_script_tracks(Project& project, const std::vector<ObjectId>& track_ids);

/**
 * @brief Script model kept in step with the project by incremental patches.
 *
 * Each operation mutates the project and then patches the held document
 * from the operation's result instead of re-projecting, so comparing
 * document() with project_script() checks synchronization.
 */
class ScriptEditor {
public:
    explicit ScriptEditor(Project& project);

    [[nodiscard]] const ScriptDocument& document() const { return doc_; }

    void apply_text_edit(const ObjectId& clip, std::string text);
    std::pair<Clip, Clip> split_line(const ObjectId& clip, std::size_t char_offset);
    Clip merge_lines(const ObjectId& a, const ObjectId& b);
    AddLineResult add_line(const LineAnchor& anchor, std::string text, const PlacementDecision& placement);
    std::size_t apply_style_batch(std::size_t begin, std::size_t count, const TextStyleDelta& delta);
    const ScriptDocument& set_tracks(const std::vector<ObjectId>& track_ids);

private:
    struct LineKey {
        TimeMs start;
        std::int64_t track_order = 0;
    };

    std::size_t index_of(const ObjectId& clip) const;
    void remember(const Clip& clip);
    void sort_lines();
    bool selected(const ObjectId& track) const;

    Project& project_;
    ScriptDocument doc_;
    std::unordered_map<ObjectId, LineKey> keys_;
};

}  // namespace tae
