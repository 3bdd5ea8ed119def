#pragma once

#include <optional>
#include <vector>

#include "tae/core/project.hpp"

namespace tae {

struct RenderState {
    ObjectId clip_id;
    double opacity = 1.0;
    Point2 position_offset{0.0, 0.0};
    double scale = 1.0;
    double rotation = 0.0;  // degrees
    double reveal_fraction = 1.0;
    std::optional<TextStyle> effective_style;  // text clips only

    bool operator==(const RenderState&) const = default;
};

/// Raw (un-eased) progress of one animation at time t, clamped to [0,1].
///
/// Enter and emphasis animations run from clip start + delay. Exit
/// animations are anchored to the clip end: they finish `delay` seconds
/// before it.
double animation_progress(const AnimationInstance& anim, const Clip& clip, double t);

/// Render state of one clip; throws OutOfClipRange unless start <= t < end.
RenderState evaluate(const Project& project, const ObjectId& clip, double t);

/// States of every clip active at t, ordered by (track order, start, id).
std::vector<RenderState> snapshot_frame(const Project& project, double t);

json render_state_to_json(const RenderState& state);
/// One export line: {t, states:[...]}.
json frame_to_json(double t, const std::vector<RenderState>& states);

}  // namespace tae
