#include "tae/timeline/evaluate.hpp"

#include <algorithm>
#include <tuple>

#include "tae/core/serialize.hpp"
#include "tae/timeline/easing.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

namespace {

double param_number(const json& params, const char* key, double fallback) {
    auto it = params.find(key);
    return it != params.end() && it->is_number() ? it->get<double>() : fallback;
}

template <class E, std::size_t N>
E param_enum(const json& params, const char* key, const EnumTable<E, N>& table, E fallback) {
    auto it = params.find(key);
    if (it == params.end() || !it->is_string()) return fallback;
    return table.parse(it->get<std::string>()).value_or(fallback);
}

bool active_at(const Clip& clip, double t) { return clip.start.seconds() <= t && t < clip.end().seconds(); }

}  // namespace

double animation_progress(const AnimationInstance& anim, const Clip& clip, double t) {
    double duration = param_number(anim.params, "duration", 0.5);
    double delay = param_number(anim.params, "delay", 0.0);
    double speed = param_number(anim.params, "speed", 1.0);
    double window_start = clip.start.seconds() + delay;
    if (anim.phase == Phase::Exit) window_start = clip.end().seconds() - delay - duration / speed;
    return std::clamp((t - window_start) * speed / duration, 0.0, 1.0);
}

RenderState evaluate(const Project& project, const ObjectId& clip_id, double t) {
    const Clip& clip = project.clip(clip_id);
    if (!active_at(clip, t)) {
        throw Error(ErrorCode::OutOfClipRange, "time outside clip",
                    {{"id", clip_id.value}, {"t", t}, {"start", clip.start.seconds()}, {"end", clip.end().seconds()}});
    }

    RenderState state;
    state.clip_id = clip_id;
    double whiten = 0.0;
    if (const auto* text = clip.text()) state.effective_style = text->style;

    for (const AnimationInstance* anim : project.animations_of(clip_id)) {
        if (find_preset(anim->preset) == nullptr) continue;  // registered without an evaluation rule
        double u = animation_progress(*anim, clip, t);
        Easing easing = param_enum(anim->params, "easing", kEasingNames, Easing::Linear);
        Direction direction = param_enum(anim->params, "direction", kDirectionNames, Direction::None);
        AnimationDelta d = preset_delta(anim->preset, ease::apply(easing, u), direction);

        state.opacity *= d.opacity;
        state.position_offset.x += d.offset.x;
        state.position_offset.y += d.offset.y;
        state.scale *= d.scale;
        state.rotation += d.rotation;
        state.reveal_fraction = std::min(state.reveal_fraction, d.reveal);
        whiten = whiten + (1.0 - whiten) * d.whiten;
    }

    state.opacity = std::clamp(state.opacity, 0.0, 1.0);
    state.reveal_fraction = std::clamp(state.reveal_fraction, 0.0, 1.0);
    if (state.effective_style && whiten > 0.0) {
        for (std::size_t i = 0; i < 3; ++i) {
            double& c = state.effective_style->color[i];
            c = c + (1.0 - c) * whiten;
        }
    }
    return state;
}

std::vector<RenderState> snapshot_frame(const Project& project, double t) {
    std::vector<std::tuple<std::int64_t, TimeMs, ObjectId>> active;
    for (const auto& [cid, c] : project.clips) {
        if (active_at(c, t)) active.emplace_back(project.track(c.track_id).order_index, c.start, cid);
    }
    std::sort(active.begin(), active.end());

    std::vector<RenderState> out;
    out.reserve(active.size());
    for (const auto& [order, start, cid] : active) out.push_back(evaluate(project, cid, t));
    return out;
}

json render_state_to_json(const RenderState& s) {
    json out = {
        {"clip_id", s.clip_id.value},
        {"opacity", s.opacity},
        {"position_offset", {s.position_offset.x, s.position_offset.y}},
        {"scale", s.scale},
        {"rotation", s.rotation},
        {"reveal_fraction", s.reveal_fraction},
    };
    if (s.effective_style) out["effective_style"] = style_to_json(*s.effective_style);
    return out;
}

json frame_to_json(double t, const std::vector<RenderState>& states) {
    json arr = json::array();
    for (const auto& s : states) arr.push_back(render_state_to_json(s));
    return {{"t", t}, {"states", std::move(arr)}};
}

}  // namespace tae
