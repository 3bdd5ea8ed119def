#include "tae/tools/dispatch.hpp"

#include <algorithm>
#include <chrono>

#include "tae/core/serialize.hpp"
#include "tae/timeline/timeline.hpp"
#include "tae/tools/schema.hpp"

namespace tae {

namespace {

json object_schema(json properties, std::vector<std::string> required) {
    return {
        {"type", "object"},
        {"properties", std::move(properties)},
        {"required", std::move(required)},
        {"additionalProperties", false},
    };
}

json phase_schema() {
    return {{"type", "string"},
            {"enum", kPhaseNames.names()},
            {"description", "When the animation plays: on entry, as emphasis, or on exit."}};
}

std::string field_summary(const MetaClass& cls) {
    std::string out;
    for (const auto& f : cls.fields) {
        if (!out.empty()) out += " ";
        out += f.name + ": " + f.description;
    }
    return out;
}

std::string category_noun(const MetaClass& cls) {
    switch (cls.category) {
        case ClassCategory::Asset: return "asset";
        case ClassCategory::TimelineElement: return "timeline element";
        case ClassCategory::AnimationEffect: return "animation effect";
    }
    return "object";
}

json single_parameters(const MetaClass& cls, ToolVerb verb) {
    json props = json::object();
    std::vector<std::string> required;
    bool animation = cls.category == ClassCategory::AnimationEffect;
    std::string noun = cls.name + " " + category_noun(cls);

    switch (verb) {
        case ToolVerb::Create:
            if (cls.parent) {
                props[cls.parent->param] =
                    id_schema(cls.parent->kind, "Owner of the new " + noun + ".");
                required.push_back(cls.parent->param);
            }
            for (const auto& f : cls.fields) props[f.name] = field_schema(f);
            if (animation) props["phase"] = phase_schema();
            break;
        case ToolVerb::Update:
            props["id"] = id_schema(cls.id_kind, "Id of the " + noun + " to change.");
            required.emplace_back("id");
            if (cls.parent && !animation) {
                props[cls.parent->param] = id_schema(cls.parent->kind, "Move to this owner.");
            }
            for (const auto& f : cls.fields) {
                json s = field_schema(f);
                s.erase("default");
                props[f.name] = std::move(s);
            }
            if (animation) props["phase"] = phase_schema();
            break;
        case ToolVerb::Delete:
            props["id"] = id_schema(cls.id_kind, "Id of the " + noun + " to delete.");
            required.emplace_back("id");
            break;
        case ToolVerb::Query:
            props["id"] = id_schema(cls.id_kind, "Optional id; omit to list every " + cls.name + ".");
            break;
    }
    return object_schema(std::move(props), std::move(required));
}

std::string tool_description(const MetaClass& cls, ToolVerb verb, bool batch) {
    std::string noun = cls.name + " " + category_noun(cls);
    std::string head;
    switch (verb) {
        case ToolVerb::Create: head = "Create a " + noun + "."; break;
        case ToolVerb::Update: head = "Update fields of an existing " + noun + "."; break;
        case ToolVerb::Delete: head = "Delete a " + noun + "."; break;
        case ToolVerb::Query: head = "Read " + noun + " state as canonical JSON."; break;
    }
    if (batch) head += " Batch mode: applies every item in order; any failure rolls the whole batch back.";
    if (verb == ToolVerb::Create || verb == ToolVerb::Update) head += " Fields: " + field_summary(cls);
    return head;
}

json fields_in(const MetaClass& cls, const json& args) {
    json out = json::object();
    for (const auto& f : cls.fields) {
        if (auto it = args.find(f.name); it != args.end()) out[f.name] = *it;
    }
    return out;
}

std::optional<Phase> phase_arg(const json& args) {
    auto it = args.find("phase");
    if (it == args.end()) return std::nullopt;
    return kPhaseNames.parse(it->get<std::string>());
}

ObjectId id_arg(const json& args, const char* key = "id") { return ObjectId(args.at(key).get<std::string>()); }

// -- assets -----------------------------------------------------------------

json create_asset(Project& project, const MetaRegistry& registry, const json& args) {
    json f = registry.resolve_fields("asset", fields_in(registry.get("asset"), args));
    AssetKind kind = *kAssetKindNames.parse(f["kind"].get<std::string>());
    double duration = f["media_duration"].get<double>();
    Asset a = add_asset(project, kind, f["name"].get<std::string>(), f["uri"].get<std::string>(),
                        duration > 0.0 ? std::optional<double>(duration) : std::nullopt);
    return asset_to_json(a);
}

json update_asset(Project& project, const MetaRegistry& registry, const json& args) {
    json f = fields_in(registry.get("asset"), args);
    registry.check_partial("asset", f);
    Asset a = project.asset(id_arg(args));
    if (f.contains("kind")) a.kind = *kAssetKindNames.parse(f["kind"].get<std::string>());
    if (f.contains("name")) a.name = f["name"].get<std::string>();
    if (f.contains("uri")) a.uri = f["uri"].get<std::string>();
    if (f.contains("media_duration")) {
        double d = f["media_duration"].get<double>();
        a.media_duration = d > 0.0 ? std::optional<double>(d) : std::nullopt;
    }
    bool timed = a.kind == AssetKind::Audio || a.kind == AssetKind::Video;
    if (!timed) a.media_duration.reset();
    if (timed && !a.media_duration) {
        throw Error(ErrorCode::InvalidDuration, "audio and video assets need a media_duration > 0");
    }
    project.assets[a.id] = a;
    project.commit();
    return asset_to_json(a);
}

// -- tracks -----------------------------------------------------------------

json create_track(Project& project, const MetaRegistry& registry, const json& args) {
    json given = fields_in(registry.get("track"), args);
    json f = registry.resolve_fields("track", given);
    std::optional<std::int64_t> order;
    if (given.contains("order_index")) order = given["order_index"].get<std::int64_t>();
    Track t = add_track(project, *kTrackKindNames.parse(f["kind"].get<std::string>()), f["name"].get<std::string>(),
                        order, f["script_visible"].get<bool>());
    return track_to_json(t);
}

json update_track(Project& project, const MetaRegistry& registry, const json& args) {
    json f = fields_in(registry.get("track"), args);
    registry.check_partial("track", f);
    Track t = project.track(id_arg(args));
    if (f.contains("kind")) {
        t.kind = *kTrackKindNames.parse(f["kind"].get<std::string>());
        for (const Clip* c : project.clips_on_track(t.id)) {
            if (!payload_compatible(t.kind, c->payload)) {
                throw Error(ErrorCode::PayloadMismatch, "track holds clips incompatible with the new kind",
                            {{"clip_id", c->id.value}});
            }
        }
    }
    if (f.contains("name")) t.name = f["name"].get<std::string>();
    if (f.contains("script_visible")) t.script_visible = f["script_visible"].get<bool>();
    if (f.contains("order_index")) {
        t.order_index = f["order_index"].get<std::int64_t>();
        for (const auto& [tid, other] : project.tracks) {
            if (tid != t.id && other.order_index == t.order_index) {
                throw Error(ErrorCode::OrderConflict, "order_index already used by " + tid.value,
                            {{"order_index", t.order_index}, {"track_id", tid.value}});
            }
        }
    }
    project.tracks[t.id] = t;
    project.commit();
    return track_to_json(t);
}

// -- clips ------------------------------------------------------------------

const std::vector<std::string> kTextFields = {"content", "font_family", "font_size", "color", "position", "alignment"};
const std::vector<std::string> kMediaFields = {"asset_ref", "trim_in"};
const std::vector<std::string> kElementFields = {"element_kind"};

void reject_foreign_fields(const json& given, const ClipPayload& payload) {
    auto owns = [&](const std::string& key) {
        auto in = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), key) != v.end(); };
        if (in(kTextFields)) return std::holds_alternative<TextPayload>(payload);
        if (in(kMediaFields)) return std::holds_alternative<MediaPayload>(payload);
        if (in(kElementFields)) return std::holds_alternative<ElementPayload>(payload);
        return true;
    };
    for (const auto& [key, value] : given.items()) {
        if (!owns(key)) {
            throw Error(ErrorCode::PayloadMismatch, "field '" + key + "' does not apply to this clip's payload",
                        {{"field", key}});
        }
    }
}

void apply_clip_fields(Clip& clip, const json& f) {
    if (f.contains("start")) clip.start = TimeMs::from_seconds(f["start"].get<double>());
    if (f.contains("duration")) clip.duration = TimeMs::from_seconds(f["duration"].get<double>());
    if (auto* text = std::get_if<TextPayload>(&clip.payload)) {
        if (f.contains("content")) text->content = f["content"].get<std::string>();
        if (f.contains("font_family")) text->style.font_family = f["font_family"].get<std::string>();
        if (f.contains("font_size")) text->style.font_size = f["font_size"].get<double>();
        if (f.contains("color")) text->style.color = f["color"].get<Color>();
        if (f.contains("position")) {
            text->style.position = Point2{f["position"][0].get<double>(), f["position"][1].get<double>()};
        }
        if (f.contains("alignment")) text->style.alignment = *kAlignmentNames.parse(f["alignment"].get<std::string>());
    } else if (auto* media = std::get_if<MediaPayload>(&clip.payload)) {
        if (f.contains("asset_ref")) media->asset_ref = ObjectId(f["asset_ref"].get<std::string>());
        if (f.contains("trim_in")) media->trim_in = TimeMs::from_seconds(f["trim_in"].get<double>());
    } else if (auto* element = std::get_if<ElementPayload>(&clip.payload)) {
        if (f.contains("element_kind")) element->element_kind = f["element_kind"].get<std::string>();
    }
}

ClipPayload default_payload(TrackKind kind) {
    switch (kind) {
        case TrackKind::Text: return TextPayload{};
        case TrackKind::Video:
        case TrackKind::Image:
        case TrackKind::Audio: return MediaPayload{};
        case TrackKind::Element: return ElementPayload{"rect", json::object()};
    }
    return TextPayload{};
}

json create_clip(Project& project, const MetaRegistry& registry, const json& args) {
    const MetaClass& cls = registry.get("clip");
    json given = fields_in(cls, args);
    registry.check_partial("clip", given);
    ObjectId track_id = id_arg(args, "track_id");
    const Track& track = project.track(track_id);

    Clip clip;
    clip.track_id = track_id;
    clip.payload = default_payload(track.kind);
    reject_foreign_fields(given, clip.payload);
    json defaults = registry.resolve_fields("clip", json::object());
    apply_clip_fields(clip, {{"start", defaults["start"]}, {"duration", defaults["duration"]}});
    apply_clip_fields(clip, given);
    if (const auto* media = std::get_if<MediaPayload>(&clip.payload); media && media->asset_ref.empty()) {
        throw Error(ErrorCode::UnknownAsset, "media clips need an asset_ref");
    }
    return clip_to_json(put_clip(project, std::move(clip)));
}

json update_clip(Project& project, const MetaRegistry& registry, const json& args) {
    json given = fields_in(registry.get("clip"), args);
    registry.check_partial("clip", given);
    Clip clip = project.clip(id_arg(args));
    reject_foreign_fields(given, clip.payload);
    if (args.contains("track_id")) clip.track_id = id_arg(args, "track_id");
    apply_clip_fields(clip, given);
    if (const auto* media = std::get_if<MediaPayload>(&clip.payload); media && media->asset_ref.empty()) {
        throw Error(ErrorCode::UnknownAsset, "media clips need an asset_ref");
    }
    return clip_to_json(put_clip(project, std::move(clip)));
}

json clip_with_animations(const Project& project, const Clip& clip) {
    json out = clip_to_json(clip);
    json anims = json::array();
    for (const auto* a : project.animations_of(clip.id)) anims.push_back(animation_to_json(*a));
    out["animations"] = std::move(anims);
    return out;
}

// -- animations ---------------------------------------------------------------

const AnimationInstance& animation_of_class(const Project& project, const ObjectId& id, const std::string& preset) {
    const AnimationInstance& anim = project.animation(id);
    if (anim.preset != preset) {
        throw Error(ErrorCode::UnknownAnimation, "animation " + id.value + " is a " + anim.preset + ", not a " + preset,
                    {{"id", id.value}, {"preset", anim.preset}});
    }
    return anim;
}

json query(const Project& project, const MetaClass& cls, const json& args) {
    std::optional<ObjectId> id;
    if (args.contains("id")) id = id_arg(args);

    if (cls.name == "asset") {
        if (id) return asset_to_json(project.asset(*id));
        json items = json::array();
        for (const auto& [aid, a] : project.assets) items.push_back(asset_to_json(a));
        return {{"items", std::move(items)}};
    }
    if (cls.name == "track") {
        if (id) return track_to_json(project.track(*id));
        json items = json::array();
        for (const auto& [tid, t] : project.tracks) items.push_back(track_to_json(t));
        return {{"items", std::move(items)}};
    }
    if (cls.name == "clip") {
        if (id) return clip_with_animations(project, project.clip(*id));
        json items = json::array();
        for (const auto& [cid, c] : project.clips) items.push_back(clip_with_animations(project, c));
        return {{"items", std::move(items)}};
    }
    if (cls.category == ClassCategory::AnimationEffect) {
        if (id) return animation_to_json(animation_of_class(project, *id, cls.name));
        json items = json::array();
        for (const auto& [aid, a] : project.animations) {
            if (a.preset == cls.name) items.push_back(animation_to_json(a));
        }
        return {{"items", std::move(items)}};
    }
    throw Error(ErrorCode::UnknownClass, "no query handler for class " + cls.name);
}

}  // namespace

std::vector<ToolDescriptor> derive_tools(const MetaRegistry& registry) {
    std::vector<ToolDescriptor> out;
    for (const auto& [name, cls] : registry.classes()) {
        for (ToolVerb verb : {ToolVerb::Create, ToolVerb::Update, ToolVerb::Delete, ToolVerb::Query}) {
            ToolDescriptor single;
            single.name = std::string(kToolVerbNames.name(verb)) + "_" + name;
            single.target_class = name;
            single.verb = verb;
            single.mode = verb == ToolVerb::Query ? ToolMode::Query : ToolMode::Single;
            single.parameter_schema = single_parameters(cls, verb);
            single.description = tool_description(cls, verb, false);

            if (verb != ToolVerb::Query) {
                ToolDescriptor batch;
                batch.name = single.name + "_batch";
                batch.target_class = name;
                batch.verb = verb;
                batch.mode = ToolMode::Batch;
                json items = {{"type", "array"}, {"items", single.parameter_schema}, {"minItems", 1}};
                batch.parameter_schema = object_schema({{"items", std::move(items)}}, {"items"});
                batch.description = tool_description(cls, verb, true);
                out.push_back(std::move(batch));
            }
            out.push_back(std::move(single));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

json tool_function_schema(const ToolDescriptor& tool) {
    return {{"type", "function"},
            {"function",
             {{"name", tool.name}, {"description", tool.description}, {"parameters", tool.parameter_schema}}}};
}

json tools_document(const std::vector<ToolDescriptor>& tools) {
    json out = json::array();
    for (const auto& t : tools) out.push_back(tool_function_schema(t));
    return out;
}

json batch_result_to_json(const BatchResult& r) {
    json out = {{"applied", r.applied}, {"rolled_back", r.rolled_back}};
    if (r.first_error) {
        out["first_error"] = {{"index", r.first_error->index}, {"error", r.first_error->error.to_json()}};
    }
    return out;
}

ToolDispatcher::ToolDispatcher(const MetaRegistry& registry, Clock clock)
    : registry_(registry), clock_(std::move(clock)), tools_(derive_tools(registry)) {}

const ToolDescriptor* ToolDispatcher::find(std::string_view name) const {
    auto it = std::lower_bound(tools_.begin(), tools_.end(), name,
                               [](const ToolDescriptor& t, std::string_view n) { return t.name < n; });
    return it != tools_.end() && it->name == name ? &*it : nullptr;
}

std::int64_t ToolDispatcher::now() const {
    if (clock_) return clock_();
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void ToolDispatcher::validate(const std::string& tool, const json& args) const {
    const ToolDescriptor* d = find(tool);
    if (d == nullptr) throw Error(ErrorCode::UnknownTool, "unknown tool " + tool, {{"tool", tool}});
    if (auto why = validate_schema(args, d->parameter_schema)) {
        throw Error(ErrorCode::SchemaViolation, *why, {{"tool", tool}});
    }
}

json ToolDispatcher::execute(Project& project, const ToolDescriptor& tool, const json& args) const {
    const MetaClass& cls = registry_.get(tool.target_class);
    bool animation = cls.category == ClassCategory::AnimationEffect;

    switch (tool.verb) {
        case ToolVerb::Query: return query(project, cls, args);
        case ToolVerb::Create:
            if (cls.name == "asset") return create_asset(project, registry_, args);
            if (cls.name == "track") return create_track(project, registry_, args);
            if (cls.name == "clip") return create_clip(project, registry_, args);
            if (animation) {
                return animation_to_json(attach_animation(project, registry_, id_arg(args, "clip_id"), cls.name,
                                                          fields_in(cls, args), phase_arg(args)));
            }
            break;
        case ToolVerb::Update:
            if (cls.name == "asset") return update_asset(project, registry_, args);
            if (cls.name == "track") return update_track(project, registry_, args);
            if (cls.name == "clip") return update_clip(project, registry_, args);
            if (animation) {
                ObjectId id = id_arg(args);
                (void)animation_of_class(project, id, cls.name);
                return animation_to_json(update_animation(project, registry_, id, fields_in(cls, args), phase_arg(args)));
            }
            break;
        case ToolVerb::Delete: {
            ObjectId id = id_arg(args);
            if (cls.name == "asset") {
                remove_asset(project, id);
            } else if (cls.name == "track") {
                remove_track(project, id);
            } else if (cls.name == "clip") {
                remove_clip(project, id);
            } else if (animation) {
                (void)animation_of_class(project, id, cls.name);
                detach_animation(project, id);
            } else {
                break;
            }
            return {{"deleted", id.value}};
        }
    }
    throw Error(ErrorCode::UnknownClass, "no handler for class " + cls.name);
}

json ToolDispatcher::dispatch(Project& project, const std::string& tool, const json& args, Actor actor) {
    if (const ToolDescriptor* d = find(tool); d != nullptr && d->mode == ToolMode::Batch) {
        std::vector<json> items;
        if (args.is_object() && args.size() == 1 && args.contains("items") && args["items"].is_array()) {
            items.assign(args["items"].begin(), args["items"].end());
        } else {
            Error e(ErrorCode::SchemaViolation, "batch tools take {items:[...]}", {{"tool", tool}});
            append_log(project, actor, tool, args, false, std::string(error_code_name(e.code())) + ": " + e.what(),
                       now());
            throw e;
        }
        return batch_result_to_json(dispatch_batch(project, tool, items, actor));
    }

    try {
        validate(tool, args);
        const ToolDescriptor& d = *find(tool);
        json result = execute(project, d, args);
        std::string detail = result.is_object() && result.contains("id") ? result["id"].get<std::string>() : "";
        append_log(project, actor, tool, args, true, detail, now());
        return result;
    } catch (const Error& e) {
        append_log(project, actor, tool, args, false, std::string(error_code_name(e.code())) + ": " + e.what(), now());
        throw;
    }
}

BatchResult ToolDispatcher::dispatch_batch(Project& project, const std::string& tool, const std::vector<json>& items,
                                           Actor actor) {
    json logged_args = {{"items", items}};
    auto fail = [&](const Error& e) {
        append_log(project, actor, tool, logged_args, false,
                   std::string(error_code_name(e.code())) + ": " + e.what(), now());
        throw e;
    };

    const ToolDescriptor* d = find(tool);
    if (d == nullptr) fail(Error(ErrorCode::UnknownTool, "unknown tool " + tool, {{"tool", tool}}));
    if (d->mode != ToolMode::Batch) {
        fail(Error(ErrorCode::UnknownTool, tool + " is not a batch tool", {{"tool", tool}}));
    }
    if (items.empty()) fail(Error(ErrorCode::SchemaViolation, "batch needs at least one item", {{"tool", tool}}));

    std::string single = tool.substr(0, tool.size() - std::string_view("_batch").size());
    const ToolDescriptor& item_tool = *find(single);

    Project before = project;
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            validate(single, items[i]);
            (void)execute(project, item_tool, items[i]);
        } catch (const Error& e) {
            project = std::move(before);
            append_log(project, actor, tool, logged_args, false,
                       "item " + std::to_string(i) + ": " + std::string(error_code_name(e.code())) + ": " + e.what(),
                       now());
            return BatchResult{0, true, BatchError{i, e}};
        }
    }
    append_log(project, actor, tool, logged_args, true, "applied " + std::to_string(items.size()), now());
    return BatchResult{items.size(), false, std::nullopt};
}

}  // namespace tae
