#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tae/core/meta.hpp"
#include "tae/core/project.hpp"

namespace tae {

/// Visual contribution of one animation at an eased progress value.
struct AnimationDelta {
    double opacity = 1.0;
    Point2 offset{0.0, 0.0};
    double scale = 1.0;
    double rotation = 0.0;
    double reveal = 1.0;
    double whiten = 0.0;  // lerp weight toward white on text color

    bool operator==(const AnimationDelta&) const = default;
};

struct PresetSpec {
    std::string_view name;
    Phase phase;
    Direction default_direction;
    Easing default_easing;
    std::string_view description;
};

/// The eight built-in presets, sorted by name.
const std::vector<PresetSpec>& preset_catalog();
const PresetSpec* find_preset(std::string_view name);
std::vector<std::string> preset_names();

/// Normalized canvas distance travelled by slide presets.
inline constexpr double kSlideDistance = 0.2;
/// Peak upward lift of the bounce preset.
inline constexpr double kBounceHeight = 0.1;
inline constexpr int kBounceHalfPeriods = 3;
/// Smallest scale of the pop preset at progress 0.
inline constexpr double kPopStartScale = 0.5;
inline constexpr double kPopOvershoot = 0.15;

Point2 direction_vector(Direction direction);

/**
 * @brief Evaluates a preset at eased progress `e` in [0,1].
 *
 * Enter presets start hidden at e=0 and reach the identity delta at e=1;
 * exit presets mirror that. Emphasis presets are identity at both ends.
 * Throws UnknownPreset.
 */
AnimationDelta preset_delta(std::string_view preset, double e, Direction direction);

/// Meta class for a catalog preset (duration, delay, speed, direction, easing).
MetaClass make_preset_class(const PresetSpec& spec);

/// Asset, track and clip classes used by the editor and tool derivation.
std::vector<MetaClass> builtin_element_classes();

/// Registry holding the element classes and the whole preset catalog.
MetaRegistry make_builtin_registry();

}  // namespace tae
