#include "tae/timeline/easing.hpp"

#include <algorithm>

namespace tae::ease {

namespace {
double clamp01(double t) { return std::clamp(t, 0.0, 1.0); }
}  // namespace

double linear(double t) { return clamp01(t); }

double in_cubic(double t) {
    t = clamp01(t);
    return t * t * t;
}

double out_cubic(double t) {
    double u = 1.0 - clamp01(t);
    return 1.0 - u * u * u;
}

double in_out_cubic(double t) {
    t = clamp01(t);
    if (t < 0.5) return 4.0 * t * t * t;
    double u = -2.0 * t + 2.0;
    return 1.0 - u * u * u / 2.0;
}

double apply(Easing easing, double t) {
    switch (easing) {
        case Easing::Linear: return linear(t);
        case Easing::EaseIn: return in_cubic(t);
        case Easing::EaseOut: return out_cubic(t);
        case Easing::EaseInOut: return in_out_cubic(t);
    }
    return linear(t);
}

}  // namespace tae::ease
