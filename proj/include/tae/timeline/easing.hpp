#pragma once

#include "tae/core/project.hpp"

namespace tae::ease {

// Cubic easing curves. Each maps [0,1] onto [0,1] monotonically with
// exact endpoints; input outside [0,1] is clamped.

double linear(double t);
double in_cubic(double t);
double out_cubic(double t);
double in_out_cubic(double t);

double apply(Easing easing, double t);

}  // namespace tae::ease
