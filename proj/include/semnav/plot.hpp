#pragma once

#include <string>
#include <vector>

#include "semnav/a3c.hpp"

namespace semnav {

struct CurvePoint {
    double frames = 0.0;
    double value = 0.0;
};

/// Trailing moving average over `window` episodes, one point per full
/// window; fewer episodes than `window` give a single averaged point.
std::vector<CurvePoint> moving_average(const std::vector<RewardLogEntry>& episodes, int window);

/// Reward curves (one polyline per scene/target pair) as a standalone SVG
/// document. Throws ContractError on an empty log.
std::string reward_curve_svg(const std::vector<RewardLogEntry>& log, int window);

}  // namespace semnav
