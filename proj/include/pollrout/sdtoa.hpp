#ifndef POLLROUT_SDTOA_HPP
#define POLLROUT_SDTOA_HPP

#include <limits>

#include "pollrout/model.hpp"

// Joint speed and depot-departure-time optimization on a fixed route.
//
// sdtoa() treats the depot departure as a decision variable: it recursively
// solves a relaxed uniform-speed problem, pins the worst time-window violator
// to its nearest window bound, and re-derives the departure backwards from
// fixed arrivals whenever a subproblem touches the route start. soa() is the
// fixed-departure baseline: the same recursion with the backward derivation
// disabled and the start time pinned by the caller.

namespace prp {

// Speed minimizing fuel per meter, clamped into [v_min, v_max].
double v_star_fuel(const PrpParameters& params);

// Speed minimizing fuel plus driver wages per meter (assuming no downstream
// waiting), clamped into [v_min, v_max]. Always >= v_star_fuel.
double v_star_fuel_driver(const PrpParameters& params);

struct SpeedOptResult {
    bool feasible = false;
    Schedule schedule;  // meaningful only when feasible
    // Free-departure objective of the schedule (fuel + wages on duration).
    double cost = std::numeric_limits<double>::infinity();
    // When infeasible: largest residual time deficit in seconds and the route
    // position it was detected at. The ILS uses this as a graded repair signal.
    double max_violation = 0.0;
    int violation_pos = -1;
    // Number of recursive segment solves; bounded by 2 * route length.
    int recursion_count = 0;
};

// Optimize speeds and the depot departure time for `route`. The depot's time
// window bounds both the departure and the return. Returns an infeasible
// result (never throws) when some arc would need a speed above v_max or a
// segment's fixed endpoints leave no time for its travel and service.
SpeedOptResult sdtoa(const Route& route, const Instance& instance);

// Fixed-departure baseline. `departure` must lie inside the depot window
// (throws std::invalid_argument otherwise). The reported cost uses the same
// duration-based objective as sdtoa so the two are directly comparable; with
// departure == 0 it coincides with the return-time objective.
SpeedOptResult soa(const Route& route, const Instance& instance, double departure);

}  // namespace prp

#endif  // POLLROUT_SDTOA_HPP
