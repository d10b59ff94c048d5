#ifndef POLLROUT_ORACLE_HPP
#define POLLROUT_ORACLE_HPP

#include <cstddef>
#include <limits>
#include <vector>

#include "pollrout/model.hpp"

// Brute-force cross-checks for the speed/departure optimizer, kept fully
// independent of its recursion: a dynamic program over discretized arrival
// times and a grid scan over fixed departures. Desk-size routes only.

namespace prp {

struct OracleConfig {
    double delta = 1.0;  // arrival-time grid step (s)
    // Hard cap on the total number of lattice points across all visits.
    std::size_t max_grid_points = 10'000'000;
};

struct OracleResult {
    bool feasible = false;
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> arrivals;  // lattice times of one optimal plan
};

// Exact optimum of the duration-based objective over arrival times restricted
// to each visit's lattice {tw_start + k*delta} with both window bounds always
// included. Waiting before service is allowed; arc speeds outside
// [v_min, v_max] are excluded. Throws std::invalid_argument when the route is
// too large for the grid to be tractable.
OracleResult oracle_dp(const Route& route, const Instance& instance,
                       const OracleConfig& cfg);

// Best fixed-departure cost over `grid` equally spaced departures spanning
// the depot window (grid >= 2, throws otherwise). Infeasible when every
// departure fails.
OracleResult departure_scan(const Route& route, const Instance& instance, int grid);

// Tolerance band for comparing an optimizer cost against oracle_dp at step
// `delta`: per-arc Lipschitz bound of the duration-parameterized cost, with a
// 2*delta duration allowance per arc plus the wage term.
double epsilon_bound(const Route& route, const Instance& instance, double delta);

}  // namespace prp

#endif  // POLLROUT_ORACLE_HPP
