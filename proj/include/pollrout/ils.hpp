#pragma once

#include <cstdint>
#include <vector>

#include "pollrout/model.hpp"
#include "pollrout/rng.hpp"
#include "pollrout/setpart.hpp"

namespace prp {

// Per-arc speed estimates used to rank candidate moves without running the
// exact schedule optimizer.  Entries start at the cost-optimal cruise speed
// and are refreshed from exact schedules at each local optimum; arcs that
// stop appearing in the incumbent decay back toward the default.
class SpeedMatrix {
  public:
    explicit SpeedMatrix(const Instance& instance);

    double speed(int from, int to) const {
        return speeds_[index(from, to)];
    }

    // Pull every entry halfway back to the default, then overwrite the arcs
    // present in `solution` with their exact optimized speeds.
    void refresh(const Solution& solution);

  private:
    std::size_t index(int from, int to) const {
        return static_cast<std::size_t>(from) * stride_ + static_cast<std::size_t>(to);
    }

    std::size_t stride_;
    double default_speed_;
    std::vector<double> speeds_;
};

struct IlsConfig {
    ObjectiveMode mode = ObjectiveMode::kFreeDeparture;
    std::uint64_t seed = 1;
    int restarts = 5;
    int iterations = 100;      // perturbation rounds per restart
    int perturb_strength = 3;  // random relocations per perturbation
    double time_limit_s = 0.0; // 0 = no limit
    bool use_relocate = true;
    bool use_swap = true;
    bool use_two_opt = true;
    bool use_two_opt_star = true;
    bool use_or_opt = true;
};

struct IlsLogRow {
    int restart = 0;
    int iteration = 0;  // 0 = initial construction
    double current_cost = 0.0;
    double best_cost = 0.0;
    double elapsed_s = 0.0;
};

struct IlsResult {
    Solution best;
    double best_cost = 0.0;
    std::vector<IlsLogRow> log;
    bool hit_time_limit = false;
    std::int64_t schedule_opt_calls = 0;
};

// Build an initial solution by inserting customers in random order at their
// cheapest feasible position (new routes opened when nothing fits).
Solution construct_solution(const Instance& instance, ObjectiveMode mode, Rng& rng);

// Best-improvement descent over the enabled neighborhoods, ranking moves with
// `speeds`; mutates `solution` route orders only (schedules left stale).
void local_search(Solution& solution, const Instance& instance,
                  const SpeedMatrix& speeds, const IlsConfig& config);

// Run the exact schedule optimizer on every route, repairing routes the
// optimizer rejects by ejecting the flagged customer and reinserting it at
// the cheapest feasible position.  Returns the mode objective value
// (+infinity when repair fails).  Feasible routes are offered to `pool`.
double optimize_schedules(Solution& solution, const Instance& instance,
                          ObjectiveMode mode, RoutePool* pool,
                          std::int64_t* opt_calls);

// Full iterated local search; deterministic for a fixed config.
IlsResult ils_run(const Instance& instance, const IlsConfig& config,
                  RoutePool* pool = nullptr);

}  // namespace prp
