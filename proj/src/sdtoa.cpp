#include "pollrout/sdtoa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace prp {

namespace {

// Violations and time deficits below this threshold are treated as zero. The
// forward pass reproduces fixed segment endpoints only up to rounding, so a
// strict > 0 test could recurse forever on noise.
constexpr double kNumericEps = 1e-9;

double clamp(double x, double lo, double hi) { return std::min(std::max(lo, x), hi); }

class SegmentSolver {
  public:
    SegmentSolver(const Route& route, const Instance& instance, bool free_departure)
        : route_(route),
          inst_(instance),
          free_departure_(free_departure),
          v_fd_(v_star_fuel_driver(instance.params())),
          last_(route.length() - 1),
          arrival_(static_cast<std::size_t>(route.length()), 0.0) {}

    // Runs the recursion from the root segment. `departure` is only read when
    // the departure is pinned (baseline mode).
    void run(double departure) {
        pinned_departure_ = departure;
        solve(0, last_);
    }

    int calls() const { return calls_; }
    bool aborted() const { return aborted_; }
    double abort_violation() const { return abort_violation_; }
    int abort_pos() const { return abort_pos_; }
    const std::vector<double>& arrivals() const { return arrival_; }

  private:
    double window_start(int pos) const { return inst_.node(route_.visits[pos]).tw_start; }
    double window_end(int pos) const { return inst_.node(route_.visits[pos]).tw_end; }
    double service(int pos) const { return inst_.node(route_.visits[pos]).service; }
    double dist(int pos) const {  // arc pos-1 -> pos
        return inst_.distance(route_.visits[pos - 1], route_.visits[pos]);
    }

    void abort_segment(double deficit, int pos) {
        if (!aborted_ || deficit > abort_violation_) {
            abort_violation_ = deficit;
            abort_pos_ = pos;
        }
        aborted_ = true;
    }

    void solve(int s, int e) {
        if (aborted_) return;
        ++calls_;

        double total_dist = 0.0;
        double total_service = 0.0;
        for (int i = s; i < e; ++i) {
            total_dist += dist(i + 1);
            total_service += service(i);
        }

        if (s == 0 && e == last_)
            arrival_[0] = free_departure_ ? window_start(0) : pinned_departure_;
        if (e == last_)
            arrival_[e] = clamp(arrival_[s] + total_dist / v_fd_ + total_service,
                                window_start(e), window_end(e));
        if (s == 0 && free_departure_)
            arrival_[s] = clamp(arrival_[e] - total_dist / v_fd_ - total_service,
                                window_start(s), window_end(s));

        const double span = arrival_[e] - arrival_[s] - total_service;
        double max_violation = 0.0;
        int worst = 0;

        if (total_dist > 0.0) {
            if (span <= 0.0) {
                // Fixed endpoints leave no driving time at all.
                const double deficit =
                    total_service + total_dist / inst_.params().v_max -
                    (arrival_[e] - arrival_[s]);
                abort_segment(deficit, e);
                return;
            }
            const double v_ref = total_dist / span;
            for (int i = s + 1; i <= e; ++i) {
                arrival_[i] = arrival_[i - 1] + service(i - 1) + dist(i) / v_ref;
                const double violation =
                    std::max({0.0, arrival_[i] - window_end(i),
                              window_start(i) - arrival_[i]});
                if (violation > max_violation) {
                    max_violation = violation;
                    worst = i;
                }
            }
        } else {
            // Zero-length segment: arrivals chain by service times alone and
            // any slack before the fixed endpoint becomes waiting later on.
            if (span < -kNumericEps) {
                abort_segment(-span, e);
                return;
            }
            for (int i = s + 1; i < e; ++i) {
                arrival_[i] = arrival_[i - 1] + service(i - 1);
                const double violation =
                    std::max({0.0, arrival_[i] - window_end(i),
                              window_start(i) - arrival_[i]});
                if (violation > max_violation) {
                    max_violation = violation;
                    worst = i;
                }
            }
        }

        if (max_violation > kNumericEps) {
            arrival_[worst] = clamp(arrival_[worst], window_start(worst), window_end(worst));
            solve(s, worst);
            solve(worst, e);
        }
    }

    const Route& route_;
    const Instance& inst_;
    const bool free_departure_;
    const double v_fd_;
    const int last_;
    double pinned_departure_ = 0.0;
    std::vector<double> arrival_;
    int calls_ = 0;
    bool aborted_ = false;
    double abort_violation_ = 0.0;
    int abort_pos_ = -1;
};

// Turns final arrival times into speeds and waits, rejecting arcs that would
// need more than v_max. Required speeds below the fuel-optimal floor are
// lifted to it, the slack becoming waiting at the arc's head.
SpeedOptResult finish(const Route& route, const Instance& instance,
                      const SegmentSolver& solver) {
    const PrpParameters& p = instance.params();
    const double v_f = v_star_fuel(p);
    const int len = route.length();

    SpeedOptResult result;
    result.recursion_count = solver.calls();

    if (solver.aborted()) {
        result.max_violation = solver.abort_violation();
        result.violation_pos = solver.abort_pos();
        return result;
    }

    const std::vector<double>& t = solver.arrivals();
    Schedule sched;
    sched.arrivals = t;
    sched.speeds.assign(static_cast<std::size_t>(len - 1), 0.0);
    sched.waits.assign(static_cast<std::size_t>(len), 0.0);

    double worst_deficit = 0.0;
    int worst_pos = -1;
    for (int i = 1; i < len; ++i) {
        const double d = instance.distance(route.visits[i - 1], route.visits[i]);
        const double budget = t[i] - t[i - 1] - instance.node(route.visits[i - 1]).service;
        const double min_travel = d / p.v_max;
        if (budget < min_travel - kNumericEps) {
            const double deficit = min_travel - budget;
            if (deficit > worst_deficit) {
                worst_deficit = deficit;
                worst_pos = i;
            }
            continue;
        }
        double v;
        if (d == 0.0) {
            v = v_f;  // fuel-free arc, speed is a placeholder
        } else {
            v = std::max(d / std::max(budget, min_travel), v_f);
            v = std::min(v, p.v_max);  // absorbs rounding just above v_max
        }
        sched.speeds[static_cast<std::size_t>(i - 1)] = v;
        const double travel = d > 0.0 ? d / v : 0.0;
        sched.waits[static_cast<std::size_t>(i)] = std::max(0.0, budget - travel);
    }

    if (worst_pos >= 0) {
        result.max_violation = worst_deficit;
        result.violation_pos = worst_pos;
        return result;
    }

    result.feasible = true;
    result.cost = route_cost(route, sched, instance, ObjectiveMode::kFreeDeparture);
    result.schedule = std::move(sched);
    return result;
}

}  // namespace

double v_star_fuel(const PrpParameters& params) {
    const double v = std::cbrt(params.w1 / (2.0 * params.w4));
    return clamp(v, params.v_min, params.v_max);
}

double v_star_fuel_driver(const PrpParameters& params) {
    const double v =
        std::cbrt((params.omega_fd / params.omega_fc + params.w1) / (2.0 * params.w4));
    return clamp(v, params.v_min, params.v_max);
}

SpeedOptResult sdtoa(const Route& route, const Instance& instance) {
    check_route(route, instance);
    SegmentSolver solver(route, instance, /*free_departure=*/true);
    solver.run(0.0);
    return finish(route, instance, solver);
}

SpeedOptResult soa(const Route& route, const Instance& instance, double departure) {
    check_route(route, instance);
    const Node& depot = instance.node(0);
    if (departure < depot.tw_start - kTol || departure > depot.tw_end + kTol)
        throw std::invalid_argument("departure outside the depot time window");
    SegmentSolver solver(route, instance, /*free_departure=*/false);
    solver.run(departure);
    return finish(route, instance, solver);
}

}  // namespace prp
