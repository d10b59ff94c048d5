#include "pollrout/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "pollrout/sdtoa.hpp"

namespace prp {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fuel for one arc parameterized by travel duration: the vehicle covers d
// meters in exactly `travel` seconds.
double fuel_of_duration(double d, double travel, double load,
                        const PrpParameters& p) {
    if (d == 0.0) return 0.0;
    return p.w1 * travel + (p.w2 + p.w3 * load) * d +
           p.w4 * d * d * d / (travel * travel);
}

struct ArcCost {
    double d = 0.0;
    double load = 0.0;
    double service_before = 0.0;  // service at the arc's tail
    double min_travel = 0.0;      // d / v_max
    // Past this duration the optimum travels flat_travel seconds and waits;
    // below it the whole elapsed time is spent driving.
    double flat_travel = 0.0;
    double flat_fuel = 0.0;

    // Cheapest fuel given `elapsed` seconds between recorded arrivals minus
    // service; +inf when even v_max is too slow.
    double fuel(double elapsed, const PrpParameters& p) const {
        if (elapsed < min_travel - kTimeEps) return kInf;
        if (d == 0.0) return 0.0;
        if (elapsed >= flat_travel) return flat_fuel;
        return fuel_of_duration(d, std::max(elapsed, min_travel), load, p);
    }
};

ArcCost make_arc(const Route& route, int arc, const Instance& inst) {
    const PrpParameters& p = inst.params();
    ArcCost a;
    a.d = inst.distance(route.visits[arc], route.visits[arc + 1]);
    a.load = arc_load(route, arc, inst);
    a.service_before = inst.node(route.visits[arc]).service;
    a.min_travel = a.d / p.v_max;
    if (a.d > 0.0) {
        const double ideal = a.d * std::cbrt(2.0 * p.w4 / p.w1);  // fuel minimum
        a.flat_travel = std::clamp(ideal, a.min_travel, a.d / p.v_min);
        a.flat_fuel = fuel_of_duration(a.d, a.flat_travel, a.load, p);
    }
    return a;
}

// Lattice of admissible recorded arrivals at one visit: window start plus
// multiples of delta, the window end always included, restricted to times
// from which the rest of the route is still reachable at v_max.
std::vector<double> build_lattice(double a, double b, double earliest,
                                  double latest, double delta) {
    std::vector<double> pts;
    const double lo = std::max(a, earliest);
    const double hi = std::min(b, latest);
    if (lo > hi + kTimeEps) return pts;
    long long k = static_cast<long long>(std::ceil((lo - a) / delta - 1e-12));
    if (k < 0) k = 0;
    for (;; ++k) {
        const double t = a + static_cast<double>(k) * delta;
        if (t > hi + kTimeEps) break;
        pts.push_back(t);
    }
    if (pts.empty() || std::abs(pts.back() - hi) > kTimeEps) pts.push_back(hi);
    return pts;
}

}  // namespace

OracleResult oracle_dp(const Route& route, const Instance& instance,
                       const OracleConfig& cfg) {
    check_route(route, instance);
    if (!(cfg.delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    const PrpParameters& p = instance.params();
    const int len = route.length();

    std::vector<ArcCost> arcs;
    arcs.reserve(static_cast<std::size_t>(len - 1));
    for (int k = 0; k + 1 < len; ++k) arcs.push_back(make_arc(route, k, instance));

    // Reachability bounds under v_max travel.
    std::vector<double> earliest(static_cast<std::size_t>(len));
    std::vector<double> latest(static_cast<std::size_t>(len));
    earliest[0] = instance.node(0).tw_start;
    for (int i = 1; i < len; ++i) {
        const ArcCost& a = arcs[static_cast<std::size_t>(i - 1)];
        earliest[static_cast<std::size_t>(i)] =
            std::max(instance.node(route.visits[i]).tw_start,
                     earliest[static_cast<std::size_t>(i - 1)] + a.service_before +
                         a.min_travel);
    }
    latest[static_cast<std::size_t>(len - 1)] = instance.node(0).tw_end;
    for (int i = len - 2; i >= 0; --i) {
        const ArcCost& a = arcs[static_cast<std::size_t>(i)];
        latest[static_cast<std::size_t>(i)] =
            std::min(instance.node(route.visits[i]).tw_end,
                     latest[static_cast<std::size_t>(i + 1)] - a.service_before -
                         a.min_travel);
    }

    OracleResult result;
    std::vector<std::vector<double>> lattice(static_cast<std::size_t>(len));
    std::size_t total_points = 0;
    for (int i = 0; i < len; ++i) {
        const Node& nd = instance.node(route.visits[i]);
        if (earliest[static_cast<std::size_t>(i)] >
            latest[static_cast<std::size_t>(i)] + kTimeEps)
            return result;  // no feasible path at all
        lattice[static_cast<std::size_t>(i)] =
            build_lattice(nd.tw_start, nd.tw_end, earliest[static_cast<std::size_t>(i)],
                          latest[static_cast<std::size_t>(i)], cfg.delta);
        if (lattice[static_cast<std::size_t>(i)].empty()) return result;
        total_points += lattice[static_cast<std::size_t>(i)].size();
    }
    if (len > 13 && total_points > cfg.max_grid_points)
        throw std::invalid_argument("route too large for the grid oracle");
    if (total_points > 5 * cfg.max_grid_points)
        throw std::invalid_argument("grid oracle lattice exceeds the point cap");

    // value[j] = best (fuel-cost so far - wage credit for the departure).
    std::vector<double> value(lattice[0].size());
    for (std::size_t j = 0; j < lattice[0].size(); ++j)
        value[j] = -p.omega_fd * lattice[0][j];
    std::vector<std::vector<std::int32_t>> parent(static_cast<std::size_t>(len));

    for (int i = 0; i + 1 < len; ++i) {
        const ArcCost& arc = arcs[static_cast<std::size_t>(i)];
        const std::vector<double>& src = lattice[static_cast<std::size_t>(i)];
        const std::vector<double>& dst = lattice[static_cast<std::size_t>(i + 1)];
        std::vector<double> next(dst.size(), kInf);
        std::vector<std::int32_t>& par = parent[static_cast<std::size_t>(i + 1)];
        par.assign(dst.size(), -1);

        const double flat_cost = p.omega_fc * (arc.d == 0.0 ? 0.0 : arc.flat_fuel);
        // Sources early enough that the arc sits in its flat (wait) regime.
        std::size_t flat_end = 0;  // count of prefix sources in the flat regime
        double flat_min = kInf;
        std::int32_t flat_arg = -1;
        // Sources feasible at all (elapsed >= min_travel).
        std::size_t feas_end = 0;

        for (std::size_t k = 0; k < dst.size(); ++k) {
            const double depart_by_flat = dst[k] - arc.service_before - arc.flat_travel;
            const double depart_by_feas = dst[k] - arc.service_before - arc.min_travel;
            while (flat_end < src.size() && src[flat_end] <= depart_by_flat + kTimeEps) {
                if (value[flat_end] < flat_min) {
                    flat_min = value[flat_end];
                    flat_arg = static_cast<std::int32_t>(flat_end);
                }
                ++flat_end;
            }
            while (feas_end < src.size() && src[feas_end] <= depart_by_feas + kTimeEps)
                ++feas_end;

            double best = kInf;
            std::int32_t best_arg = -1;
            if (flat_arg >= 0) {
                best = flat_min + flat_cost;
                best_arg = flat_arg;
            }
            for (std::size_t j = flat_end; j < feas_end; ++j) {
                const double elapsed = dst[k] - src[j] - arc.service_before;
                const double c = value[j] + p.omega_fc * arc.fuel(elapsed, p);
                if (c < best) {
                    best = c;
                    best_arg = static_cast<std::int32_t>(j);
                }
            }
            next[k] = best;
            par[k] = best_arg;
        }
        value = std::move(next);
    }

    const std::vector<double>& last = lattice[static_cast<std::size_t>(len - 1)];
    double best = kInf;
    std::size_t best_idx = 0;
    for (std::size_t j = 0; j < last.size(); ++j) {
        const double c = value[j] + p.omega_fd * last[j];
        if (c < best) {
            best = c;
            best_idx = j;
        }
    }
    if (!std::isfinite(best)) return result;

    result.feasible = true;
    result.cost = best;
    result.arrivals.assign(static_cast<std::size_t>(len), 0.0);
    std::size_t idx = best_idx;
    for (int i = len - 1; i >= 0; --i) {
        result.arrivals[static_cast<std::size_t>(i)] =
            lattice[static_cast<std::size_t>(i)][idx];
        if (i > 0) idx = static_cast<std::size_t>(parent[static_cast<std::size_t>(i)][idx]);
    }
    return result;
}

OracleResult departure_scan(const Route& route, const Instance& instance, int grid) {
    check_route(route, instance);
    if (grid < 2) throw std::invalid_argument("departure grid must have >= 2 points");
    const Node& depot = instance.node(0);
    const double span = depot.tw_end - depot.tw_start;

    OracleResult result;
    for (int k = 0; k < grid; ++k) {
        const double dep =
            depot.tw_start + span * static_cast<double>(k) / static_cast<double>(grid - 1);
        const SpeedOptResult r = soa(route, instance, dep);
        if (r.feasible && r.cost < result.cost) {
            result.feasible = true;
            result.cost = r.cost;
            result.arrivals = r.schedule.arrivals;
        }
    }
    return result;
}

double epsilon_bound(const Route& route, const Instance& instance, double delta) {
    const PrpParameters& p = instance.params();
    const double vmax3 = p.v_max * p.v_max * p.v_max;
    const double lipschitz = std::max(p.w1, std::abs(p.w1 - 2.0 * p.w4 * vmax3));
    const double arcs = static_cast<double>(route.length() - 1);
    return 2.0 * delta * (arcs * p.omega_fc * lipschitz + p.omega_fd) + kTol;
}

}  // namespace prp
