#include "pollrout/ils.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "pollrout/sdtoa.hpp"

namespace prp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kImprove = 1e-9;  // strict-descent margin

SpeedOptResult optimize_route(const Route& route, const Instance& instance,
                              ObjectiveMode mode) {
    if (mode == ObjectiveMode::kFreeDeparture) return sdtoa(route, instance);
    return soa(route, instance, instance.node(0).tw_start);
}

// Exact route cost under `mode`; +infinity when the optimizer rejects the
// sequence. Optionally returns the optimized schedule.
double exact_cost(const Route& route, const Instance& instance,
                  ObjectiveMode mode, Schedule* schedule,
                  std::int64_t* opt_calls) {
    if (opt_calls) ++*opt_calls;
    const SpeedOptResult r = optimize_route(route, instance, mode);
    if (!r.feasible) return kInf;
    if (schedule) *schedule = r.schedule;
    return route_cost(route, r.schedule, instance, mode);
}

// Fast surrogate cost of a visit sequence: simulate the route at the matrix
// speeds, waiting out early arrivals. Returns +infinity on capacity or
// deadline violations at those speeds.
double estimate(const std::vector<int>& visits, const Instance& instance,
                const SpeedMatrix& speeds, ObjectiveMode mode) {
    const int len = static_cast<int>(visits.size());
    if (len <= 2) return 0.0;
    const PrpParameters& p = instance.params();

    double load = 0.0;
    for (int k = 1; k + 1 < len; ++k) load += instance.node(visits[k]).demand;
    if (load > p.capacity_q + kTol) return kInf;

    const double t0 = instance.node(0).tw_start;
    double t = t0;
    double fuel = 0.0;
    double first_wait = 0.0;
    for (int k = 0; k + 1 < len; ++k) {
        const Node& from = instance.node(visits[k]);
        const Node& to = instance.node(visits[k + 1]);
        const double d = instance.distance(visits[k], visits[k + 1]);
        const double v = speeds.speed(visits[k], visits[k + 1]);
        fuel += arc_fuel(d, v, load, p);
        t += from.service + d / v;
        if (t > to.tw_end + kTol) return kInf;
        const double wait = std::max(0.0, to.tw_start - t);
        if (k == 0) first_wait = wait;
        t += wait;
        load -= to.demand;
    }
    // A free departure can absorb waiting at the first customer by leaving
    // the depot later.
    const double driver =
        mode == ObjectiveMode::kFixedDeparture ? t : t - t0 - first_wait;
    return p.omega_fc * fuel + p.omega_fd * driver;
}

enum MoveType {
    kMvRelocate = 0,
    kMvSwap,
    kMvTwoOpt,
    kMvTwoOptStar,
    kMvOrOpt
};

struct Move {
    int type = -1;
    int r1 = 0;  // source route
    int r2 = 0;  // target route (== r1 for intra moves)
    int a = 0;
    int b = 0;
    int len = 1;  // segment length for or-opt
};

// Materialize the post-move visit sequences. s1 receives the new source
// route; s2 the new target route for two-route moves (r1 != r2).
void build_move(const Move& m, const std::vector<int>& v1,
                const std::vector<int>& v2, std::vector<int>& s1,
                std::vector<int>& s2) {
    const bool intra = m.r1 == m.r2;
    switch (m.type) {
        case kMvRelocate: {
            if (intra) {
                s1 = v1;
                const int c = s1[static_cast<std::size_t>(m.a)];
                s1.erase(s1.begin() + m.a);
                s1.insert(s1.begin() + m.b, c);
            } else {
                s1 = v1;
                const int c = s1[static_cast<std::size_t>(m.a)];
                s1.erase(s1.begin() + m.a);
                s2 = v2;
                s2.insert(s2.begin() + m.b, c);
            }
            break;
        }
        case kMvSwap: {
            if (intra) {
                s1 = v1;
                std::swap(s1[static_cast<std::size_t>(m.a)],
                          s1[static_cast<std::size_t>(m.b)]);
            } else {
                s1 = v1;
                s2 = v2;
                std::swap(s1[static_cast<std::size_t>(m.a)],
                          s2[static_cast<std::size_t>(m.b)]);
            }
            break;
        }
        case kMvTwoOpt: {
            s1 = v1;
            std::reverse(s1.begin() + m.a, s1.begin() + m.b + 1);
            break;
        }
        case kMvTwoOptStar: {
            s1.assign(v1.begin(), v1.begin() + m.a + 1);
            s1.insert(s1.end(), v2.begin() + m.b + 1, v2.end());
            s2.assign(v2.begin(), v2.begin() + m.b + 1);
            s2.insert(s2.end(), v1.begin() + m.a + 1, v1.end());
            break;
        }
        case kMvOrOpt: {
            if (intra) {
                s1 = v1;
                std::vector<int> seg(s1.begin() + m.a, s1.begin() + m.a + m.len);
                s1.erase(s1.begin() + m.a, s1.begin() + m.a + m.len);
                s1.insert(s1.begin() + m.b, seg.begin(), seg.end());
            } else {
                s1 = v1;
                std::vector<int> seg(s1.begin() + m.a, s1.begin() + m.a + m.len);
                s1.erase(s1.begin() + m.a, s1.begin() + m.a + m.len);
                s2 = v2;
                s2.insert(s2.begin() + m.b, seg.begin(), seg.end());
            }
            break;
        }
        default:
            break;
    }
}

}  // namespace

SpeedMatrix::SpeedMatrix(const Instance& instance)
    : stride_(static_cast<std::size_t>(instance.num_nodes())),
      default_speed_(v_star_fuel_driver(instance.params())),
      speeds_(stride_ * stride_, default_speed_) {}

void SpeedMatrix::refresh(const Solution& solution) {
    for (double& v : speeds_) v = default_speed_ + 0.5 * (v - default_speed_);
    for (const RoutePlan& plan : solution.routes) {
        const std::vector<int>& visits = plan.route.visits;
        for (std::size_t k = 0; k + 1 < visits.size(); ++k)
            speeds_[index(visits[k], visits[k + 1])] = plan.schedule.speeds[k];
    }
}

Solution construct_solution(const Instance& instance, ObjectiveMode mode,
                            Rng& rng) {
    const int n = instance.num_customers();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 1);
    rng.shuffle(order);

    Solution sol;
    std::vector<double> cost_cache;  // exact cost per route
    std::vector<double> load_cache;

    for (int c : order) {
        const double demand = instance.node(c).demand;
        double best_delta = kInf;
        int best_r = -1;
        Route best_route;
        Schedule best_sched;
        double best_cost = kInf;

        for (int r = 0; r < sol.num_routes(); ++r) {
            if (load_cache[static_cast<std::size_t>(r)] + demand >
                instance.params().capacity_q + kTol)
                continue;
            const std::vector<int>& v = sol.routes[static_cast<std::size_t>(r)].route.visits;
            for (int pos = 1; pos <= static_cast<int>(v.size()) - 1; ++pos) {
                Route cand{v};
                cand.visits.insert(cand.visits.begin() + pos, c);
                Schedule sched;
                const double cost = exact_cost(cand, instance, mode, &sched, nullptr);
                const double delta = cost - cost_cache[static_cast<std::size_t>(r)];
                if (delta < best_delta) {
                    best_delta = delta;
                    best_r = r;
                    best_route = std::move(cand);
                    best_sched = std::move(sched);
                    best_cost = cost;
                }
            }
        }

        Route single{{0, c, 0}};
        Schedule ssched;
        const double scost = exact_cost(single, instance, mode, &ssched, nullptr);
        if (scost < best_delta) {
            best_delta = scost;
            best_r = -1;
            best_route = std::move(single);
            best_sched = std::move(ssched);
            best_cost = scost;
        }

        if (!std::isfinite(best_delta)) {
            // No feasible placement at all (pathological instance); keep the
            // customer on a singleton route and mark the solution.
            sol.infeasible_mark = true;
            sol.routes.push_back(RoutePlan{Route{{0, c, 0}}, Schedule{}});
            cost_cache.push_back(kInf);
            load_cache.push_back(demand);
            continue;
        }
        if (best_r < 0) {
            sol.routes.push_back(RoutePlan{best_route, best_sched});
            cost_cache.push_back(best_cost);
            load_cache.push_back(demand);
        } else {
            sol.routes[static_cast<std::size_t>(best_r)] =
                RoutePlan{best_route, best_sched};
            cost_cache[static_cast<std::size_t>(best_r)] = best_cost;
            load_cache[static_cast<std::size_t>(best_r)] += demand;
        }
    }

    sol.total_cost = 0.0;
    for (double c : cost_cache) sol.total_cost += c;
    return sol;
}

void local_search(Solution& solution, const Instance& instance,
                  const SpeedMatrix& speeds, const IlsConfig& config) {
    // One spare empty route lets relocation open a new vehicle when useful.
    if (solution.num_routes() < instance.params().fleet_size_m)
        solution.routes.push_back(RoutePlan{Route{{0, 0}}, Schedule{}});

    const int nr = solution.num_routes();
    std::vector<double> est(static_cast<std::size_t>(nr));
    for (int r = 0; r < nr; ++r)
        est[static_cast<std::size_t>(r)] =
            estimate(solution.routes[static_cast<std::size_t>(r)].route.visits,
                     instance, speeds, config.mode);

    std::vector<int> s1, s2;
    auto visits_of = [&](int r) -> std::vector<int>& {
        return solution.routes[static_cast<std::size_t>(r)].route.visits;
    };

    for (int sweep = 0; sweep < 10000; ++sweep) {
        Move best;
        double best_delta = -kImprove;

        auto consider = [&](const Move& m) {
            const std::vector<int>& v1 = visits_of(m.r1);
            const std::vector<int>& v2 = visits_of(m.r2);
            build_move(m, v1, v2, s1, s2);
            double now = estimate(s1, instance, speeds, config.mode);
            double before = est[static_cast<std::size_t>(m.r1)];
            if (m.r1 != m.r2) {
                now += estimate(s2, instance, speeds, config.mode);
                before += est[static_cast<std::size_t>(m.r2)];
            }
            if (!(now < before)) return;
            const double delta = now - before;
            if (delta < best_delta) {
                best_delta = delta;
                best = m;
            }
        };

        for (int r1 = 0; r1 < nr; ++r1) {
            const int L1 = static_cast<int>(visits_of(r1).size());

            if (config.use_relocate && L1 >= 4) {
                for (int a = 1; a <= L1 - 2; ++a)
                    for (int b = 1; b <= L1 - 2; ++b)
                        if (b != a) consider({kMvRelocate, r1, r1, a, b, 1});
            }
            if (config.use_swap && L1 >= 4) {
                for (int a = 1; a <= L1 - 3; ++a)
                    for (int b = a + 1; b <= L1 - 2; ++b)
                        consider({kMvSwap, r1, r1, a, b, 1});
            }
            if (config.use_two_opt && L1 >= 4) {
                for (int a = 1; a <= L1 - 3; ++a)
                    for (int b = a + 1; b <= L1 - 2; ++b)
                        consider({kMvTwoOpt, r1, r1, a, b, 1});
            }
            if (config.use_or_opt) {
                for (int len = 2; len <= 3; ++len) {
                    for (int a = 1; a + len - 1 <= L1 - 2; ++a)
                        for (int b = 1; b <= L1 - len - 1; ++b)
                            if (b != a) consider({kMvOrOpt, r1, r1, a, b, len});
                }
            }

            for (int r2 = r1 + 1; r2 < nr; ++r2) {
                const int L2 = static_cast<int>(visits_of(r2).size());

                if (config.use_relocate) {
                    for (int a = 1; a <= L1 - 2; ++a)
                        for (int b = 1; b <= L2 - 1; ++b)
                            consider({kMvRelocate, r1, r2, a, b, 1});
                    for (int a = 1; a <= L2 - 2; ++a)
                        for (int b = 1; b <= L1 - 1; ++b)
                            consider({kMvRelocate, r2, r1, a, b, 1});
                }
                if (config.use_swap) {
                    for (int a = 1; a <= L1 - 2; ++a)
                        for (int b = 1; b <= L2 - 2; ++b)
                            consider({kMvSwap, r1, r2, a, b, 1});
                }
                if (config.use_two_opt_star) {
                    for (int a = 0; a <= L1 - 2; ++a)
                        for (int b = 0; b <= L2 - 2; ++b) {
                            if (a == 0 && b == 0) continue;
                            if (a == L1 - 2 && b == L2 - 2) continue;
                            consider({kMvTwoOptStar, r1, r2, a, b, 1});
                        }
                }
                if (config.use_or_opt) {
                    for (int len = 2; len <= 3; ++len) {
                        for (int a = 1; a + len - 1 <= L1 - 2; ++a)
                            for (int b = 1; b <= L2 - 1; ++b)
                                consider({kMvOrOpt, r1, r2, a, b, len});
                        for (int a = 1; a + len - 1 <= L2 - 2; ++a)
                            for (int b = 1; b <= L1 - 1; ++b)
                                consider({kMvOrOpt, r2, r1, a, b, len});
                    }
                }
            }
        }

        if (best.type < 0) break;
        build_move(best, visits_of(best.r1), visits_of(best.r2), s1, s2);
        visits_of(best.r1) = s1;
        est[static_cast<std::size_t>(best.r1)] =
            estimate(s1, instance, speeds, config.mode);
        if (best.r1 != best.r2) {
            visits_of(best.r2) = s2;
            est[static_cast<std::size_t>(best.r2)] =
                estimate(s2, instance, speeds, config.mode);
        }
    }

    std::erase_if(solution.routes,
                  [](const RoutePlan& p) { return p.route.length() <= 2; });
}

double optimize_schedules(Solution& solution, const Instance& instance,
                          ObjectiveMode mode, RoutePool* pool,
                          std::int64_t* opt_calls) {
    std::erase_if(solution.routes,
                  [](const RoutePlan& p) { return p.route.length() <= 2; });

    std::vector<int> ejected;
    for (RoutePlan& plan : solution.routes) {
        if (opt_calls) ++*opt_calls;
        SpeedOptResult r = optimize_route(plan.route, instance, mode);
        int guard = plan.route.num_customers();
        while (!r.feasible && plan.route.num_customers() > 0 && guard-- > 0) {
            int pos = r.violation_pos;
            const int last_customer = plan.route.length() - 2;
            if (pos < 1 || pos > last_customer) pos = last_customer;
            ejected.push_back(plan.route.visits[static_cast<std::size_t>(pos)]);
            plan.route.visits.erase(plan.route.visits.begin() + pos);
            if (plan.route.num_customers() == 0) break;
            if (opt_calls) ++*opt_calls;
            r = optimize_route(plan.route, instance, mode);
        }
        if (plan.route.num_customers() > 0 && r.feasible)
            plan.schedule = r.schedule;
    }
    std::erase_if(solution.routes,
                  [](const RoutePlan& p) { return p.route.length() <= 2; });

    bool failed = false;
    for (int c : ejected) {
        const double demand = instance.node(c).demand;
        double best_cost_delta = kInf;
        int best_r = -1;
        Route best_route;
        Schedule best_sched;

        for (int r = 0; r < solution.num_routes(); ++r) {
            const RoutePlan& plan = solution.routes[static_cast<std::size_t>(r)];
            double load = 0.0;
            for (int k = 1; k + 1 < plan.route.length(); ++k)
                load += instance.node(plan.route.visits[static_cast<std::size_t>(k)]).demand;
            if (load + demand > instance.params().capacity_q + kTol) continue;
            const double old_cost =
                route_cost(plan.route, plan.schedule, instance, mode);
            for (int pos = 1; pos <= plan.route.length() - 1; ++pos) {
                Route cand = plan.route;
                cand.visits.insert(cand.visits.begin() + pos, c);
                Schedule sched;
                const double cost = exact_cost(cand, instance, mode, &sched, opt_calls);
                if (cost - old_cost < best_cost_delta) {
                    best_cost_delta = cost - old_cost;
                    best_r = r;
                    best_route = std::move(cand);
                    best_sched = std::move(sched);
                }
            }
        }

        Route single{{0, c, 0}};
        Schedule ssched;
        const double scost = exact_cost(single, instance, mode, &ssched, opt_calls);
        if (scost < best_cost_delta) {
            best_cost_delta = scost;
            best_r = -1;
            best_route = std::move(single);
            best_sched = std::move(ssched);
        }

        if (!std::isfinite(best_cost_delta)) {
            failed = true;
            continue;
        }
        if (best_r < 0)
            solution.routes.push_back(RoutePlan{best_route, best_sched});
        else
            solution.routes[static_cast<std::size_t>(best_r)] =
                RoutePlan{best_route, best_sched};
    }

    if (failed) {
        solution.infeasible_mark = true;
        solution.total_cost = kInf;
        return kInf;
    }
    solution.infeasible_mark = false;

    double total = 0.0;
    for (const RoutePlan& plan : solution.routes) {
        const double c = route_cost(plan.route, plan.schedule, instance, mode);
        total += c;
        if (pool) pool->add(plan.route, c);
    }
    solution.total_cost = total;
    return total;
}

namespace {

void perturb(Solution& solution, const Instance& instance, Rng& rng,
             int strength) {
    for (int s = 0; s < strength; ++s) {
        std::vector<std::pair<int, int>> spots;
        for (int r = 0; r < solution.num_routes(); ++r) {
            const int len = solution.routes[static_cast<std::size_t>(r)].route.length();
            for (int p = 1; p <= len - 2; ++p) spots.emplace_back(r, p);
        }
        if (spots.empty()) return;
        const auto [r1, p] =
            spots[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(spots.size()) - 1))];
        std::vector<int>& v1 = solution.routes[static_cast<std::size_t>(r1)].route.visits;
        const int c = v1[static_cast<std::size_t>(p)];
        v1.erase(v1.begin() + p);

        bool placed = false;
        for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
            const int r2 = rng.uniform_int(0, solution.num_routes() - 1);
            std::vector<int>& v2 = solution.routes[static_cast<std::size_t>(r2)].route.visits;
            double load = instance.node(c).demand;
            for (std::size_t k = 1; k + 1 < v2.size(); ++k)
                load += instance.node(v2[k]).demand;
            if (load > instance.params().capacity_q + kTol) continue;
            const int q = rng.uniform_int(1, static_cast<int>(v2.size()) - 1);
            v2.insert(v2.begin() + q, c);
            placed = true;
        }
        if (!placed) v1.insert(v1.begin() + p, c);
    }
    std::erase_if(solution.routes,
                  [](const RoutePlan& p) { return p.route.length() <= 2; });
}

void update_best(IlsResult& result, const Solution& solution, double cost) {
    if (cost < result.best_cost - kImprove) {
        result.best = solution;
        result.best_cost = cost;
    }
}

}  // namespace

IlsResult ils_run(const Instance& instance, const IlsConfig& config,
                  RoutePool* pool) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    };

    Rng root(config.seed);
    SpeedMatrix speeds(instance);
    IlsResult result;
    result.best_cost = kInf;

    bool stop = false;
    for (int restart = 0; restart < config.restarts && !stop; ++restart) {
        Rng rng = root.fork();
        Solution current = construct_solution(instance, config.mode, rng);
        local_search(current, instance, speeds, config);
        double current_cost = optimize_schedules(current, instance, config.mode,
                                                 pool, &result.schedule_opt_calls);
        if (std::isfinite(current_cost)) speeds.refresh(current);
        update_best(result, current, current_cost);
        result.log.push_back({restart, 0, current_cost, result.best_cost, elapsed()});

        for (int iter = 1; iter <= config.iterations; ++iter) {
            if (config.time_limit_s > 0.0 && elapsed() > config.time_limit_s) {
                result.hit_time_limit = true;
                stop = true;
                break;
            }
            Solution cand = current;
            perturb(cand, instance, rng, config.perturb_strength);
            local_search(cand, instance, speeds, config);
            const double cand_cost = optimize_schedules(
                cand, instance, config.mode, pool, &result.schedule_opt_calls);
            if (std::isfinite(cand_cost)) speeds.refresh(cand);
            if (cand_cost < current_cost - kImprove) {
                current = std::move(cand);
                current_cost = cand_cost;
                update_best(result, current, current_cost);
            }
            result.log.push_back(
                {restart, iter, current_cost, result.best_cost, elapsed()});
        }
    }
    return result;
}

}  // namespace prp
