#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pollrout/ils.hpp"
#include "pollrout/io.hpp"
#include "pollrout/rng.hpp"
#include "pollrout/sdtoa.hpp"
#include "support.hpp"

using namespace prp;

namespace {

IlsConfig quick_config(ObjectiveMode mode, std::uint64_t seed) {
    IlsConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.restarts = 2;
    cfg.iterations = 12;
    return cfg;
}

std::multiset<int> covered_customers(const Solution& sol) {
    std::multiset<int> seen;
    for (const RoutePlan& rp : sol.routes)
        for (std::size_t k = 1; k + 1 < rp.route.visits.size(); ++k)
            seen.insert(rp.route.visits[k]);
    return seen;
}

std::vector<std::vector<int>> route_shapes(const Solution& sol) {
    std::vector<std::vector<int>> shapes;
    for (const RoutePlan& rp : sol.routes) shapes.push_back(rp.route.visits);
    return shapes;
}

}  // namespace

TEST_CASE("construction covers every customer within capacity") {
    const Instance inst = generate_instance(20, TightnessClass::kB, 77, 5);
    Rng rng(5);
    const Solution sol = construct_solution(inst, ObjectiveMode::kFreeDeparture, rng);
    REQUIRE_FALSE(sol.infeasible_mark);

    const std::multiset<int> seen = covered_customers(sol);
    CHECK(static_cast<int>(seen.size()) == inst.num_customers());
    for (int c = 1; c <= inst.num_customers(); ++c) CHECK(seen.count(c) == 1);

    for (const RoutePlan& rp : sol.routes) {
        if (rp.route.num_customers() == 0) continue;
        CHECK(arc_load(rp.route, 0, inst) <= inst.params().capacity_q + kTol);
        const SpeedOptResult opt = sdtoa(rp.route, inst);
        CHECK(opt.feasible);
    }
}

TEST_CASE("speed matrix refresh pins solution arcs and decays the rest") {
    const Instance inst = test::simple_instance();
    SpeedMatrix m(inst);
    const double d01 = m.speed(0, 1);
    CHECK(d01 > 0.0);
    CHECK(m.speed(1, 0) == doctest::Approx(d01));  // uniform default

    Solution sol;
    RoutePlan rp;
    rp.route.visits = {0, 1, 0};
    const SpeedOptResult opt = sdtoa(rp.route, inst);
    REQUIRE(opt.feasible);
    rp.schedule = opt.schedule;
    sol.routes.push_back(rp);

    m.refresh(sol);
    CHECK(m.speed(0, 1) == doctest::Approx(opt.schedule.speeds[0]));
    CHECK(m.speed(1, 0) == doctest::Approx(opt.schedule.speeds[1]));

    // An arc absent from the solution decays halfway toward the default once
    // it has been perturbed away from it.
    Solution empty;
    m.refresh(empty);
    const double after = m.speed(0, 1);
    CHECK(std::abs(after - d01) <= std::abs(opt.schedule.speeds[0] - d01) / 2.0 + 1e-12);
}

TEST_CASE("schedule optimization repairs a window violation by ejection") {
    // Customer 1 opens late, customer 2 must be served early; visiting 1 first
    // makes 2 unreachable, so the repair has to eject and reorder.
    PrpParameters p = test::simple_instance().params();
    std::vector<Node> nodes = {
        Node{0, 0.0, 0.0, 0.0, 0.0, 40000.0, 0.0},
        Node{1, 300.0, 400.0, 10.0, 8000.0, 9000.0, 60.0},
        Node{2, -300.0, 400.0, 10.0, 0.0, 900.0, 60.0},
    };
    const Instance inst("repair", std::move(nodes), p);

    Solution sol;
    RoutePlan rp;
    rp.route.visits = {0, 1, 2, 0};
    REQUIRE_FALSE(sdtoa(rp.route, inst).feasible);
    sol.routes.push_back(rp);

    std::int64_t calls = 0;
    const double cost = optimize_schedules(sol, inst, ObjectiveMode::kFreeDeparture,
                                           nullptr, &calls);
    CHECK(std::isfinite(cost));
    CHECK(calls > 0);
    CHECK(validate(sol, inst, ObjectiveMode::kFreeDeparture).empty());
    const std::multiset<int> seen = covered_customers(sol);
    CHECK(seen.count(1) == 1);
    CHECK(seen.count(2) == 1);
}

TEST_CASE("iterated search returns a feasible best and a sane log") {
    const Instance inst = generate_instance(15, TightnessClass::kA, 3, 5);
    for (const ObjectiveMode mode :
         {ObjectiveMode::kFreeDeparture, ObjectiveMode::kFixedDeparture}) {
        RoutePool pool(inst.num_customers());
        const IlsResult res = ils_run(inst, quick_config(mode, 9), &pool);
        REQUIRE(std::isfinite(res.best_cost));
        CHECK(validate(res.best, inst, mode).empty());
        CHECK(res.best.total_cost == doctest::Approx(res.best_cost));
        CHECK(res.schedule_opt_calls > 0);
        CHECK(pool.size() > 0);
        CHECK_FALSE(res.log.empty());
        double prev_best = std::numeric_limits<double>::infinity();
        for (const IlsLogRow& row : res.log) {
            CHECK(row.best_cost <= prev_best + kTol);
            CHECK(row.best_cost <= row.current_cost + kTol);
            prev_best = row.best_cost;
        }
        CHECK(res.log.back().best_cost == doctest::Approx(res.best_cost));
    }
}

TEST_CASE("one-customer instance is solved to the single-route optimum") {
    const Instance inst = generate_instance(1, TightnessClass::kB, 17, 5);
    Route only;
    only.visits = {0, 1, 0};
    for (const ObjectiveMode mode :
         {ObjectiveMode::kFreeDeparture, ObjectiveMode::kFixedDeparture}) {
        const SpeedOptResult ref =
            mode == ObjectiveMode::kFreeDeparture
                ? sdtoa(only, inst)
                : soa(only, inst, inst.node(0).tw_start);
        REQUIRE(ref.feasible);
        const IlsResult res = ils_run(inst, quick_config(mode, 5));
        REQUIRE(res.best.routes.size() == 1);
        CHECK(res.best.routes[0].route.visits == only.visits);
        CHECK(res.best_cost == doctest::Approx(ref.cost).epsilon(1e-12));
    }
}

TEST_CASE("runs are deterministic per seed") {
    const Instance inst = generate_instance(12, TightnessClass::kC, 8, 4);
    const IlsResult a = ils_run(inst, quick_config(ObjectiveMode::kFreeDeparture, 42));
    const IlsResult b = ils_run(inst, quick_config(ObjectiveMode::kFreeDeparture, 42));
    CHECK(a.best_cost == b.best_cost);
    CHECK(route_shapes(a.best) == route_shapes(b.best));
    CHECK(a.log.size() == b.log.size());

    const IlsResult c = ils_run(inst, quick_config(ObjectiveMode::kFreeDeparture, 43));
    CHECK(validate(c.best, inst, ObjectiveMode::kFreeDeparture).empty());
}

TEST_CASE("local search does not lose customers") {
    const Instance inst = generate_instance(14, TightnessClass::kB, 21, 7);
    Rng rng(3);
    Solution sol = construct_solution(inst, ObjectiveMode::kFreeDeparture, rng);
    const std::multiset<int> before = covered_customers(sol);
    SpeedMatrix speeds(inst);
    local_search(sol, inst, speeds, quick_config(ObjectiveMode::kFreeDeparture, 1));
    CHECK(covered_customers(sol) == before);
    std::int64_t calls = 0;
    const double after = optimize_schedules(sol, inst, ObjectiveMode::kFreeDeparture,
                                            nullptr, &calls);
    CHECK(std::isfinite(after));
}

TEST_CASE("time limit short-circuits the run") {
    const Instance inst = generate_instance(30, TightnessClass::kB, 4, 5);
    IlsConfig cfg = quick_config(ObjectiveMode::kFreeDeparture, 13);
    cfg.restarts = 50;
    cfg.iterations = 500;
    cfg.time_limit_s = 0.05;
    const IlsResult res = ils_run(inst, cfg);
    CHECK(res.hit_time_limit);
    REQUIRE(std::isfinite(res.best_cost));
    CHECK(validate(res.best, inst, ObjectiveMode::kFreeDeparture).empty());
}

TEST_CASE("solver beats construction on average") {
    const Instance inst = generate_instance(18, TightnessClass::kA, 55, 6);
    Rng rng(55);
    Solution built = construct_solution(inst, ObjectiveMode::kFreeDeparture, rng);
    std::int64_t calls = 0;
    const double base =
        optimize_schedules(built, inst, ObjectiveMode::kFreeDeparture, nullptr, &calls);
    REQUIRE(std::isfinite(base));
    const IlsResult res =
        ils_run(inst, quick_config(ObjectiveMode::kFreeDeparture, 55));
    CHECK(res.best_cost <= base + kTol);
}
