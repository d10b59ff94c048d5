#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "pollrout/rng.hpp"
#include "pollrout/sdtoa.hpp"
#include "support.hpp"

using namespace prp;

TEST_CASE("closed-form cruise speeds") {
    PrpParameters p = test::simple_instance().params();

    // Frozen values computed independently from the published constants.
    CHECK(v_star_fuel(p) == doctest::Approx(15.330359267057471).epsilon(1e-12));
    CHECK(v_star_fuel_driver(p) ==
          doctest::Approx(20.971058527065455).epsilon(1e-12));
    CHECK(v_star_fuel_driver(p) >= v_star_fuel(p));

    SUBCASE("clamping") {
        p.v_max = 12.0;
        CHECK(v_star_fuel(p) == 12.0);
        CHECK(v_star_fuel_driver(p) == 12.0);
        p.v_max = 25.0;
        p.v_min = 22.0;
        CHECK(v_star_fuel(p) == 22.0);
    }
    SUBCASE("zero driver wage collapses the two speeds") {
        p.omega_fd = 0.0;
        CHECK(v_star_fuel_driver(p) == doctest::Approx(v_star_fuel(p)));
    }
    SUBCASE("unit cube root") {
        p.w1 = 2.0 * p.w4;
        p.omega_fd = 0.0;
        p.v_min = 0.5;
        CHECK(v_star_fuel(p) == doctest::Approx(1.0));
    }
}

TEST_CASE("unconstrained route cruises at the fuel+wage speed") {
    const Instance inst = test::simple_instance();
    const Route route{{0, 1, 0}};
    const SpeedOptResult res = sdtoa(route, inst);

    REQUIRE(res.feasible);
    const double v = v_star_fuel_driver(inst.params());
    CHECK(res.schedule.speeds[0] == doctest::Approx(v).epsilon(1e-12));
    CHECK(res.schedule.speeds[1] == doctest::Approx(v).epsilon(1e-12));
    CHECK(res.schedule.waits[0] == 0.0);
    CHECK(res.schedule.waits[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(res.schedule.waits[2] == doctest::Approx(0.0).scale(1.0));
    // Frozen free-departure cost for this geometry.
    CHECK(res.cost == doctest::Approx(8.050381523139416).epsilon(1e-12));
    CHECK(validate_route(route, res.schedule, inst).empty());
}

TEST_CASE("late-opening customer: departure shifted, not slowed or waited") {
    const Instance inst = test::simple_instance(5000.0, 20000.0);
    const Route route{{0, 1, 0}};

    const SpeedOptResult free_res = sdtoa(route, inst);
    REQUIRE(free_res.feasible);
    // The shift fully absorbs the window: cost equals the unconstrained one.
    CHECK(free_res.cost == doctest::Approx(8.050381523139416).epsilon(1e-12));
    CHECK(free_res.schedule.departure() ==
          doctest::Approx(4523.1523488862567).epsilon(1e-12));
    CHECK(validate_route(route, free_res.schedule, inst).empty());

    const SpeedOptResult fixed_res = soa(route, inst, 0.0);
    REQUIRE(fixed_res.feasible);
    CHECK(fixed_res.cost == doctest::Approx(17.94695043186848).epsilon(1e-12));
    CHECK(fixed_res.schedule.departure() == 0.0);
    // The baseline drives the first leg at the pure-fuel speed and waits.
    CHECK(fixed_res.schedule.speeds[0] ==
          doctest::Approx(v_star_fuel(inst.params())).epsilon(1e-12));
    CHECK(free_res.cost < fixed_res.cost);
    CHECK(validate_route(route, fixed_res.schedule, inst).empty());
}

TEST_CASE("soa rejects departures outside the depot window") {
    const Instance inst = test::simple_instance();
    const Route route{{0, 1, 0}};
    CHECK_THROWS_AS(soa(route, inst, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(soa(route, inst, 20001.0), std::invalid_argument);
    CHECK_NOTHROW(soa(route, inst, 20000.0));
}

TEST_CASE("impossible window reported as graded infeasibility") {
    // b1 = 300 s but the trip needs 10000/25 = 400 s at top speed.
    const Instance inst = test::simple_instance(0.0, 300.0);
    const Route route{{0, 1, 0}};
    const SpeedOptResult res = sdtoa(route, inst);
    CHECK_FALSE(res.feasible);
    CHECK(res.max_violation > 0.0);
    CHECK(res.violation_pos >= 0);
    CHECK(res.cost == std::numeric_limits<double>::infinity());
}

TEST_CASE("zero-distance segments chain by service times") {
    PrpParameters p = test::simple_instance().params();
    std::vector<Node> nodes = {
        Node{0, 0.0, 0.0, 0.0, 0.0, 1e5, 0.0},
        Node{1, 0.0, 0.0, 10.0, 0.0, 1e5, 100.0},
        Node{2, 0.0, 0.0, 10.0, 0.0, 1e5, 150.0},
    };
    const Instance inst("stacked", nodes, p);
    const Route route{{0, 1, 2, 0}};
    const SpeedOptResult res = sdtoa(route, inst);
    REQUIRE(res.feasible);
    CHECK(res.schedule.arrivals[1] == doctest::Approx(res.schedule.arrivals[0]));
    CHECK(res.schedule.arrivals[2] ==
          doctest::Approx(res.schedule.arrivals[1] + 100.0));
    CHECK(res.schedule.arrivals[3] ==
          doctest::Approx(res.schedule.arrivals[2] + 150.0));
    CHECK(validate_route(route, res.schedule, inst).empty());
}

TEST_CASE("determinism: identical reruns") {
    const Instance inst = test::simple_instance(5000.0, 9000.0);
    const Route route{{0, 1, 0}};
    const SpeedOptResult a = sdtoa(route, inst);
    const SpeedOptResult b = sdtoa(route, inst);
    REQUIRE(a.feasible);
    CHECK(a.cost == b.cost);
    CHECK(a.schedule.arrivals == b.schedule.arrivals);
    CHECK(a.schedule.speeds == b.schedule.speeds);
    CHECK(a.recursion_count == b.recursion_count);
}

TEST_CASE("sampled routes: feasibility, dominance, recursion bound") {
    Rng rng(7);
    for (const TightnessClass cls :
         {TightnessClass::kA, TightnessClass::kB, TightnessClass::kC}) {
        const test::RouteSampler sampler(16, cls, 11, 8);
        const Instance& inst = sampler.instance();
        const double a0 = inst.node(0).tw_start;
        for (int i = 0; i < 60; ++i) {
            const Route route = sampler.sample(rng, 2, 8);
            const SpeedOptResult free_res = sdtoa(route, inst);
            REQUIRE(free_res.feasible);
            CHECK(validate_route(route, free_res.schedule, inst).empty());
            CHECK(free_res.recursion_count <= 2 * route.length());

            const SpeedOptResult fixed_res = soa(route, inst, a0);
            if (fixed_res.feasible) {
                CHECK(free_res.cost <= fixed_res.cost + 1e-6);
                CHECK(validate_route(route, fixed_res.schedule, inst).empty());
            }

            // Determinism and idempotence on the sampled route.
            const SpeedOptResult again = sdtoa(route, inst);
            CHECK(again.cost == free_res.cost);
        }
    }
}
