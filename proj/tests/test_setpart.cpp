#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pollrout/io.hpp"
#include "pollrout/rng.hpp"
#include "pollrout/sdtoa.hpp"
#include "pollrout/setpart.hpp"
#include "support.hpp"

using namespace prp;

namespace {

Route route_of(std::initializer_list<int> customers) {
    Route r;
    r.visits.push_back(0);
    for (int c : customers) r.visits.push_back(c);
    r.visits.push_back(0);
    return r;
}

PoolEntry entry_of(std::initializer_list<int> customers, double cost, int n) {
    PoolEntry e;
    e.route = route_of(customers);
    e.customers = CustomerSet::of_route(e.route, n);
    e.cost = cost;
    return e;
}

// Reference optimum: try every subset of pool entries.
struct BruteResult {
    double cost = std::numeric_limits<double>::infinity();
    bool found = false;
};

BruteResult brute_force_cover(const std::vector<PoolEntry>& pool, int n,
                              int max_routes) {
    BruteResult best;
    const std::size_t m = pool.size();
    REQUIRE(m <= 20);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        CustomerSet seen(n);
        double cost = 0.0;
        int used = 0;
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            if (!(mask & (std::size_t{1} << i))) continue;
            if (seen.intersects(pool[i].customers)) ok = false;
            seen.merge(pool[i].customers);
            cost += pool[i].cost;
            ++used;
        }
        if (!ok || used > max_routes || !seen.covers_all()) continue;
        if (cost < best.cost) {
            best.cost = cost;
            best.found = true;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("customer sets") {
    CustomerSet s(70);  // spans two machine words
    CHECK(s.count() == 0);
    CHECK_FALSE(s.covers_all());
    s.insert(1);
    s.insert(65);
    s.insert(70);
    CHECK(s.count() == 3);
    CHECK(s.contains(1));
    CHECK(s.contains(65));
    CHECK_FALSE(s.contains(2));

    CustomerSet t(70);
    t.insert(65);
    CHECK(s.intersects(t));
    t = CustomerSet(70);
    t.insert(2);
    CHECK_FALSE(s.intersects(t));

    t.merge(s);
    CHECK(t.count() == 4);
    CHECK(t.contains(1));

    CustomerSet full(3);
    full.insert(1);
    full.insert(2);
    full.insert(3);
    CHECK(full.covers_all());

    const Route r = route_of({3, 1});
    const CustomerSet fr = CustomerSet::of_route(r, 4);
    CHECK(fr.count() == 2);
    CHECK(fr.contains(1));
    CHECK(fr.contains(3));
    CHECK_FALSE(fr.contains(4));

    CustomerSet a(5), b(5);
    a.insert(2);
    b.insert(2);
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    b.insert(3);
    CHECK_FALSE(a == b);
}

TEST_CASE("route pool keeps the cheapest order per customer set") {
    RoutePool pool(5);
    CHECK(pool.add(route_of({1, 2}), 10.0));
    CHECK(pool.size() == 1);
    // Same customers, different order, worse cost: rejected.
    CHECK_FALSE(pool.add(route_of({2, 1}), 11.0));
    CHECK(pool.size() == 1);
    // Same customers, cheaper: replaces in place.
    CHECK(pool.add(route_of({2, 1}), 8.0));
    CHECK(pool.size() == 1);
    const std::vector<PoolEntry> snap = pool.snapshot();
    REQUIRE(snap.size() == 1);
    CHECK(snap[0].cost == doctest::Approx(8.0));
    CHECK(snap[0].route.visits == route_of({2, 1}).visits);

    CHECK(pool.add(route_of({3}), 4.0));
    CHECK(pool.size() == 2);
}

TEST_CASE("route pool capacity eviction drops the costliest entry") {
    RoutePool pool(6, 3);
    CHECK(pool.capacity() == 3);
    pool.add(route_of({1}), 5.0);
    pool.add(route_of({2}), 9.0);  // the worst
    pool.add(route_of({3}), 1.0);
    pool.add(route_of({4}), 2.0);  // forces eviction of {2}
    CHECK(pool.size() == 3);
    bool has2 = false;
    for (const PoolEntry& e : pool.snapshot())
        if (e.customers.contains(2)) has2 = true;
    CHECK_FALSE(has2);
}

TEST_CASE("route pool concurrent adds") {
    RoutePool pool(200, 500);
    auto worker = [&pool](int lo, int hi) {
        for (int c = lo; c < hi; ++c) pool.add(route_of({c}), static_cast<double>(c));
    };
    std::thread t1(worker, 1, 101);
    std::thread t2(worker, 101, 201);
    t1.join();
    t2.join();
    CHECK(pool.size() == 200);
}

TEST_CASE("branch and bound matches subset brute force on random pools") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = rng.uniform_int(4, 9);
        const int entries = rng.uniform_int(3, 14);
        const int max_routes = rng.uniform_int(2, 5);
        std::vector<PoolEntry> pool;
        std::vector<int> ids(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
        for (int e = 0; e < entries; ++e) {
            rng.shuffle(ids);
            const int k = rng.uniform_int(1, std::min(4, n));
            PoolEntry pe;
            pe.route.visits.push_back(0);
            for (int j = 0; j < k; ++j)
                pe.route.visits.push_back(ids[static_cast<std::size_t>(j)]);
            pe.route.visits.push_back(0);
            pe.customers = CustomerSet::of_route(pe.route, n);
            pe.cost = rng.uniform(1.0, 10.0);
            pool.push_back(std::move(pe));
        }

        const BruteResult brute = brute_force_cover(pool, n, max_routes);
        const SpSolveResult got = solve_sp(pool, n, max_routes, 0.0);
        CHECK(got.proven_optimal);
        if (!brute.found) {
            CHECK_FALSE(got.selection.has_value());
            continue;
        }
        REQUIRE(got.selection.has_value());
        CHECK(got.cost == doctest::Approx(brute.cost).epsilon(1e-12));
        // The selection really is an exact cover within the fleet limit.
        CustomerSet seen(n);
        double total = 0.0;
        for (const PoolEntry& e : *got.selection) {
            CHECK_FALSE(seen.intersects(e.customers));
            seen.merge(e.customers);
            total += e.cost;
        }
        CHECK(seen.covers_all());
        CHECK(static_cast<int>(got.selection->size()) <= max_routes);
        CHECK(total == doctest::Approx(got.cost).epsilon(1e-12));
    }
}

TEST_CASE("fleet limit can force a costlier cover") {
    const int n = 4;
    std::vector<PoolEntry> pool = {
        entry_of({1}, 1.0, n),       entry_of({2}, 1.0, n),
        entry_of({3, 4}, 1.0, n),    entry_of({1, 2}, 5.0, n),
    };
    const SpSolveResult three = solve_sp(pool, n, 3, 0.0);
    REQUIRE(three.selection.has_value());
    CHECK(three.cost == doctest::Approx(3.0));
    const SpSolveResult two = solve_sp(pool, n, 2, 0.0);
    REQUIRE(two.selection.has_value());
    CHECK(two.cost == doctest::Approx(6.0));
    const SpSolveResult one = solve_sp(pool, n, 1, 0.0);
    CHECK_FALSE(one.selection.has_value());
    CHECK(one.proven_optimal);
}

TEST_CASE("empty pool yields no cover") {
    const SpSolveResult r = solve_sp({}, 3, 3, 0.0);
    CHECK_FALSE(r.selection.has_value());
    CHECK(r.proven_optimal);
}

TEST_CASE("node-count deadline interrupts a matching explosion") {
    // All-pairs pool over 24 customers has ~3e11 perfect matchings. The cost
    // jitter is far above the improvement tolerance, so strictly better
    // incumbents keep appearing, the fractional bound stays loose, and the
    // search cannot close quickly: it must hit the deadline check instead.
    const int n = 24;
    Rng jitter(5);
    std::vector<PoolEntry> pool;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            pool.push_back(entry_of({i, j}, 1.0 + jitter.uniform(0.0, 0.5), n));
    const SpSolveResult r = solve_sp(pool, n, n / 2, 1e-12);
    CHECK_FALSE(r.proven_optimal);
    CHECK(r.nodes_explored > 0);
    if (r.selection.has_value()) {
        CustomerSet seen(n);
        for (const PoolEntry& e : *r.selection) {
            CHECK_FALSE(seen.intersects(e.customers));
            seen.merge(e.customers);
        }
        CHECK(seen.covers_all());
    }
}

TEST_CASE("pool solve materializes a feasible solution") {
    std::vector<Route> seeds;
    const Instance inst = generate_instance(12, TightnessClass::kA, 31, 4, &seeds);
    REQUIRE_FALSE(seeds.empty());
    RoutePool pool(inst.num_customers());
    double expected = 0.0;
    for (const Route& r : seeds) {
        const SpeedOptResult opt = sdtoa(r, inst);
        REQUIRE(opt.feasible);
        REQUIRE(pool.add(r, opt.cost));
        expected += opt.cost;
    }
    // Also pool a costlier duplicate-set route to make sure it is ignored.
    Route reversed = seeds.front();
    std::reverse(reversed.visits.begin() + 1, reversed.visits.end() - 1);
    const SpeedOptResult rev = sdtoa(reversed, inst);
    if (rev.feasible) pool.add(reversed, rev.cost);

    bool proven = false;
    const std::optional<Solution> sol = solve_sp_solution(
        pool, inst, ObjectiveMode::kFreeDeparture, 10.0, &proven);
    REQUIRE(sol.has_value());
    CHECK(proven);
    CHECK(validate(*sol, inst, ObjectiveMode::kFreeDeparture).empty());
    CHECK(sol->total_cost <= expected + kTol);
    CHECK(solution_cost(*sol, inst, ObjectiveMode::kFreeDeparture) ==
          doctest::Approx(sol->total_cost));
}

TEST_CASE("partitioning instance export") {
    const Instance inst = test::simple_instance();
    RoutePool pool(inst.num_customers());
    pool.add(route_of({1}), 8.05);
    std::ostringstream os;
    write_sp_instance(pool, inst, os);
    std::istringstream is(os.str());
    int n = -1, m = -1;
    is >> n >> m;
    CHECK(n == inst.num_customers());
    CHECK(m == inst.params().fleet_size_m);
    double cost = 0.0;
    int customer = -1;
    is >> cost >> customer;
    CHECK(cost == doctest::Approx(8.05));
    CHECK(customer == 1);
}
