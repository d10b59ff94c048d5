#pragma once

// Shared fixtures for the test binaries.

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pollrout/io.hpp"
#include "pollrout/model.hpp"
#include "pollrout/rng.hpp"

namespace prp::test {

// One customer 10 km from the depot (3-4-5 triangle scaled): distance is
// exactly 10000 m each way. Demand 50 kg, service 600 s, window [a1, b1].
inline Instance simple_instance(double a1 = 0.0, double b1 = 20000.0) {
    PrpParameters p = default_parameters();
    p.v_min = 5.0;
    p.v_max = 25.0;
    p.capacity_q = 1000.0;
    p.fleet_size_m = 3;
    std::vector<Node> nodes = {
        Node{0, 0.0, 0.0, 0.0, 0.0, 20000.0, 0.0},
        Node{1, 6000.0, 8000.0, 50.0, a1, b1, 600.0},
    };
    return Instance("simple", std::move(nodes), p);
}

// Feasible random routes, drawn as order-preserving subsequences of a
// generated instance's planned routes. Dropping stops only lets the vehicle
// arrive earlier (triangle inequality), so every subsequence stays feasible.
class RouteSampler {
  public:
    // `depot_tw_end > 0` narrows the depot window after generation (planned
    // routes finish far earlier, so they stay feasible); useful to keep the
    // discretized oracle's lattice small.
    RouteSampler(int num_customers, TightnessClass cls, std::uint64_t seed,
                 int route_size, double depot_tw_end = -1.0)
        : instance_(build(num_customers, cls, seed, route_size, &seeds_,
                          depot_tw_end)) {}

    const Instance& instance() const { return instance_; }
    const std::vector<Route>& seed_routes() const { return seeds_; }

    Route sample(Rng& rng, int min_customers, int max_customers) const {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const Route& base = seeds_[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(seeds_.size()) - 1))];
            const int m = base.num_customers();
            if (m < min_customers) continue;
            const int k = rng.uniform_int(min_customers, std::min(max_customers, m));
            std::vector<int> idx(static_cast<std::size_t>(m));
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(idx);
            idx.resize(static_cast<std::size_t>(k));
            std::sort(idx.begin(), idx.end());
            Route route;
            route.visits.push_back(0);
            for (int i : idx)
                route.visits.push_back(base.visits[static_cast<std::size_t>(1 + i)]);
            route.visits.push_back(0);
            return route;
        }
        throw std::runtime_error("no seed route long enough to sample from");
    }

  private:
    static Instance build(int num_customers, TightnessClass cls,
                          std::uint64_t seed, int route_size,
                          std::vector<Route>* seeds, double depot_tw_end) {
        Instance inst =
            generate_instance(num_customers, cls, seed, route_size, seeds);
        if (depot_tw_end <= 0.0) return inst;
        std::vector<Node> nodes = inst.nodes();
        nodes[0].tw_end = depot_tw_end;
        return Instance(inst.name(), std::move(nodes), inst.params());
    }

    std::vector<Route> seeds_;
    Instance instance_;
};

}  // namespace prp::test
