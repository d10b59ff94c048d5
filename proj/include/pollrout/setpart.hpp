#ifndef POLLROUT_SETPART_HPP
#define POLLROUT_SETPART_HPP

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <vector>

#include "pollrout/model.hpp"

// Pool of individually feasible routes discovered during the search, and an
// exact set-partitioning recombination over it: pick a minimum-cost subset of
// pooled routes covering every customer exactly once with at most m vehicles.

namespace prp {

// Fixed-width customer bitset sized at construction.
class CustomerSet {
  public:
    CustomerSet() = default;
    explicit CustomerSet(int num_customers);
    static CustomerSet of_route(const Route& route, int num_customers);

    void insert(int customer);
    bool contains(int customer) const;
    bool intersects(const CustomerSet& other) const;
    void merge(const CustomerSet& other);
    int count() const;
    bool covers_all() const;  // every customer 1..n present
    bool operator==(const CustomerSet& other) const = default;

    std::size_t hash() const;
    int num_customers() const { return num_customers_; }

  private:
    int num_customers_ = 0;
    std::vector<std::uint64_t> words_;
};

struct PoolEntry {
    CustomerSet customers;
    Route route;
    double cost = 0.0;
};

// Keeps at most one entry per customer set: the cheapest visit order seen.
// Bounded capacity with worst-cost eviction. add() is safe to call from
// multiple threads.
class RoutePool {
  public:
    explicit RoutePool(int num_customers, std::size_t capacity = 10000);

    // True when the route was inserted or replaced a costlier entry with the
    // same customer set. Duplicates and dominated routes return false.
    bool add(const Route& route, double cost);

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    int num_customers() const { return num_customers_; }
    // Snapshot copy; safe to use while other threads keep adding.
    std::vector<PoolEntry> snapshot() const;

  private:
    void evict_worst_locked();

    int num_customers_;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::vector<PoolEntry> entries_;
};

struct SpSolveResult {
    // Selected pool entries forming an exact cover, when one was found.
    std::optional<std::vector<PoolEntry>> selection;
    double cost = 0.0;
    bool proven_optimal = false;
    std::int64_t nodes_explored = 0;
};

// Depth-first branch and bound on the least-covered-customer rule with a
// greedy upper bound and a fractional-cover lower bound. `time_limit_s <= 0`
// means no limit. On timeout the incumbent (if any) is returned with
// proven_optimal == false.
SpSolveResult solve_sp(const std::vector<PoolEntry>& pool, int num_customers,
                       int max_routes, double time_limit_s);

// Convenience wrapper: snapshot the pool, solve, and materialize a Solution
// with schedules recomputed by the given optimizer mode.
std::optional<Solution> solve_sp_solution(const RoutePool& pool,
                                          const Instance& instance,
                                          ObjectiveMode mode, double time_limit_s,
                                          bool* proven_optimal = nullptr);

// Text export of the partitioning instance: header "n m", then one line per
// route: cost followed by the customer ids it covers.
void write_sp_instance(const RoutePool& pool, const Instance& instance,
                       std::ostream& os);

}  // namespace prp

#endif  // POLLROUT_SETPART_HPP
