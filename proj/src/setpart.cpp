#include "pollrout/setpart.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pollrout/sdtoa.hpp"

namespace prp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CustomerSet::CustomerSet(int num_customers)
    : num_customers_(num_customers),
      words_(static_cast<std::size_t>((num_customers + 63) / 64), 0) {}

CustomerSet CustomerSet::of_route(const Route& route, int num_customers) {
    CustomerSet s(num_customers);
    for (int k = 1; k + 1 < route.length(); ++k) s.insert(route.visits[k]);
    return s;
}

void CustomerSet::insert(int customer) {
    if (customer < 1 || customer > num_customers_)
        throw std::out_of_range("customer id out of range");
    const int bit = customer - 1;
    words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1} << (bit % 64);
}

bool CustomerSet::contains(int customer) const {
    if (customer < 1 || customer > num_customers_) return false;
    const int bit = customer - 1;
    return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1u;
}

bool CustomerSet::intersects(const CustomerSet& other) const {
    const std::size_t n = std::min(words_.size(), other.words_.size());
    for (std::size_t i = 0; i < n; ++i)
        if (words_[i] & other.words_[i]) return true;
    return false;
}

void CustomerSet::merge(const CustomerSet& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i)
        words_[i] |= other.words_[i];
}

int CustomerSet::count() const {
    int c = 0;
    for (std::uint64_t w : words_) c += __builtin_popcountll(w);
    return c;
}

bool CustomerSet::covers_all() const { return count() == num_customers_; }

std::size_t CustomerSet::hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t w : words_) h = h * 0x100000001b3ull ^ w;
    return h;
}

RoutePool::RoutePool(int num_customers, std::size_t capacity)
    : num_customers_(num_customers), capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("pool capacity must be > 0");
}

bool RoutePool::add(const Route& route, double cost) {
    CustomerSet key = CustomerSet::of_route(route, num_customers_);
    std::lock_guard<std::mutex> lock(mutex_);
    for (PoolEntry& e : entries_) {
        if (e.customers == key) {
            if (cost < e.cost - kTol) {
                e.route = route;
                e.cost = cost;
                return true;
            }
            return false;
        }
    }
    entries_.push_back(PoolEntry{std::move(key), route, cost});
    if (entries_.size() > capacity_) evict_worst_locked();
    return true;
}

void RoutePool::evict_worst_locked() {
    auto worst = std::max_element(
        entries_.begin(), entries_.end(),
        [](const PoolEntry& a, const PoolEntry& b) { return a.cost < b.cost; });
    entries_.erase(worst);
}

std::size_t RoutePool::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::vector<PoolEntry> RoutePool::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_;
}

namespace {

struct SpSearch {
    SpSearch(const std::vector<PoolEntry>& p, int n, int m)
        : pool(p), num_customers(n), max_routes(m) {}

    const std::vector<PoolEntry>& pool;
    int num_customers;
    int max_routes;
    std::chrono::steady_clock::time_point deadline{};
    bool has_deadline = false;

    double best_cost = kInf;
    std::vector<int> best_pick;
    std::int64_t nodes = 0;
    bool timed_out = false;

    std::vector<int> pick;

    bool out_of_time() {
        if (!has_deadline) return false;
        if ((nodes & 0x3ff) != 0) return timed_out;
        if (std::chrono::steady_clock::now() > deadline) timed_out = true;
        return timed_out;
    }

    // Fractional-cover bound: each uncovered customer pays at least the best
    // cost-per-customer among still-compatible routes serving it.
    double lower_bound(const CustomerSet& covered) const {
        std::vector<double> per_customer(static_cast<std::size_t>(num_customers) + 1,
                                         kInf);
        for (const PoolEntry& e : pool) {
            if (e.customers.intersects(covered)) continue;
            const double ratio = e.cost / std::max(1, e.customers.count());
            for (int c = 1; c <= num_customers; ++c) {
                if (e.customers.contains(c) && ratio < per_customer[static_cast<std::size_t>(c)])
                    per_customer[static_cast<std::size_t>(c)] = ratio;
            }
        }
        double lb = 0.0;
        for (int c = 1; c <= num_customers; ++c) {
            if (covered.contains(c)) continue;
            if (!std::isfinite(per_customer[static_cast<std::size_t>(c)])) return kInf;
            lb += per_customer[static_cast<std::size_t>(c)];
        }
        return lb;
    }

    void dfs(CustomerSet& covered, int used, double cost) {
        ++nodes;
        if (out_of_time()) return;
        if (covered.covers_all()) {
            if (cost < best_cost - kTol) {
                best_cost = cost;
                best_pick = pick;
            }
            return;
        }
        if (used >= max_routes) return;

        // Branch on the uncovered customer with the fewest compatible routes.
        int branch_customer = -1;
        int branch_count = std::numeric_limits<int>::max();
        for (int c = 1; c <= num_customers; ++c) {
            if (covered.contains(c)) continue;
            int cnt = 0;
            for (const PoolEntry& e : pool)
                if (e.customers.contains(c) && !e.customers.intersects(covered)) ++cnt;
            if (cnt < branch_count) {
                branch_count = cnt;
                branch_customer = c;
            }
        }
        if (branch_customer < 0 || branch_count == 0) return;

        const double lb = lower_bound(covered);
        if (cost + lb >= best_cost - kTol) return;

        for (std::size_t r = 0; r < pool.size(); ++r) {
            const PoolEntry& e = pool[r];
            if (!e.customers.contains(branch_customer) ||
                e.customers.intersects(covered))
                continue;
            if (cost + e.cost >= best_cost - kTol) continue;
            CustomerSet next = covered;
            next.merge(e.customers);
            pick.push_back(static_cast<int>(r));
            dfs(next, used + 1, cost + e.cost);
            pick.pop_back();
            if (timed_out) return;
        }
    }
};

}  // namespace

SpSolveResult solve_sp(const std::vector<PoolEntry>& pool, int num_customers,
                       int max_routes, double time_limit_s) {
    // Cheapest-first branching keeps the incumbent tight early.
    std::vector<PoolEntry> sorted = pool;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PoolEntry& a, const PoolEntry& b) {
                         return a.cost < b.cost;
                     });

    SpSearch search(sorted, num_customers, max_routes);
    if (time_limit_s > 0.0) {
        search.has_deadline = true;
        search.deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(time_limit_s));
    }

    CustomerSet covered(num_customers);
    search.dfs(covered, 0, 0.0);

    SpSolveResult result;
    result.nodes_explored = search.nodes;
    result.proven_optimal = !search.timed_out;
    if (std::isfinite(search.best_cost)) {
        std::vector<PoolEntry> selection;
        selection.reserve(search.best_pick.size());
        for (int idx : search.best_pick)
            selection.push_back(sorted[static_cast<std::size_t>(idx)]);
        result.selection = std::move(selection);
        result.cost = search.best_cost;
    }
    return result;
}

std::optional<Solution> solve_sp_solution(const RoutePool& pool,
                                          const Instance& instance,
                                          ObjectiveMode mode, double time_limit_s,
                                          bool* proven_optimal) {
    const std::vector<PoolEntry> entries = pool.snapshot();
    const SpSolveResult r = solve_sp(entries, instance.num_customers(),
                                     instance.params().fleet_size_m, time_limit_s);
    if (proven_optimal) *proven_optimal = r.proven_optimal;
    if (!r.selection) return std::nullopt;

    Solution sol;
    for (const PoolEntry& e : *r.selection) {
        const SpeedOptResult opt =
            mode == ObjectiveMode::kFreeDeparture
                ? sdtoa(e.route, instance)
                : soa(e.route, instance, instance.node(0).tw_start);
        if (!opt.feasible) return std::nullopt;  // pool invariant broken
        sol.routes.push_back(RoutePlan{e.route, opt.schedule});
    }
    sol.total_cost = solution_cost(sol, instance, mode);
    return sol;
}

void write_sp_instance(const RoutePool& pool, const Instance& instance,
                       std::ostream& os) {
    const std::vector<PoolEntry> entries = pool.snapshot();
    os << instance.num_customers() << ' ' << instance.params().fleet_size_m << '\n';
    os.precision(17);
    for (const PoolEntry& e : entries) {
        os << e.cost;
        for (int k = 1; k + 1 < e.route.length(); ++k) os << ' ' << e.route.visits[k];
        os << '\n';
    }
}

}  // namespace prp
