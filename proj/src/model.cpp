#include "pollrout/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace prp {

namespace {

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os << what << " (" << value << ")";
    return os.str();
}

}  // namespace

void PrpParameters::check() const {
    if (!(w1 > 0.0)) throw std::invalid_argument(describe("w1 must be > 0", w1));
    if (!(w4 > 0.0)) throw std::invalid_argument(describe("w4 must be > 0", w4));
    if (w2 < 0.0) throw std::invalid_argument(describe("w2 must be >= 0", w2));
    if (w3 < 0.0) throw std::invalid_argument(describe("w3 must be >= 0", w3));
    if (!(omega_fc > 0.0))
        throw std::invalid_argument(describe("omega_fc must be > 0", omega_fc));
    if (!(omega_fd > 0.0))
        throw std::invalid_argument(describe("omega_fd must be > 0", omega_fd));
    if (!(v_min > 0.0))
        throw std::invalid_argument(describe("v_min must be > 0", v_min));
    if (v_max < v_min)
        throw std::invalid_argument(describe("v_max must be >= v_min", v_max));
    if (!(capacity_q > 0.0))
        throw std::invalid_argument(describe("capacity_q must be > 0", capacity_q));
    if (fleet_size_m < 1)
        throw std::invalid_argument("fleet_size_m must be >= 1");
}

PrpParameters default_parameters() {
    PrpParameters p;
    p.w1 = 1.01763908e-3;
    p.w2 = 5.33605218e-5;
    p.w3 = 8.40323178e-9;
    p.w4 = 1.41223439e-7;
    p.omega_fc = 1.4;
    p.omega_fd = 2.22222222e-3;
    return p;
}

Instance::Instance(std::string name, std::vector<Node> nodes, PrpParameters params)
    : name_(std::move(name)), nodes_(std::move(nodes)), params_(params) {
    params_.check();
    check_nodes();
}

Instance::Instance(std::string name, std::vector<Node> nodes, PrpParameters params,
                   std::vector<std::vector<double>> matrix)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      params_(params),
      matrix_(std::move(matrix)) {
    params_.check();
    check_nodes();
    const std::size_t n = nodes_.size();
    if (matrix_.size() != n)
        throw std::invalid_argument("distance matrix must be (n+1) x (n+1)");
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix_[i].size() != n)
            throw std::invalid_argument("distance matrix must be square");
        for (std::size_t j = 0; j < n; ++j) {
            if (matrix_[i][j] < 0.0)
                throw std::invalid_argument("distance matrix entries must be >= 0");
        }
        if (matrix_[i][i] != 0.0)
            throw std::invalid_argument("distance matrix diagonal must be zero");
    }
}

void Instance::check_nodes() const {
    if (nodes_.empty()) throw std::invalid_argument("instance has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        if (nd.id != static_cast<int>(i))
            throw std::invalid_argument("node ids must be 0..n in order");
        if (nd.tw_start > nd.tw_end)
            throw std::invalid_argument("time window start must be <= end");
        if (nd.demand < 0.0) throw std::invalid_argument("demand must be >= 0");
        if (nd.service < 0.0) throw std::invalid_argument("service must be >= 0");
    }
    if (nodes_[0].demand != 0.0 || nodes_[0].service != 0.0)
        throw std::invalid_argument("depot demand and service must be zero");
}

const Node& Instance::node(int id) const {
    if (id < 0 || id >= num_nodes())
        throw std::out_of_range("node id out of range");
    return nodes_[static_cast<std::size_t>(id)];
}

double Instance::distance(int i, int j) const {
    if (i < 0 || i >= num_nodes() || j < 0 || j >= num_nodes())
        throw std::out_of_range("vertex id out of range");
    if (has_matrix()) return matrix_[i][j];
    const double dx = nodes_[i].x - nodes_[j].x;
    const double dy = nodes_[i].y - nodes_[j].y;
    return std::sqrt(dx * dx + dy * dy);
}

void check_route(const Route& route, const Instance& instance) {
    if (route.length() < 3)
        throw std::invalid_argument("route needs at least depot, one customer, depot");
    if (route.visits.front() != 0 || route.visits.back() != 0)
        throw std::invalid_argument("route must start and end at the depot");
    std::unordered_set<int> seen;
    for (int k = 1; k + 1 < route.length(); ++k) {
        const int v = route.visits[k];
        if (v <= 0 || v >= instance.num_nodes())
            throw std::invalid_argument("route visits an invalid customer id");
        if (!seen.insert(v).second)
            throw std::invalid_argument("route visits a customer twice");
    }
}

double arc_load(const Route& route, int arc, const Instance& instance) {
    if (arc < 0 || arc >= route.length() - 1)
        throw std::out_of_range("arc index out of range");
    double load = 0.0;
    for (int k = arc + 1; k < route.length(); ++k)
        load += instance.node(route.visits[k]).demand;
    return load;
}

double arc_fuel(double dist_m, double speed, double load_kg,
                const PrpParameters& params) {
    if (speed <= 0.0) throw std::invalid_argument("speed must be > 0");
    return dist_m * (params.w1 / speed + params.w2 + params.w3 * load_kg +
                     params.w4 * speed * speed);
}

double route_fuel(const Route& route, const Schedule& schedule,
                  const Instance& instance) {
    const int arcs = route.length() - 1;
    if (static_cast<int>(schedule.speeds.size()) != arcs)
        throw std::invalid_argument("schedule speeds length does not match route");
    double liters = 0.0;
    for (int k = 0; k < arcs; ++k) {
        const double d = instance.distance(route.visits[k], route.visits[k + 1]);
        liters += arc_fuel(d, schedule.speeds[k], arc_load(route, k, instance),
                           instance.params());
    }
    return liters;
}

double route_cost(const Route& route, const Schedule& schedule,
                  const Instance& instance, ObjectiveMode mode) {
    const int len = route.length();
    if (static_cast<int>(schedule.arrivals.size()) != len ||
        static_cast<int>(schedule.waits.size()) != len ||
        static_cast<int>(schedule.speeds.size()) != len - 1)
        throw std::invalid_argument("schedule lengths do not match route");
    const PrpParameters& p = instance.params();
    const double fuel = route_fuel(route, schedule, instance);
    const double driver = mode == ObjectiveMode::kFixedDeparture
                              ? schedule.completion()
                              : schedule.duration();
    return p.omega_fc * fuel + p.omega_fd * driver;
}

double solution_cost(const Solution& solution, const Instance& instance,
                     ObjectiveMode mode) {
    double total = 0.0;
    for (const RoutePlan& rp : solution.routes)
        total += route_cost(rp.route, rp.schedule, instance, mode);
    return total;
}

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::kRouteShape: return "route-shape";
        case ViolationKind::kCoverageMissing: return "coverage-missing";
        case ViolationKind::kCoverageDuplicate: return "coverage-duplicate";
        case ViolationKind::kFleetSize: return "fleet-size";
        case ViolationKind::kCapacity: return "capacity";
        case ViolationKind::kTimeWindow: return "time-window";
        case ViolationKind::kSpeedBound: return "speed-bound";
        case ViolationKind::kNegativeWait: return "negative-wait";
        case ViolationKind::kScheduleInconsistent: return "schedule-inconsistent";
        case ViolationKind::kCostMismatch: return "cost-mismatch";
    }
    return "unknown";
}

namespace {

void add_violation(std::vector<Violation>& out, ViolationKind kind, int route_index,
                   int position, double magnitude, std::string detail) {
    out.push_back(Violation{kind, route_index, position, magnitude, std::move(detail)});
}

}  // namespace

std::vector<Violation> validate_route(const Route& route, const Schedule& schedule,
                                      const Instance& instance) {
    std::vector<Violation> out;
    const int len = route.length();

    if (len < 3 || route.visits.front() != 0 || route.visits.back() != 0) {
        add_violation(out, ViolationKind::kRouteShape, -1, 0, 0.0,
                      "route must be depot -> customers -> depot");
        return out;
    }
    std::unordered_set<int> seen;
    for (int k = 1; k + 1 < len; ++k) {
        const int v = route.visits[k];
        if (v <= 0 || v >= instance.num_nodes()) {
            add_violation(out, ViolationKind::kRouteShape, -1, k, 0.0,
                          "invalid customer id " + std::to_string(v));
            return out;
        }
        if (!seen.insert(v).second)
            add_violation(out, ViolationKind::kCoverageDuplicate, -1, k, 0.0,
                          "customer " + std::to_string(v) + " repeated in route");
    }

    if (static_cast<int>(schedule.arrivals.size()) != len ||
        static_cast<int>(schedule.waits.size()) != len ||
        static_cast<int>(schedule.speeds.size()) != len - 1) {
        add_violation(out, ViolationKind::kScheduleInconsistent, -1, 0, 0.0,
                      "schedule vector lengths do not match route");
        return out;
    }

    const PrpParameters& p = instance.params();

    double demand = 0.0;
    for (int k = 1; k + 1 < len; ++k) demand += instance.node(route.visits[k]).demand;
    if (demand > p.capacity_q + kTol)
        add_violation(out, ViolationKind::kCapacity, -1, 0, demand - p.capacity_q,
                      "route demand exceeds capacity");

    for (int k = 0; k < len; ++k) {
        const Node& nd = instance.node(route.visits[k]);
        const double t = schedule.arrivals[k];
        if (t < nd.tw_start - kTol)
            add_violation(out, ViolationKind::kTimeWindow, -1, k, nd.tw_start - t,
                          "arrival before window opens at visit " + std::to_string(k));
        if (t > nd.tw_end + kTol)
            add_violation(out, ViolationKind::kTimeWindow, -1, k, t - nd.tw_end,
                          "arrival after window closes at visit " + std::to_string(k));
        if (schedule.waits[k] < -kTol)
            add_violation(out, ViolationKind::kNegativeWait, -1, k, -schedule.waits[k],
                          "negative waiting time");
    }
    if (schedule.waits[0] > kTol)
        add_violation(out, ViolationKind::kScheduleInconsistent, -1, 0,
                      schedule.waits[0], "waiting at the depot start is not allowed");

    for (int k = 0; k + 1 < len; ++k) {
        const double v = schedule.speeds[k];
        if (v < p.v_min - kTol)
            add_violation(out, ViolationKind::kSpeedBound, -1, k, p.v_min - v,
                          "speed below v_min on arc " + std::to_string(k));
        if (v > p.v_max + kTol)
            add_violation(out, ViolationKind::kSpeedBound, -1, k, v - p.v_max,
                          "speed above v_max on arc " + std::to_string(k));

        // Arrival recurrence: next = current + service + travel + wait-at-head.
        const double d = instance.distance(route.visits[k], route.visits[k + 1]);
        const double tau = instance.node(route.visits[k]).service;
        const double travel = v > 0.0 ? d / v : 0.0;
        const double expected =
            schedule.arrivals[k] + tau + travel + schedule.waits[k + 1];
        const double err = std::abs(schedule.arrivals[k + 1] - expected);
        if (err > kTol)
            add_violation(out, ViolationKind::kScheduleInconsistent, -1, k + 1, err,
                          "arrival at visit " + std::to_string(k + 1) +
                              " inconsistent with speed/wait on arc " +
                              std::to_string(k));
    }
    return out;
}

std::vector<Violation> validate(const Solution& solution, const Instance& instance,
                                ObjectiveMode mode) {
    std::vector<Violation> out;
    const PrpParameters& p = instance.params();

    if (solution.num_routes() > p.fleet_size_m)
        add_violation(out, ViolationKind::kFleetSize, -1, -1,
                      solution.num_routes() - p.fleet_size_m,
                      "more routes than vehicles");

    std::vector<int> count(static_cast<std::size_t>(instance.num_nodes()), 0);
    for (int r = 0; r < solution.num_routes(); ++r) {
        const RoutePlan& rp = solution.routes[static_cast<std::size_t>(r)];
        for (Violation v : validate_route(rp.route, rp.schedule, instance)) {
            v.route_index = r;
            out.push_back(std::move(v));
        }
        for (int k = 1; k + 1 < rp.route.length(); ++k) {
            const int c = rp.route.visits[k];
            if (c > 0 && c < instance.num_nodes()) ++count[static_cast<std::size_t>(c)];
        }
    }
    for (int c = 1; c < instance.num_nodes(); ++c) {
        if (count[static_cast<std::size_t>(c)] == 0)
            add_violation(out, ViolationKind::kCoverageMissing, -1, c, 0.0,
                          "customer " + std::to_string(c) + " not visited");
        else if (count[static_cast<std::size_t>(c)] > 1)
            add_violation(out, ViolationKind::kCoverageDuplicate, -1, c,
                          count[static_cast<std::size_t>(c)] - 1,
                          "customer " + std::to_string(c) + " visited more than once");
    }

    bool schedules_ok = true;
    for (const Violation& v : out) {
        if (v.kind == ViolationKind::kScheduleInconsistent ||
            v.kind == ViolationKind::kRouteShape)
            schedules_ok = false;
    }
    if (schedules_ok) {
        const double recomputed = solution_cost(solution, instance, mode);
        const double err = std::abs(recomputed - solution.total_cost);
        if (err > kTol)
            add_violation(out, ViolationKind::kCostMismatch, -1, -1, err,
                          "stored total cost disagrees with the cost model");
    }
    return out;
}

}  // namespace prp
