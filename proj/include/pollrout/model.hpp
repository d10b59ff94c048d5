#ifndef POLLROUT_MODEL_HPP
#define POLLROUT_MODEL_HPP

#include <string>
#include <vector>

// Core domain types for the pollution-routing solver: instances, routes,
// schedules and the fuel/driver cost model everything else is built on.
//
// Unit conventions are fixed across the project: meters, seconds, kilograms,
// meters per second, and plain decimal currency.

namespace prp {

// Absolute tolerance used whenever a real-valued equality or bound is checked
// (seconds, m/s, currency).
inline constexpr double kTol = 1e-6;

enum class ObjectiveMode {
    kFixedDeparture,  // driver cost charged on the return time alone
    kFreeDeparture    // driver cost charged on route duration (return - departure)
};

// Physical and economic constants of the fuel consumption model plus the
// fleet description. w1..w4 parameterize per-arc fuel use, omega_fc/omega_fd
// convert liters and seconds into currency.
struct PrpParameters {
    double w1 = 0.0;        // 1/speed fuel term coefficient
    double w2 = 0.0;        // per-meter constant term
    double w3 = 0.0;        // per-kg load term
    double w4 = 0.0;        // speed^2 term coefficient
    double omega_fc = 0.0;  // currency per liter of fuel
    double omega_fd = 0.0;  // currency per second of driving
    double v_min = 0.0;     // m/s
    double v_max = 0.0;     // m/s
    double capacity_q = 0.0;  // kg per vehicle
    int fleet_size_m = 0;

    // Throws std::invalid_argument when any invariant is broken.
    void check() const;
};

// Benchmark constants commonly used with this cost model. Speed bounds,
// capacity and fleet size remain instance-specific and default to zero;
// callers must fill them in.
PrpParameters default_parameters();

struct Node {
    int id = 0;  // 0 is the depot
    double x = 0.0;
    double y = 0.0;
    double demand = 0.0;    // kg
    double tw_start = 0.0;  // earliest service start (s)
    double tw_end = 0.0;    // latest service start (s)
    double service = 0.0;   // s
};

// An immutable problem instance. Distances are exact Euclidean unless an
// explicit matrix is supplied at construction.
class Instance {
  public:
    Instance(std::string name, std::vector<Node> nodes, PrpParameters params);
    Instance(std::string name, std::vector<Node> nodes, PrpParameters params,
             std::vector<std::vector<double>> matrix);

    const std::string& name() const { return name_; }
    const PrpParameters& params() const { return params_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_customers() const { return num_nodes() - 1; }
    const Node& node(int id) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    bool has_matrix() const { return !matrix_.empty(); }
    const std::vector<std::vector<double>>& matrix() const { return matrix_; }

    // Meters between vertices i and j. Throws std::out_of_range on bad ids.
    double distance(int i, int j) const;

  private:
    void check_nodes() const;

    std::string name_;
    std::vector<Node> nodes_;
    PrpParameters params_;
    std::vector<std::vector<double>> matrix_;  // empty => Euclidean
};

// A depot-to-depot visit sequence: visits.front() == visits.back() == 0,
// interior entries are distinct customers.
struct Route {
    std::vector<int> visits;

    int length() const { return static_cast<int>(visits.size()); }
    int num_customers() const { return length() > 2 ? length() - 2 : 0; }
};

// Throws std::invalid_argument if the route breaks the shape invariants
// (depot endpoints, distinct interior customers, valid ids).
void check_route(const Route& route, const Instance& instance);

// Timing plan for one route. arrivals[k] is the recorded service-start time
// at visit k; speeds[k] is the speed on arc k -> k+1; waits[k] is the time
// spent idling at visit k before the recorded arrival (waits[0] == 0, the
// depot departure is arrivals[0] itself).
struct Schedule {
    std::vector<double> arrivals;
    std::vector<double> speeds;
    std::vector<double> waits;

    double departure() const { return arrivals.front(); }
    double completion() const { return arrivals.back(); }
    double duration() const { return completion() - departure(); }
};

struct RoutePlan {
    Route route;
    Schedule schedule;
};

struct Solution {
    std::vector<RoutePlan> routes;
    double total_cost = 0.0;
    // Set when a constructor/repair step could not place every customer;
    // such solutions are kept only as repair input, never accepted.
    bool infeasible_mark = false;

    int num_routes() const { return static_cast<int>(routes.size()); }
};

// ---- Cost model ----

// Load carried on arc `arc` (0-based, connecting visits[arc] -> visits[arc+1])
// under delivery semantics: the vehicle departs with the route's total demand
// and sheds each customer's demand at its visit.
double arc_load(const Route& route, int arc, const Instance& instance);

// Liters of fuel to cover dist_m meters at `speed` with `load_kg` payload.
// Throws std::invalid_argument for speed <= 0.
double arc_fuel(double dist_m, double speed, double load_kg,
                const PrpParameters& params);

// Total liters over the route under the given schedule speeds.
double route_fuel(const Route& route, const Schedule& schedule,
                  const Instance& instance);

// Route cost in currency. Fixed mode charges omega_fd on the return time,
// free mode on the route duration. Throws std::invalid_argument when the
// schedule's vector lengths do not match the route.
double route_cost(const Route& route, const Schedule& schedule,
                  const Instance& instance, ObjectiveMode mode);

double solution_cost(const Solution& solution, const Instance& instance,
                     ObjectiveMode mode);

// ---- Feasibility reporting ----

enum class ViolationKind {
    kRouteShape,
    kCoverageMissing,
    kCoverageDuplicate,
    kFleetSize,
    kCapacity,
    kTimeWindow,
    kSpeedBound,
    kNegativeWait,
    kScheduleInconsistent,
    kCostMismatch
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int route_index = -1;  // -1 for solution-level findings
    int position = -1;     // visit/arc position within the route when relevant
    double magnitude = 0.0;
    std::string detail;
};

// Per-route checks: shape, capacity, window hits, speed bounds, wait signs
// and the arrival recurrence. Coverage and fleet limits are solution-level.
std::vector<Violation> validate_route(const Route& route,
                                      const Schedule& schedule,
                                      const Instance& instance);

// Full feasibility report; empty result means feasible. Infeasibility is
// reported, never thrown.
std::vector<Violation> validate(const Solution& solution,
                                const Instance& instance,
                                ObjectiveMode mode = ObjectiveMode::kFreeDeparture);

}  // namespace prp

#endif  // POLLROUT_MODEL_HPP
