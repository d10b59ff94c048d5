#include "pollrout/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pollrout/rng.hpp"
#include "pollrout/sdtoa.hpp"

namespace prp {

ParseError::ParseError(const std::string& message, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line) {}

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

struct Line {
    int number = 0;
    std::vector<std::string> tokens;
};

// Line-oriented reader skipping blanks and '#' comments.
class LineReader {
  public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(Line& line) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++count_;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            std::vector<std::string> tokens = tokenize(raw);
            if (tokens.empty() || tokens[0][0] == '#') continue;
            line = Line{count_, std::move(tokens)};
            return true;
        }
        return false;
    }

    int last_line() const { return count_; }

  private:
    std::istream& in_;
    int count_ = 0;
};

double to_double(const std::string& tok, int line) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("expected a number, got '" + tok + "'", line);
    return v;
}

int to_int(const std::string& tok, int line) {
    const double v = to_double(tok, line);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ParseError("expected an integer, got '" + tok + "'", line);
    return static_cast<int>(v);
}

bool all_numeric(const std::vector<std::string>& tokens) {
    for (const std::string& tok : tokens) {
        const char* begin = tok.c_str();
        char* end = nullptr;
        std::strtod(begin, &end);
        if (end == begin || *end != '\0') return false;
    }
    return !tokens.empty();
}

Line expect(LineReader& reader, const std::string& keyword,
            std::size_t min_tokens) {
    Line line;
    if (!reader.next(line))
        throw ParseError("unexpected end of file, expected '" + keyword + "'",
                         reader.last_line() + 1);
    if (line.tokens[0] != keyword)
        throw ParseError("expected '" + keyword + "', got '" + line.tokens[0] + "'",
                         line.number);
    if (line.tokens.size() < min_tokens)
        throw ParseError("'" + keyword + "' line is missing fields", line.number);
    return line;
}

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < tokens.size(); ++i) {
        if (i > from) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

Instance read_canonical_instance(std::istream& in) {
    LineReader reader(in);

    Line header;
    if (!reader.next(header))
        throw ParseError("empty input, expected 'prp-instance v1'", 1);
    if (header.tokens.size() < 2 || header.tokens[0] != "prp-instance" ||
        header.tokens[1] != "v1")
        throw ParseError("expected header 'prp-instance v1'", header.number);

    const Line name_line = expect(reader, "name", 2);
    const std::string name = join_tokens(name_line.tokens, 1);

    const Line params_line = expect(reader, "params", 7);
    PrpParameters params;
    params.w1 = to_double(params_line.tokens[1], params_line.number);
    params.w2 = to_double(params_line.tokens[2], params_line.number);
    params.w3 = to_double(params_line.tokens[3], params_line.number);
    params.w4 = to_double(params_line.tokens[4], params_line.number);
    params.omega_fc = to_double(params_line.tokens[5], params_line.number);
    params.omega_fd = to_double(params_line.tokens[6], params_line.number);

    const Line limits_line = expect(reader, "limits", 5);
    params.v_min = to_double(limits_line.tokens[1], limits_line.number);
    params.v_max = to_double(limits_line.tokens[2], limits_line.number);
    params.capacity_q = to_double(limits_line.tokens[3], limits_line.number);
    params.fleet_size_m = to_int(limits_line.tokens[4], limits_line.number);

    const Line nodes_line = expect(reader, "nodes", 2);
    const int n = to_int(nodes_line.tokens[1], nodes_line.number);
    if (n < 2)
        throw ParseError("an instance needs a depot and at least one customer",
                         nodes_line.number);

    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Line row;
        if (!reader.next(row))
            throw ParseError("unexpected end of file inside node list",
                             reader.last_line() + 1);
        if (row.tokens.size() != 7)
            throw ParseError("node line needs 7 fields: id x y demand tw_start "
                             "tw_end service",
                             row.number);
        Node node;
        node.id = to_int(row.tokens[0], row.number);
        if (node.id != i)
            throw ParseError("node ids must be consecutive from 0", row.number);
        node.x = to_double(row.tokens[1], row.number);
        node.y = to_double(row.tokens[2], row.number);
        node.demand = to_double(row.tokens[3], row.number);
        node.tw_start = to_double(row.tokens[4], row.number);
        node.tw_end = to_double(row.tokens[5], row.number);
        node.service = to_double(row.tokens[6], row.number);
        nodes.push_back(node);
    }

    Line tail;
    if (!reader.next(tail))
        throw ParseError("unexpected end of file, expected 'matrix' or 'end'",
                         reader.last_line() + 1);
    if (tail.tokens[0] == "matrix") {
        std::vector<std::vector<double>> matrix;
        matrix.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Line row;
            if (!reader.next(row))
                throw ParseError("unexpected end of file inside matrix",
                                 reader.last_line() + 1);
            if (static_cast<int>(row.tokens.size()) != n)
                throw ParseError("matrix row needs exactly one entry per node",
                                 row.number);
            std::vector<double> vals;
            vals.reserve(static_cast<std::size_t>(n));
            for (const std::string& tok : row.tokens)
                vals.push_back(to_double(tok, row.number));
            matrix.push_back(std::move(vals));
        }
        expect(reader, "end", 1);
        return Instance(name, std::move(nodes), params, std::move(matrix));
    }
    if (tail.tokens[0] != "end")
        throw ParseError("expected 'matrix' or 'end', got '" + tail.tokens[0] + "'",
                         tail.number);
    return Instance(name, std::move(nodes), params);
}

void write_canonical_instance(const Instance& instance, std::ostream& out) {
    const PrpParameters& p = instance.params();
    out.precision(17);
    out << "prp-instance v1\n";
    out << "name " << instance.name() << '\n';
    out << "params " << p.w1 << ' ' << p.w2 << ' ' << p.w3 << ' ' << p.w4 << ' '
        << p.omega_fc << ' ' << p.omega_fd << '\n';
    out << "limits " << p.v_min << ' ' << p.v_max << ' ' << p.capacity_q << ' '
        << p.fleet_size_m << '\n';
    out << "nodes " << instance.num_nodes() << '\n';
    for (const Node& node : instance.nodes()) {
        out << node.id << ' ' << node.x << ' ' << node.y << ' ' << node.demand
            << ' ' << node.tw_start << ' ' << node.tw_end << ' ' << node.service
            << '\n';
    }
    if (instance.has_matrix()) {
        out << "matrix\n";
        for (const std::vector<double>& row : instance.matrix()) {
            for (std::size_t j = 0; j < row.size(); ++j)
                out << (j ? " " : "") << row[j];
            out << '\n';
        }
    }
    out << "end\n";
}

Instance read_prplib_instance(std::istream& in, const std::string& name) {
    std::string raw;
    int line_no = 0;
    int stage = 0;  // 0: seek VEHICLE, 1: fleet row, 2: seek CUSTOMER, 3: rows
    int fleet = 0;
    double capacity = 0.0;
    std::vector<Node> nodes;

    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::vector<std::string> tokens = tokenize(raw);
        if (tokens.empty()) continue;
        std::string head = tokens[0];
        std::transform(head.begin(), head.end(), head.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        switch (stage) {
            case 0:
                if (head.rfind("VEHICLE", 0) == 0) stage = 1;
                break;
            case 1:
                if (all_numeric(tokens) && tokens.size() >= 2) {
                    fleet = to_int(tokens[0], line_no);
                    capacity = to_double(tokens[1], line_no);
                    stage = 2;
                }
                break;
            case 2:
                if (head.rfind("CUSTOMER", 0) == 0) stage = 3;
                break;
            case 3:
                if (all_numeric(tokens) && tokens.size() >= 7) {
                    Node node;
                    node.id = static_cast<int>(nodes.size());
                    node.x = to_double(tokens[1], line_no);
                    node.y = to_double(tokens[2], line_no);
                    node.demand = to_double(tokens[3], line_no);
                    node.tw_start = to_double(tokens[4], line_no);
                    node.tw_end = to_double(tokens[5], line_no);
                    node.service = to_double(tokens[6], line_no);
                    nodes.push_back(node);
                }
                break;
            default:
                break;
        }
    }
    if (stage < 3)
        throw ParseError("no VEHICLE/CUSTOMER sections found", line_no);
    if (nodes.size() < 2)
        throw ParseError("fewer than two node rows found", line_no);

    PrpParameters params = default_parameters();
    params.v_min = 5.0;
    params.v_max = 25.0;
    params.capacity_q = capacity;
    params.fleet_size_m =
        fleet > 0 ? fleet : static_cast<int>(nodes.size()) - 1;
    return Instance(name, std::move(nodes), params);
}

Instance load_instance(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    if (format == "canonical") return read_canonical_instance(in);
    if (format == "prplib") {
        // Use the file stem as the instance name.
        std::string name = path;
        const std::size_t slash = name.find_last_of("/\\");
        if (slash != std::string::npos) name = name.substr(slash + 1);
        const std::size_t dot = name.find_last_of('.');
        if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
        return read_prplib_instance(in, name);
    }
    throw std::runtime_error("unknown instance format: " + format);
}

void write_solution_file(const SolutionFile& file, const Instance& instance,
                         std::ostream& out) {
    out.precision(17);
    out << "prp-solution v1\n";
    out << "instance " << file.instance_name << '\n';
    out << "routes " << file.solution.num_routes() << '\n';
    for (const RoutePlan& plan : file.solution.routes) {
        out << "route";
        for (int v : plan.route.visits) out << ' ' << v;
        out << '\n';
        out << "departure " << plan.schedule.departure() << '\n';
        out << "arrivals";
        for (double t : plan.schedule.arrivals) out << ' ' << t;
        out << '\n';
        out << "speeds";
        for (double v : plan.schedule.speeds) out << ' ' << v;
        out << '\n';
        out << "waits";
        for (double w : plan.schedule.waits) out << ' ' << w;
        out << '\n';
        out << "fuel " << route_fuel(plan.route, plan.schedule, instance) << '\n';
        out << "cost "
            << route_cost(plan.route, plan.schedule, instance, file.mode) << '\n';
    }
    out << "total_cost " << file.solution.total_cost << '\n';
    out << "mode " << mode_name(file.mode) << '\n';
    out << "end\n";
}

SolutionFile read_solution_file(std::istream& in) {
    LineReader reader(in);

    Line header;
    if (!reader.next(header))
        throw ParseError("empty input, expected 'prp-solution v1'", 1);
    if (header.tokens.size() < 2 || header.tokens[0] != "prp-solution" ||
        header.tokens[1] != "v1")
        throw ParseError("expected header 'prp-solution v1'", header.number);

    SolutionFile file;
    const Line name_line = expect(reader, "instance", 2);
    file.instance_name = join_tokens(name_line.tokens, 1);
    const Line routes_line = expect(reader, "routes", 2);
    const int num_routes = to_int(routes_line.tokens[1], routes_line.number);
    if (num_routes < 0)
        throw ParseError("negative route count", routes_line.number);

    for (int r = 0; r < num_routes; ++r) {
        const Line route_line = expect(reader, "route", 3);
        RoutePlan plan;
        for (std::size_t i = 1; i < route_line.tokens.size(); ++i)
            plan.route.visits.push_back(
                to_int(route_line.tokens[i], route_line.number));
        const std::size_t len = plan.route.visits.size();

        expect(reader, "departure", 2);  // redundant with arrivals[0]

        const Line arr_line = expect(reader, "arrivals", 1 + len);
        if (arr_line.tokens.size() != 1 + len)
            throw ParseError("arrivals line needs one entry per visit",
                             arr_line.number);
        for (std::size_t i = 1; i < arr_line.tokens.size(); ++i)
            plan.schedule.arrivals.push_back(
                to_double(arr_line.tokens[i], arr_line.number));

        const Line spd_line = expect(reader, "speeds", len);
        if (spd_line.tokens.size() != len)
            throw ParseError("speeds line needs one entry per arc",
                             spd_line.number);
        for (std::size_t i = 1; i < spd_line.tokens.size(); ++i)
            plan.schedule.speeds.push_back(
                to_double(spd_line.tokens[i], spd_line.number));

        const Line wait_line = expect(reader, "waits", 1 + len);
        if (wait_line.tokens.size() != 1 + len)
            throw ParseError("waits line needs one entry per visit",
                             wait_line.number);
        for (std::size_t i = 1; i < wait_line.tokens.size(); ++i)
            plan.schedule.waits.push_back(
                to_double(wait_line.tokens[i], wait_line.number));

        expect(reader, "fuel", 2);  // informational; recomputable
        expect(reader, "cost", 2);

        file.solution.routes.push_back(std::move(plan));
    }
    const Line total_line = expect(reader, "total_cost", 2);
    file.solution.total_cost = to_double(total_line.tokens[1], total_line.number);
    const Line mode_line = expect(reader, "mode", 2);
    file.mode = mode_from_name(mode_line.tokens[1]);
    expect(reader, "end", 1);
    return file;
}

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << "instance,mode,avg_cost,best_cost,cpu_s,gap_pct\n";
    out.precision(10);
    for (const ReportRow& r : rows) {
        out << r.instance << ',' << r.mode << ',' << r.avg_cost << ','
            << r.best_cost << ',' << r.cpu_s << ',' << r.gap_pct << '\n';
    }
}

double gap_percent(double value, double baseline) {
    if (baseline == 0.0)
        throw std::invalid_argument("gap baseline must be nonzero");
    return 100.0 * (value - baseline) / baseline;
}

const char* mode_name(ObjectiveMode mode) {
    return mode == ObjectiveMode::kFreeDeparture ? "free" : "fixed";
}

ObjectiveMode mode_from_name(const std::string& name) {
    if (name == "free") return ObjectiveMode::kFreeDeparture;
    if (name == "fixed") return ObjectiveMode::kFixedDeparture;
    throw std::invalid_argument("unknown mode '" + name + "' (use free|fixed)");
}

TightnessClass tightness_from_letter(char letter) {
    switch (letter) {
        case 'A': case 'a': return TightnessClass::kA;
        case 'B': case 'b': return TightnessClass::kB;
        case 'C': case 'c': return TightnessClass::kC;
        default:
            throw std::invalid_argument(
                "unknown tightness class (use A, B or C)");
    }
}

char tightness_letter(TightnessClass cls) {
    switch (cls) {
        case TightnessClass::kA: return 'A';
        case TightnessClass::kB: return 'B';
        case TightnessClass::kC: return 'C';
    }
    return '?';
}

Instance generate_instance(int num_customers, TightnessClass cls,
                           std::uint64_t seed, int route_size,
                           std::vector<Route>* seed_routes) {
    if (num_customers < 1)
        throw std::invalid_argument("need at least one customer");
    if (route_size < 1) throw std::invalid_argument("route_size must be >= 1");

    const char letter = tightness_letter(cls);
    double half_width = 1800.0;
    if (cls == TightnessClass::kB) half_width = 600.0;
    if (cls == TightnessClass::kC) half_width = 180.0;

    Rng rng(seed ^ (static_cast<std::uint64_t>(letter) << 56) ^
            (static_cast<std::uint64_t>(num_customers) << 40) ^
            (static_cast<std::uint64_t>(route_size) << 32));

    PrpParameters params = default_parameters();
    params.v_min = 5.0;
    params.v_max = 25.0;
    params.capacity_q = 1.0;  // placeholder until chunk demands are known
    params.fleet_size_m = 1;
    const double cruise = v_star_fuel_driver(params);

    const double box = 10000.0;  // meters
    const double service = 180.0;

    std::vector<Node> nodes(static_cast<std::size_t>(num_customers) + 1);
    nodes[0] = Node{0, box / 2, box / 2, 0.0, 0.0, 86400.0, 0.0};
    for (int c = 1; c <= num_customers; ++c) {
        Node& node = nodes[static_cast<std::size_t>(c)];
        node.id = c;
        node.x = rng.uniform(0.0, box);
        node.y = rng.uniform(0.0, box);
        node.demand = static_cast<double>(rng.uniform_int(50, 150));
        node.service = service;
    }
    auto dist = [&](int i, int j) {
        const Node& a = nodes[static_cast<std::size_t>(i)];
        const Node& b = nodes[static_cast<std::size_t>(j)];
        return std::hypot(a.x - b.x, a.y - b.y);
    };

    // Group customers into planned routes, pick a random reference start per
    // route, and carve each customer's window around its simulated visit time.
    std::vector<int> order(static_cast<std::size_t>(num_customers));
    for (int c = 1; c <= num_customers; ++c)
        order[static_cast<std::size_t>(c - 1)] = c;
    rng.shuffle(order);

    double max_chunk_demand = 0.0;
    int num_chunks = 0;
    if (seed_routes) seed_routes->clear();
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(route_size)) {
        const std::size_t end =
            std::min(order.size(), begin + static_cast<std::size_t>(route_size));
        ++num_chunks;
        const double t0 = rng.uniform(300.0, 900.0);
        double t = t0;
        int prev = 0;
        double chunk_demand = 0.0;
        Route chunk;
        chunk.visits.push_back(0);
        for (std::size_t i = begin; i < end; ++i) {
            const int c = order[i];
            t += dist(prev, c) / cruise;
            Node& node = nodes[static_cast<std::size_t>(c)];
            const double lo = rng.uniform(0.5, 1.0) * half_width;
            const double hi = rng.uniform(0.5, 1.0) * half_width;
            node.tw_start = std::max(0.0, t - lo);
            node.tw_end = t + hi;
            chunk_demand += node.demand;
            t += node.service;
            prev = c;
            chunk.visits.push_back(c);
        }
        chunk.visits.push_back(0);
        if (seed_routes) seed_routes->push_back(std::move(chunk));
        max_chunk_demand = std::max(max_chunk_demand, chunk_demand);
    }

    params.capacity_q = std::ceil(1.1 * max_chunk_demand);
    params.fleet_size_m = num_chunks + 2;

    std::ostringstream name;
    name << letter << "-n" << num_customers << "-s" << seed;
    return Instance(name.str(), std::move(nodes), params);
}

}  // namespace prp
