// pollrout: command-line front end for the pollution-routing toolkit.
//
// Subcommands: solve, speedopt, verify, validate, compare, bench, gen.
// All randomness flows from --seed; fixed-seed runs are reproducible.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pollrout/ils.hpp"
#include "pollrout/io.hpp"
#include "pollrout/model.hpp"
#include "pollrout/oracle.hpp"
#include "pollrout/sdtoa.hpp"
#include "pollrout/setpart.hpp"

namespace {

using prp::Instance;
using prp::ObjectiveMode;
using prp::Route;
using prp::Solution;

struct CommonOpts {
    std::string instance_path;
    std::string format = "canonical";
    std::string mode = "free";
    std::string out;
    std::string report;
    std::string baseline;
    std::string route_spec;
    std::string solution_path;
    std::vector<std::string> instance_paths;
    int seeds = 10;
    int jobs = 1;
    std::uint64_t seed = 1;
    double time_limit = 0.0;
    double delta = 1.0;
    int scan_grid = 10000;
    double departure = 0.0;
    bool departure_set = false;
    // gen
    int gen_n = 10;
    std::string gen_class = "A";
    int gen_route_size = 5;
};

// Baseline costs for gap reporting: lines of "<instance-name> <cost>", or a
// single bare cost applied to every instance. '#' comments allowed.
struct Baseline {
    std::map<std::string, double> by_name;
    std::optional<double> global;

    std::optional<double> lookup(const std::string& name) const {
        auto it = by_name.find(name);
        if (it != by_name.end()) return it->second;
        return global;
    }
};

Baseline load_baseline(const std::string& path) {
    Baseline base;
    if (path.empty()) return base;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open baseline file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream iss(line);
        std::string first;
        if (!(iss >> first) || first[0] == '#') continue;
        double value = 0.0;
        if (iss >> value) {
            base.by_name[first] = value;
        } else {
            base.global = std::stod(first);
        }
    }
    return base;
}

Route parse_route_spec(const std::string& spec, const Instance& instance) {
    Route route;
    route.visits.push_back(0);
    std::string cleaned = spec;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream iss(cleaned);
    int id = 0;
    while (iss >> id) route.visits.push_back(id);
    if (route.length() == 1)
        throw std::runtime_error("empty route spec; pass customer ids like \"3 1 2\"");
    // Accept specs with or without explicit depot endpoints.
    if (route.visits.back() != 0) route.visits.push_back(0);
    if (route.length() > 2 && route.visits[1] == 0)
        route.visits.erase(route.visits.begin());
    prp::check_route(route, instance);
    return route;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    fn(out);
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) h = (h ^ c) * 0x100000001b3ull;
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void provenance(const std::string& cmd, const CommonOpts& opt, double wall_s) {
    std::ostringstream cfg;
    cfg << cmd << '|' << opt.mode << '|' << opt.seed << '|' << opt.seeds << '|'
        << opt.jobs << '|' << opt.time_limit << '|' << opt.delta;
    std::cerr << "# pollrout " << cmd << " seed=" << opt.seed
              << " seeds=" << opt.seeds << " jobs=" << opt.jobs
              << " mode=" << opt.mode
              << " config-hash=" << config_hash(cfg.str()) << " wall="
              << wall_s << "s\n";
}

struct PipelineResult {
    Solution best;
    double best_cost = std::numeric_limits<double>::infinity();
    double avg_cost = 0.0;
    double cpu_s = 0.0;
    bool sp_improved = false;
};

// The full heuristic pipeline: one ILS run per seed feeding a shared route
// pool, then an exact set-partitioning pass over the pool.  Seeds may run on
// worker threads; each run owns its RNG and search state, so results are
// aggregated in seed order and do not depend on scheduling.
PipelineResult run_pipeline(const Instance& instance, ObjectiveMode mode,
                            std::uint64_t base_seed, int seeds,
                            double time_limit_s, int jobs) {
    const auto t_start = std::chrono::steady_clock::now();
    PipelineResult out;
    prp::RoutePool pool(instance.num_customers());

    std::vector<prp::IlsResult> results(static_cast<std::size_t>(std::max(seeds, 0)));
    auto run_seed = [&](int s) {
        prp::IlsConfig cfg;
        cfg.mode = mode;
        cfg.seed = base_seed + static_cast<std::uint64_t>(s);
        cfg.time_limit_s = time_limit_s;
        results[static_cast<std::size_t>(s)] = prp::ils_run(instance, cfg, &pool);
    };
    const int workers = std::clamp(jobs, 1, std::max(seeds, 1));
    if (workers <= 1) {
        for (int s = 0; s < seeds; ++s) run_seed(s);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            threads.emplace_back([&] {
                for (int s = next.fetch_add(1); s < seeds; s = next.fetch_add(1))
                    run_seed(s);
            });
        for (std::thread& t : threads) t.join();
    }

    double sum = 0.0;
    for (const prp::IlsResult& res : results) {
        sum += res.best_cost;
        if (res.best_cost < out.best_cost) {
            out.best = res.best;
            out.best_cost = res.best_cost;
        }
    }
    out.avg_cost = seeds > 0 ? sum / seeds : 0.0;

    bool proven = false;
    const double sp_limit =
        time_limit_s > 0.0 ? std::min(10.0, time_limit_s) : 10.0;
    std::optional<Solution> sp =
        prp::solve_sp_solution(pool, instance, mode, sp_limit, &proven);
    if (sp && sp->total_cost < out.best_cost - 1e-9) {
        out.best = *sp;
        out.best_cost = sp->total_cost;
        out.sp_improved = true;
    }

    out.cpu_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count();
    return out;
}

int cmd_solve(const CommonOpts& opt) {
    const Instance instance = prp::load_instance(opt.instance_path, opt.format);
    const ObjectiveMode mode = prp::mode_from_name(opt.mode);
    const Baseline base = load_baseline(opt.baseline);

    const PipelineResult res = run_pipeline(instance, mode, opt.seed, opt.seeds,
                                            opt.time_limit, opt.jobs);
    if (!std::isfinite(res.best_cost)) {
        std::cerr << "error: no feasible solution found\n";
        return 1;
    }

    prp::SolutionFile file{instance.name(), mode, res.best};
    with_output(opt.out,
                [&](std::ostream& os) { prp::write_solution_file(file, instance, os); });

    prp::ReportRow row;
    row.instance = instance.name();
    row.mode = opt.mode;
    row.avg_cost = res.avg_cost;
    row.best_cost = res.best_cost;
    row.cpu_s = res.cpu_s;
    const auto bl = base.lookup(instance.name());
    row.gap_pct = bl ? prp::gap_percent(res.best_cost, *bl) : 0.0;
    with_output(opt.report,
                [&](std::ostream& os) { prp::write_report_csv({row}, os); });

    provenance("solve", opt, res.cpu_s);
    return 0;
}

int cmd_compare(const CommonOpts& opt) {
    std::vector<std::string> paths = opt.instance_paths;
    if (paths.empty() && !opt.instance_path.empty())
        paths.push_back(opt.instance_path);
    if (paths.empty()) throw std::runtime_error("compare needs --instance");

    std::vector<prp::ReportRow> rows;
    double gap_sum = 0.0, free_sum = 0.0, fixed_sum = 0.0, cpu_sum = 0.0;
    double best_free = 0.0, best_fixed = 0.0;
    for (const std::string& path : paths) {
        const Instance instance = prp::load_instance(path, opt.format);
        const PipelineResult fixed_res =
            run_pipeline(instance, ObjectiveMode::kFixedDeparture, opt.seed,
                         opt.seeds, opt.time_limit, opt.jobs);
        const PipelineResult free_res =
            run_pipeline(instance, ObjectiveMode::kFreeDeparture, opt.seed,
                         opt.seeds, opt.time_limit, opt.jobs);
        const double gap =
            prp::gap_percent(free_res.avg_cost, fixed_res.avg_cost);

        prp::ReportRow fixed_row{instance.name(), "fixed", fixed_res.avg_cost,
                                 fixed_res.best_cost, fixed_res.cpu_s, 0.0};
        prp::ReportRow free_row{instance.name(), "free", free_res.avg_cost,
                                free_res.best_cost, free_res.cpu_s, gap};
        rows.push_back(fixed_row);
        rows.push_back(free_row);
        gap_sum += gap;
        free_sum += free_res.avg_cost;
        fixed_sum += fixed_res.avg_cost;
        best_free += free_res.best_cost;
        best_fixed += fixed_res.best_cost;
        cpu_sum += fixed_res.cpu_s + free_res.cpu_s;
    }
    const double k = static_cast<double>(paths.size());
    rows.push_back(prp::ReportRow{"aggregate", "fixed", fixed_sum / k,
                                  best_fixed / k, cpu_sum / 2.0 / k, 0.0});
    rows.push_back(prp::ReportRow{"aggregate", "free", free_sum / k,
                                  best_free / k, cpu_sum / 2.0 / k,
                                  gap_sum / k});

    const std::string& dest = !opt.report.empty() ? opt.report : opt.out;
    with_output(dest, [&](std::ostream& os) { prp::write_report_csv(rows, os); });
    provenance("compare", opt, cpu_sum);
    return 0;
}

int cmd_bench(const CommonOpts& opt) {
    std::vector<std::string> paths = opt.instance_paths;
    if (paths.empty() && !opt.instance_path.empty())
        paths.push_back(opt.instance_path);
    if (paths.empty()) throw std::runtime_error("bench needs --instance");
    const ObjectiveMode mode = prp::mode_from_name(opt.mode);
    const Baseline base = load_baseline(opt.baseline);

    std::vector<prp::ReportRow> rows;
    double wall = 0.0;
    for (const std::string& path : paths) {
        const Instance instance = prp::load_instance(path, opt.format);
        const PipelineResult res = run_pipeline(instance, mode, opt.seed,
                                                opt.seeds, opt.time_limit,
                                                opt.jobs);
        prp::ReportRow row;
        row.instance = instance.name();
        row.mode = opt.mode;
        row.avg_cost = res.avg_cost;
        row.best_cost = res.best_cost;
        row.cpu_s = res.cpu_s;
        const auto bl = base.lookup(instance.name());
        row.gap_pct = bl ? prp::gap_percent(res.best_cost, *bl) : 0.0;
        rows.push_back(row);
        wall += res.cpu_s;
    }
    const std::string& dest = !opt.report.empty() ? opt.report : opt.out;
    with_output(dest, [&](std::ostream& os) { prp::write_report_csv(rows, os); });
    provenance("bench", opt, wall);
    return 0;
}

int cmd_speedopt(const CommonOpts& opt) {
    const Instance instance = prp::load_instance(opt.instance_path, opt.format);
    const ObjectiveMode mode = prp::mode_from_name(opt.mode);
    const Route route = parse_route_spec(opt.route_spec, instance);

    const double departure =
        opt.departure_set ? opt.departure : instance.node(0).tw_start;
    const prp::SpeedOptResult res = mode == ObjectiveMode::kFreeDeparture
                                        ? prp::sdtoa(route, instance)
                                        : prp::soa(route, instance, departure);
    if (!res.feasible) {
        std::cerr << "infeasible route: residual deficit " << res.max_violation
                  << " s at position " << res.violation_pos << "\n";
        return 1;
    }
    Solution sol;
    sol.routes.push_back(prp::RoutePlan{route, res.schedule});
    sol.total_cost = prp::route_cost(route, res.schedule, instance, mode);
    prp::SolutionFile file{instance.name(), mode, sol};
    with_output(opt.out,
                [&](std::ostream& os) { prp::write_solution_file(file, instance, os); });
    std::cerr << "# recursion-count " << res.recursion_count << "\n";
    return 0;
}

int cmd_verify(const CommonOpts& opt) {
    const Instance instance = prp::load_instance(opt.instance_path, opt.format);
    const Route route = parse_route_spec(opt.route_spec, instance);

    const prp::SpeedOptResult opt_res = prp::sdtoa(route, instance);
    prp::OracleConfig cfg;
    cfg.delta = opt.delta;
    const prp::OracleResult dp = prp::oracle_dp(route, instance, cfg);
    const prp::OracleResult scan =
        prp::departure_scan(route, instance, opt.scan_grid);
    const double eps = prp::epsilon_bound(route, instance, opt.delta);
    const double spacing =
        (instance.node(0).tw_end - instance.node(0).tw_start) /
        std::max(1, opt.scan_grid - 1);
    const double scan_eps = instance.params().omega_fd * spacing + prp::kTol;

    std::cout.precision(12);
    std::cout << "route-cost " << (opt_res.feasible ? opt_res.cost : NAN) << "\n";
    std::cout << "oracle-dp-cost " << (dp.feasible ? dp.cost : NAN) << "\n";
    std::cout << "departure-scan-cost " << (scan.feasible ? scan.cost : NAN)
              << "\n";
    std::cout << "epsilon " << eps << "\n";

    bool pass = true;
    if (opt_res.feasible != dp.feasible) pass = false;
    if (opt_res.feasible && dp.feasible &&
        std::abs(opt_res.cost - dp.cost) > eps)
        pass = false;
    if (opt_res.feasible && scan.feasible &&
        opt_res.cost > scan.cost + scan_eps)
        pass = false;
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int cmd_validate(const CommonOpts& opt) {
    const Instance instance = prp::load_instance(opt.instance_path, opt.format);
    std::ifstream in(opt.solution_path);
    if (!in)
        throw std::runtime_error("cannot open solution file: " + opt.solution_path);
    const prp::SolutionFile file = prp::read_solution_file(in);
    const ObjectiveMode mode = file.mode;

    const std::vector<prp::Violation> violations =
        prp::validate(file.solution, instance, mode);
    if (violations.empty()) {
        std::cout << "valid\n";
        return 0;
    }
    std::cout.precision(12);
    for (const prp::Violation& v : violations) {
        std::cout << prp::violation_kind_name(v.kind) << " route=" << v.route_index
                  << " pos=" << v.position << " magnitude=" << v.magnitude;
        if (!v.detail.empty()) std::cout << " (" << v.detail << ")";
        std::cout << "\n";
    }
    std::cout << violations.size() << " violation(s)\n";
    return 1;
}

int cmd_gen(const CommonOpts& opt) {
    const prp::TightnessClass cls =
        prp::tightness_from_letter(opt.gen_class.empty() ? 'A' : opt.gen_class[0]);
    const Instance instance = prp::generate_instance(
        opt.gen_n, cls, opt.seed, opt.gen_route_size, nullptr);
    with_output(opt.out, [&](std::ostream& os) {
        prp::write_canonical_instance(instance, os);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pollution-routing toolkit: joint route, speed and departure-"
                 "time optimization"};
    app.require_subcommand(1);
    CommonOpts opt;

    auto add_instance = [&](CLI::App* cmd, bool multi) {
        if (multi)
            cmd->add_option("--instance", opt.instance_paths,
                            "instance file(s)");
        else
            cmd->add_option("--instance", opt.instance_path, "instance file")
                ->required();
        cmd->add_option("--format", opt.format, "instance format")
            ->check(CLI::IsMember({"canonical", "prplib"}));
    };

    CLI::App* solve = app.add_subcommand(
        "solve", "run the heuristic pipeline and emit the best solution");
    add_instance(solve, false);
    solve->add_option("--mode", opt.mode)->check(CLI::IsMember({"free", "fixed"}));
    solve->add_option("--seeds", opt.seeds, "number of independent runs");
    solve->add_option("--seed", opt.seed, "base seed");
    solve->add_option("--jobs", opt.jobs,
                      "worker threads for the seed runs (1 = deterministic)");
    solve->add_option("--time-limit", opt.time_limit, "seconds per run");
    solve->add_option("--out", opt.out, "solution file (default stdout)");
    solve->add_option("--report", opt.report, "CSV report file (default stdout)");
    solve->add_option("--baseline", opt.baseline, "baseline cost file for gap%");

    CLI::App* compare = app.add_subcommand(
        "compare", "run fixed- and free-departure pipelines and report gaps");
    add_instance(compare, true);
    compare->add_option("--seeds", opt.seeds);
    compare->add_option("--seed", opt.seed);
    compare->add_option("--jobs", opt.jobs);
    compare->add_option("--time-limit", opt.time_limit);
    compare->add_option("--out", opt.out, "CSV report file (default stdout)");
    compare->add_option("--report", opt.report, "alias for --out");

    CLI::App* bench = app.add_subcommand(
        "bench", "run the pipeline over instances and emit a CSV report");
    add_instance(bench, true);
    bench->add_option("--mode", opt.mode)->check(CLI::IsMember({"free", "fixed"}));
    bench->add_option("--seeds", opt.seeds);
    bench->add_option("--seed", opt.seed);
    bench->add_option("--jobs", opt.jobs);
    bench->add_option("--time-limit", opt.time_limit);
    bench->add_option("--out", opt.out, "CSV report file (default stdout)");
    bench->add_option("--report", opt.report, "alias for --out");
    bench->add_option("--baseline", opt.baseline, "baseline cost file for gap%");

    CLI::App* speedopt = app.add_subcommand(
        "speedopt", "optimize speeds/departure on one fixed route");
    add_instance(speedopt, false);
    speedopt->add_option("--route", opt.route_spec, "customer ids, e.g. \"3 1 2\"")
        ->required();
    speedopt->add_option("--mode", opt.mode)
        ->check(CLI::IsMember({"free", "fixed"}));
    auto* dep = speedopt->add_option("--departure", opt.departure,
                                     "fixed departure time (mode=fixed)");
    speedopt->add_option("--out", opt.out, "output file (default stdout)");
    speedopt->callback([&] { opt.departure_set = dep->count() > 0; });

    CLI::App* verify = app.add_subcommand(
        "verify", "cross-check one route against the brute-force oracles");
    add_instance(verify, false);
    verify->add_option("--route", opt.route_spec, "customer ids")->required();
    verify->add_option("--delta", opt.delta, "oracle grid step (s)");
    verify->add_option("--scan-grid", opt.scan_grid, "departure scan points");

    CLI::App* validate = app.add_subcommand(
        "validate", "check a solution file against its instance");
    add_instance(validate, false);
    validate->add_option("solution", opt.solution_path, "solution file")
        ->required();

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic instance");
    gen->add_option("--n", opt.gen_n, "number of customers")->required();
    gen->add_option("--class", opt.gen_class, "window tightness: A, B or C")
        ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
    gen->add_option("--seed", opt.seed);
    gen->add_option("--route-size", opt.gen_route_size,
                    "customers per planned route");
    gen->add_option("--out", opt.out, "instance file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(solve)) return cmd_solve(opt);
        if (app.got_subcommand(compare)) return cmd_compare(opt);
        if (app.got_subcommand(bench)) return cmd_bench(opt);
        if (app.got_subcommand(speedopt)) return cmd_speedopt(opt);
        if (app.got_subcommand(verify)) return cmd_verify(opt);
        if (app.got_subcommand(validate)) return cmd_validate(opt);
        if (app.got_subcommand(gen)) return cmd_gen(opt);
    } catch (const prp::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
