#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pollrout/model.hpp"

namespace prp {

// Thrown by every reader; `line` is 1-based within the input stream.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, int line);
    int line() const { return line_; }

  private:
    int line_;
};

// ---- Instance files ----
//
// The native format is line- and keyword-based, versioned, and written with
// 17 significant digits so a write/read cycle reproduces the instance bit for
// bit. See README for the layout. The `prplib` reader accepts the classic
// whitespace-separated VRPTW benchmark layout (VEHICLE/CUSTOMER sections) and
// fills the cost-model constants with the package defaults.

Instance read_canonical_instance(std::istream& in);
void write_canonical_instance(const Instance& instance, std::ostream& out);

Instance read_prplib_instance(std::istream& in, const std::string& name);

// Open `path` and parse it as `format` ("canonical" or "prplib").
// Throws ParseError on malformed content and std::runtime_error on I/O
// failure or an unknown format name.
Instance load_instance(const std::string& path, const std::string& format);

// ---- Solution files ----

struct SolutionFile {
    std::string instance_name;
    ObjectiveMode mode = ObjectiveMode::kFreeDeparture;
    Solution solution;
};

// The instance supplies the per-route fuel/cost annotations.
void write_solution_file(const SolutionFile& file, const Instance& instance,
                         std::ostream& out);
SolutionFile read_solution_file(std::istream& in);

// ---- Reports ----

struct ReportRow {
    std::string instance;
    std::string mode;  // "free" or "fixed"
    double avg_cost = 0.0;
    double best_cost = 0.0;
    double cpu_s = 0.0;
    double gap_pct = 0.0;
};

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);

// 100 * (value - baseline) / baseline.
double gap_percent(double value, double baseline);

const char* mode_name(ObjectiveMode mode);
ObjectiveMode mode_from_name(const std::string& name);  // "free" | "fixed"

// ---- Instance generator ----

// Time-window tightness: half-widths of 1800 s (A), 600 s (B) and 180 s (C)
// around a reference visit time.
enum class TightnessClass { kA, kB, kC };

TightnessClass tightness_from_letter(char letter);  // throws on bad letter
char tightness_letter(TightnessClass cls);

// Deterministic random instance. Customers are grouped into planned routes of
// about `route_size` stops; each planned route gets a random reference start
// time, and windows are carved around a constant-speed simulation of it, so
// at least one feasible solution always exists. Tighter classes also leave
// more unavoidable pre-window idle time for a vehicle forced to leave the
// depot at time zero. When `seed_routes` is non-null it receives the planned
// routes (each one feasible, as is any subsequence of one).
Instance generate_instance(int num_customers, TightnessClass cls,
                           std::uint64_t seed, int route_size = 5,
                           std::vector<Route>* seed_routes = nullptr);

}  // namespace prp
