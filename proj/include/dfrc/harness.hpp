#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfrc/core.hpp"

namespace dfrc {

inline constexpr const char* kExperimentKinds[] = {"spectrum", "ber", "ambiguity", "sumrate",
                                                   "selection", "tradeoff", "detect"};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInvalidConfig = 2, kExitInfeasible = 3, kExitGuard = 4 };

/// Result table. Column names carry their unit in brackets, e.g. "snr_db" or "rate[bit/s/Hz]".
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> notes;  // emitted in the manifest block

    void add_row(std::vector<std::string> row);
};

/// "%.10g"; NaN prints as "nan".
std::string format_number(double v);

struct Sweep {
    std::string key;
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

/// Parses "key=start:stop:step". Requires step > 0 and start <= stop.
Sweep parse_sweep(const std::string& text);

struct ExperimentSpec {
    std::string kind;
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<Sweep> sweeps;
};

/// Noise power for an SNR point: 10^(-snr/10) relative to 1 W.
double noise_for_snr(double snr_db);

Table run_spectrum(const SystemConfig& cfg);
Table run_ber(const SystemConfig& cfg);
Table run_ambiguity(const SystemConfig& cfg);
Table run_sumrate(const SystemConfig& cfg);
Table run_selection(const SystemConfig& cfg);
Table run_tradeoff(const SystemConfig& cfg);
Table run_detect(const SystemConfig& cfg);

/// Dispatch on kind; throws InvalidArgument for unknown kinds.
Table run_kind(const std::string& kind, const SystemConfig& cfg);

/// Runs every sweep cell (cartesian product, first sweep outermost) and
/// prepends the swept values as leading columns.
Table run_with_sweeps(const std::string& kind, const SystemConfig& cfg, const std::vector<Sweep>& sweeps);

/// Manifest block followed by the CSV header and rows.
void write_table(std::ostream& out, const std::string& kind, const SystemConfig& cfg, const Table& table,
                 const std::vector<Sweep>& sweeps = {});

/// Load config, apply the seed override, run, write out_path. Errors are
/// reported on err and mapped to the exit codes above.
int run_experiment(const ExperimentSpec& spec, std::ostream& err);

}  // namespace dfrc
