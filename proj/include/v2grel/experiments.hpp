#pragma once

#include "v2grel/indices.hpp"
#include "v2grel/simulation.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2grel {

struct CaseSpec
{
    std::string name;
    bool v2g = false;
    bool batteries = false;
    std::optional<double> charge_kw;
    std::optional<double> ev_share;
    std::optional<double> repair_loc;
    std::optional<double> repair_scale;
};

/// Case 1 EV, Case 2 V2G, Case 3 EV and battery, Case 4 V2G and battery.
std::vector<CaseSpec> standard_cases();

/// Bad user input: unknown case, missing battery data, unreadable config.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Copy of the dataset with the case applied. Without batteries the
/// dataset's batteries are removed; with them the dataset must have some.
Dataset apply_case(const Dataset& base, const CaseSpec& spec);

struct FactorialDesign
{
    std::vector<double> charge_kw{3.6, 7.2};
    std::vector<double> ev_share{0.46, 0.61, 0.87};
    std::vector<double> repair_loc{0.5, 1.0, 1.5};
    double repair_scale = 0.5;
    CaseSpec base = standard_cases()[1];

    /// Full cross product, charge rate slowest, repair location fastest.
    std::vector<CaseSpec> cells() const;
};

struct CaseResult
{
    CaseSpec spec;
    std::vector<IndexReport> reports;
    std::optional<Aggregate> summary;
    /// Cumulative mean of ENS after each iteration.
    std::vector<double> ens_running_mean;
    std::vector<double> ens_running_variance;
    /// Hash of every failure event in every iteration.
    std::string event_hash;
    std::vector<std::pair<std::int64_t, TraceRecord>> trace;
    std::string error;

    bool ok() const { return error.empty(); }
};

struct ResultBundle
{
    std::string kind = "cases";
    SimulationConfig config;
    std::string dataset_hash;
    std::string config_hash;
    std::vector<CaseResult> cases;
    std::optional<FactorialDesign> design;
};

/// Run one case; failures are recorded in the result, not thrown.
CaseResult run_case(const Dataset& base, const SimulationConfig& config, const CaseSpec& spec);

/// All cases share the seed. The campaign stops at the first failing case;
/// the results so far are kept.
ResultBundle run_cases(const Dataset& base, const SimulationConfig& config, const std::vector<CaseSpec>& cases);

/// Every cell runs even when another fails.
ResultBundle run_factorial(const Dataset& base, const SimulationConfig& config, const FactorialDesign& design);

inline const std::set<std::string> all_formats
    = {"summary", "json", "iterations", "boxplot", "convergence", "factorial", "trace"};

class OutputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Write the requested files plus manifest.json. Refuses to replace existing
/// files unless `force`. On failure no partial file is left behind.
std::vector<std::filesystem::path> emit_results(const ResultBundle& bundle,
    const std::filesystem::path& out_dir, const std::set<std::string>& formats, bool force);

/// Stable text of the effective settings, hashed into the manifest.
std::string describe_config(const SimulationConfig& config, const std::vector<CaseSpec>& cases,
    const std::optional<FactorialDesign>& design);

std::string library_version();

} // namespace v2grel
