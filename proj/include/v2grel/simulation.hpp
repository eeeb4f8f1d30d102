#pragma once

#include "v2grel/dataset.hpp"
#include "v2grel/load_shed.hpp"
#include "v2grel/power_flow.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2grel {

struct SimulationConfig
{
    double increment_min = 5.0;
    double horizon_h = hours_per_year;
    int iterations = 3000;
    std::uint64_t seed = 20220601;
    int threads = 1;
    /// Keep one record per faulted increment and sub-system.
    bool trace = false;
    /// Keep the energy balance of every faulted sub-system.
    bool record_balance = false;
    /// Skip the LP for slack-fed sub-systems whose demand fits every limit.
    bool fast_path = true;
    FlowOptions flow;

    double increment_h() const { return increment_min / 60.0; }
    std::int64_t increments() const;
    /// Throws std::invalid_argument when the increment does not divide the
    /// horizon or a count is not positive.
    void validate() const;
};

struct LoadPointHistory
{
    int interruptions = 0;
    double outage_h = 0.0;
    double ens_mwh = 0.0;
};

struct FaultEvent
{
    std::string line;
    double start_h = 0.0;
    double repair_h = 0.0;
    bool isolated = true;
};

/// Energy flows of one sub-system in one faulted increment, MW.
struct BalanceRecord
{
    double time_h = 0.0;
    bool has_slack = false;
    double generation = 0.0;
    double discharge = 0.0;
    double charge = 0.0;
    double demand = 0.0;
    double shed = 0.0;
    double losses = 0.0;
    /// Power the voltage reference injects beyond its dispatch.
    double reference_mismatch = 0.0;

    double residual() const { return generation + discharge - charge - demand + shed - losses; }
};

struct TraceRecord
{
    double time_h = 0.0;
    int sub_system = 0;
    BusId root = 0;
    bool has_slack = false;
    bool converged = true;
    std::vector<BusId> buses;
    std::vector<double> shed_mw;
    std::vector<std::pair<BusId, double>> battery_mw;
    std::vector<std::pair<BusId, double>> ev_mw;
    std::string problem;
};

struct IterationHistory
{
    std::int64_t index = 0;
    /// Indexed like the network buses.
    std::vector<LoadPointHistory> load_points;
    /// Indexed like the network EV parks.
    std::vector<EvParkAccumulators> parks;
    double ens_mwh = 0.0;
    std::vector<FaultEvent> events;
    std::int64_t faulted_increments = 0;
    int flow_failures = 0;
    std::vector<BalanceRecord> balance;
    std::vector<TraceRecord> trace;
};

class SimulationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Run one simulated year. Deterministic in (config.seed, index).
IterationHistory run_iteration(const Dataset& data, const SimulationConfig& config, std::int64_t index);

/// Called in iteration order, from the calling thread.
using HistorySink = std::function<void(IterationHistory&&)>;

/// Run config.iterations years on config.threads workers. Histories reach
/// the sink in index order; when an iteration fails, the histories before it
/// are still delivered and the error is rethrown.
void run_monte_carlo(const Dataset& data, const SimulationConfig& config, const HistorySink& sink);

} // namespace v2grel
