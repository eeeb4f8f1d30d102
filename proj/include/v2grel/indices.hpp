#pragma once

#include "v2grel/simulation.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace v2grel {

struct IndexReport
{
    /// Interruptions per year summed over load points.
    double lambda_s = 0.0;
    /// Outage hours per year summed over load points.
    double u_s = 0.0;
    /// Mean outage duration, only defined when lambda_s > 0.
    std::optional<double> r_s;
    double ens_mwh = 0.0;
    double saifi = 0.0;
    double saidi = 0.0;
    double ev_demand_mwh = 0.0;
    double ev_int = 0.0;
    double ev_dur_h = 0.0;
};

/// The indices in reporting order, with units.
struct IndexField
{
    std::string_view name;
    std::string_view unit;
    double IndexReport::*member;
};
inline constexpr std::array<IndexField, 6> reported_indices = {{
    {"ENS", "MWh", &IndexReport::ens_mwh},
    {"SAIFI", "1/yr", &IndexReport::saifi},
    {"SAIDI", "h/yr", &IndexReport::saidi},
    {"EV_Demand", "MWh", &IndexReport::ev_demand_mwh},
    {"EV_Dur", "h", &IndexReport::ev_dur_h},
    {"EV_Int", "1/yr", &IndexReport::ev_int},
}};

/// Sum of shed energy over load points.
double compute_ens(const IterationHistory& history);

/// sum(lambda_i N_i) / sum(N_i). Throws std::invalid_argument when no
/// customers are served.
double compute_saifi(const std::vector<double>& lambda, const std::vector<int>& customers);
/// sum(U_i N_i) / sum(N_i), same contract as compute_saifi.
double compute_saidi(const std::vector<double>& outage_h, const std::vector<int>& customers);

/// Unserved EV energy: charging not delivered plus energy discharged, MWh.
double compute_ev_demand(const std::vector<EvParkAccumulators>& parks);
/// sum(rho_i N_i) / sum(N_i) over parks. Throws when there are no EVs.
double compute_ev_int(const std::vector<double>& rho, const std::vector<int>& fleet);
/// sum(U_i N_i) / sum(N_i) with U_i the hours a park spent discharging.
double compute_ev_dur(const std::vector<double>& v2g_hours, const std::vector<int>& fleet);

IndexReport compute_report(const IterationHistory& history, const PowerNetwork& network);

struct Summary
{
    std::size_t count = 0;
    double mean = 0.0;
    /// Unbiased; zero for a single value.
    double variance = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Throws std::invalid_argument on an empty input.
Summary summarize(const std::vector<double>& values);

/// Running mean and variance (Welford).
class RunningStats
{
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Aggregate
{
    std::array<Summary, reported_indices.size()> indices;
    Summary lambda_s;
    Summary u_s;
};

Aggregate aggregate(const std::vector<IndexReport>& reports);

} // namespace v2grel
