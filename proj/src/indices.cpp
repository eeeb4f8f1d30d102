#include "v2grel/indices.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace v2grel {

namespace {

template <typename Value, typename Weight>
double weighted_mean(const std::vector<Value>& values, const std::vector<Weight>& weights, const char* what)
{
    if (values.size() != weights.size()) {
        throw std::invalid_argument(std::string(what) + ": size mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += static_cast<double>(values[i]) * static_cast<double>(weights[i]);
        den += static_cast<double>(weights[i]);
    }
    if (!(den > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": total weight is zero");
    }
    return num / den;
}

} // namespace

double compute_ens(const IterationHistory& history)
{
    double e = 0.0;
    for (const auto& lp : history.load_points) {
        e += lp.ens_mwh;
    }
    return e;
}

double compute_saifi(const std::vector<double>& lambda, const std::vector<int>& customers)
{
    return weighted_mean(lambda, customers, "saifi");
}

double compute_saidi(const std::vector<double>& outage_h, const std::vector<int>& customers)
{
    return weighted_mean(outage_h, customers, "saidi");
}

double compute_ev_demand(const std::vector<EvParkAccumulators>& parks)
{
    double kwh = 0.0;
    for (const auto& p : parks) {
        kwh += p.unmet_charge_kwh + p.discharged_kwh;
    }
    return kwh / 1000.0;
}

double compute_ev_int(const std::vector<double>& rho, const std::vector<int>& fleet)
{
    return weighted_mean(rho, fleet, "ev_int");
}

double compute_ev_dur(const std::vector<double>& v2g_hours, const std::vector<int>& fleet)
{
    return weighted_mean(v2g_hours, fleet, "ev_dur");
}

IndexReport compute_report(const IterationHistory& history, const PowerNetwork& network)
{
    IndexReport r;
    std::vector<double> lambda, outage;
    std::vector<int> customers;
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        if (network.buses[i].customers <= 0) {
            continue;
        }
        const auto& lp = history.load_points[i];
        lambda.push_back(lp.interruptions);
        outage.push_back(lp.outage_h);
        customers.push_back(network.buses[i].customers);
        r.lambda_s += lp.interruptions;
        r.u_s += lp.outage_h;
    }
    if (r.lambda_s > 0.0) {
        r.r_s = r.u_s / r.lambda_s;
    }
    r.ens_mwh = compute_ens(history);
    r.saifi = compute_saifi(lambda, customers);
    r.saidi = compute_saidi(outage, customers);

    r.ev_demand_mwh = compute_ev_demand(history.parks);
    std::vector<double> rho, dur;
    std::vector<int> fleet;
    int total = 0;
    for (std::size_t p = 0; p < network.ev_parks.size(); ++p) {
        rho.push_back(history.parks[p].rho);
        dur.push_back(history.parks[p].v2g_hours);
        fleet.push_back(network.ev_parks[p].max_fleet());
        total += fleet.back();
    }
    if (total > 0) {
        r.ev_int = compute_ev_int(rho, fleet);
        r.ev_dur_h = compute_ev_dur(dur, fleet);
    }
    return r;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double w = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

Summary summarize(const std::vector<double>& values)
{
    if (values.empty()) {
        throw std::invalid_argument("summary of an empty sample");
    }
    Summary s;
    RunningStats stats;
    for (double v : values) {
        stats.add(v);
    }
    s.count = values.size();
    s.mean = stats.mean();
    s.variance = stats.variance();
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile(sorted, 0.25);
    s.median = quantile(sorted, 0.5);
    s.q3 = quantile(sorted, 0.75);
    return s;
}

void RunningStats::add(double x)
{
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

Aggregate aggregate(const std::vector<IndexReport>& reports)
{
    Aggregate a;
    for (std::size_t k = 0; k < reported_indices.size(); ++k) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto& r : reports) {
            v.push_back(r.*reported_indices[k].member);
        }
        a.indices[k] = summarize(v);
    }
    std::vector<double> lam, u;
    for (const auto& r : reports) {
        lam.push_back(r.lambda_s);
        u.push_back(r.u_s);
    }
    a.lambda_s = summarize(lam);
    a.u_s = summarize(u);
    return a;
}

} // namespace v2grel
