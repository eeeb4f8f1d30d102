#pragma once

#include "v2grel/dataset.hpp"
#include "v2grel/load_shed.hpp"
#include "v2grel/power_flow.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Minimum shed cost of the problem, solved with an exact rational two-phase
/// tableau simplex in standard form. Independent of the library solver.
double shed_cost(const v2grel::ShedProblem& problem);

/// Random feasible tree problem with at most `max_nodes` nodes. Data are
/// multiples of 0.1 so the rational solve sees them exactly.
v2grel::ShedProblem random_shed_problem(std::mt19937_64& rng, int max_nodes);

struct PolarSolution
{
    std::vector<double> vm;
    std::vector<double> va;
    double root_p = 0.0;
    int iterations = 0;
};

/// Full AC Newton-Raphson on the bus admittance matrix with a finite
/// difference Jacobian. Root is the reference, every other bus PQ.
PolarSolution newton_raphson(const v2grel::Feeder& feeder, double tolerance = 1e-12);

/// The canonical 33-bus feeder at nominal load, per unit on 10 MVA, 12.66 kV.
v2grel::Feeder ieee33_feeder();

/// Random radial feeder with up to `max_buses` buses.
v2grel::Feeder random_feeder(std::mt19937_64& rng, int max_buses);

/// Kolmogorov-Smirnov distance between a sample and a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic critical value at the 1% level.
double ks_critical_1pct(std::size_t n);

/// Chain feeder 1-2-...-n fed by a slack at bus 1. Every line carries a
/// disconnector at its from end, line 1 also the feeder breaker.
struct ToyFeeder
{
    int buses = 2;
    double length_km = 1.0;
    /// Failure rate per km and year applied to every line.
    double failure_rate = 1.0;
    /// Only these lines (1-based) may fail; empty means all.
    std::vector<int> failing_lines;
    double load_mw = 0.1;
    int customers = 1;
    double repair_loc = 1.0;
    double repair_scale = 1e-6;
    double r_ohm = 0.05;
    double x_ohm = 0.02;
    std::optional<int> battery_bus;
    double battery_stored_mwh = 0.5;
    /// EV parks with this many households on every load bus, 0 for none.
    int households = 0;
    bool v2g = false;
};

std::string toy_json(const ToyFeeder& toy);
v2grel::Dataset toy_dataset(const ToyFeeder& toy);

} // namespace oracle
