#pragma once

#include "v2grel/network.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace v2grel {

struct PerUnitBase
{
    double s_mva = 10.0;
    double v_kv = 12.66;

    double z_ohm() const { return v_kv * v_kv / s_mva; }
};

struct FlowOptions
{
    /// Largest bus voltage change between sweeps at convergence, p.u.
    double tolerance = 1e-6;
    int max_iterations = 50;
};

struct FeederBranch
{
    std::size_t from = 0;
    std::size_t to = 0;
    double r = 0.0;
    double x = 0.0;
};

/// A radial feeder in per unit with buses numbered 0..n-1.
struct Feeder
{
    std::size_t root = 0;
    std::vector<FeederBranch> branches;
    /// Net load per bus (demand minus local generation).
    std::vector<double> p;
    std::vector<double> q;
    double root_voltage = 1.0;

    std::size_t bus_count() const { return p.size(); }
};

struct FlowSolution
{
    std::vector<double> vm;
    std::vector<double> va;
    /// Sending-end flow of each branch, oriented away from the root.
    std::vector<double> branch_p;
    std::vector<double> branch_q;
    std::vector<double> loss_p;
    std::vector<double> loss_q;
    /// Power the root has to inject, its own load included.
    double root_p = 0.0;
    double root_q = 0.0;
    int iterations = 0;
    bool converged = false;

    double total_loss_p() const;
};

/// Forward-backward sweep in power-summation form.
///
/// Backward: each branch carries the load below it plus its own loss
/// r(P^2+Q^2)/V^2. Forward: V_to^2 = V^2 - 2(rP + xQ) + (r^2+x^2)(P^2+Q^2)/V^2.
/// Throws std::invalid_argument if the branches do not form a tree over the
/// buses. Non-convergence is reported through `converged`.
FlowSolution solve_fbs(const Feeder& feeder, const FlowOptions& options = {});

struct NetworkFlow
{
    std::size_t root_bus = 0;
    /// Per network bus and line; entries outside the sub-system stay zero.
    std::vector<double> vm;
    std::vector<double> va;
    std::vector<double> line_p_mw;
    std::vector<double> line_q_mvar;
    std::vector<double> line_loss_mw;
    double loss_mw = 0.0;
    double root_p_mw = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Solve a sub-system with the given per-bus net loads (MW, MVAr, indexed
/// by network bus) and the voltage reference at `root_bus`.
NetworkFlow solve_sub_system(const PowerNetwork& network, const SubSystem& sub,
    std::size_t root_bus, const std::vector<double>& p_mw, const std::vector<double>& q_mvar,
    const PerUnitBase& base = {}, const FlowOptions& options = {});

/// Voltage reference of an island: the battery with the largest inverter,
/// else the EV park with the largest plugged-in power, else none.
std::optional<std::size_t> island_reference(const PowerNetwork& network, const SubSystem& sub);

} // namespace v2grel
