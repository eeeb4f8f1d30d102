#pragma once

#include "v2grel/network.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2grel {

struct ShedLoad
{
    std::size_t node = 0;
    double demand_mw = 0.0;
    /// Currency per MWh shed.
    double cost = 1.0;
    std::string label;
};

struct ShedGenerator
{
    std::size_t node = 0;
    double min_mw = 0.0;
    double max_mw = 0.0;
    /// Lower is dispatched first among equally cheap solutions.
    double preference = 0.0;
    std::string label;
};

struct ShedLine
{
    std::size_t from = 0;
    std::size_t to = 0;
    /// Infinite for an unconstrained line.
    double capacity_mw = 0.0;
    std::string label;
};

/// Minimum-cost shedding with per-node balance over a tree:
///   sum gen - sum flow out + sum flow in + sum shed = sum demand  (each node)
///   0 <= shed <= demand,  gen in [min, max],  |flow| <= capacity.
struct ShedProblem
{
    /// Identifier per node; shedding ties go to the lowest id.
    std::vector<BusId> node_ids;
    std::vector<ShedLoad> loads;
    std::vector<ShedGenerator> generators;
    std::vector<ShedLine> lines;

    void validate() const;
};

struct ShedSolution
{
    std::vector<double> shed;
    std::vector<double> dispatch;
    std::vector<double> flows;
    double objective = 0.0;
    int pivots = 0;

    double total_shed() const;
};

/// Solve exactly. Ties in cost are broken towards shedding the lowest node
/// id first, then towards generators with the lowest preference.
/// Throws ShedError with the problem text attached on numerical failure.
ShedSolution solve_shed(const ShedProblem& problem);

class ShedError : public std::runtime_error
{
public:
    ShedError(const std::string& what, std::string problem_text)
        : std::runtime_error(what)
        , problem(std::move(problem_text))
    {
    }
    std::string problem;
};

/// Plain-text listing of the problem for trace files and error reports.
std::string dump_problem(const ShedProblem& problem);

/// Largest violation of any constraint by a candidate solution.
double constraint_violation(const ShedProblem& problem, const ShedSolution& solution);

} // namespace v2grel
