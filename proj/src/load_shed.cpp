#include "v2grel/load_shed.hpp"

#include "v2grel/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace v2grel {

double ShedSolution::total_shed() const
{
    return std::accumulate(shed.begin(), shed.end(), 0.0);
}

void ShedProblem::validate() const
{
    const std::size_t n = node_ids.size();
    for (const auto& l : loads) {
        if (l.node >= n) {
            throw std::invalid_argument("shed problem: load on unknown node");
        }
        if (!(l.demand_mw >= 0.0) || !(l.cost > 0.0)) {
            throw std::invalid_argument("shed problem: loads need demand >= 0 and cost > 0");
        }
    }
    for (const auto& g : generators) {
        if (g.node >= n) {
            throw std::invalid_argument("shed problem: generator on unknown node");
        }
        if (!(g.min_mw <= g.max_mw) || !std::isfinite(g.min_mw) || !std::isfinite(g.max_mw)) {
            throw std::invalid_argument("shed problem: generator bounds must be finite and ordered");
        }
    }
    for (const auto& l : lines) {
        if (l.from >= n || l.to >= n || l.from == l.to) {
            throw std::invalid_argument("shed problem: line endpoints invalid");
        }
        if (!(l.capacity_mw >= 0.0)) {
            throw std::invalid_argument("shed problem: line capacity must be nonnegative");
        }
    }
}

namespace {

struct Layout
{
    std::size_t shed0 = 0;
    std::size_t gen0 = 0;
    std::size_t flow0 = 0;
};

} // namespace

ShedSolution solve_shed(const ShedProblem& problem)
{
    problem.validate();
    const std::size_t n = problem.node_ids.size();

    double big = 1.0;
    for (const auto& l : problem.loads) {
        big += l.demand_mw;
    }
    for (const auto& g : problem.generators) {
        big += std::abs(g.min_mw) + std::abs(g.max_mw);
    }

    LinearProgram lp;
    lp.objectives.resize(3);
    Layout at;
    at.shed0 = 0;
    for (const auto& l : problem.loads) {
        lp.add_variable(0.0, l.demand_mw);
    }
    at.gen0 = lp.variables;
    for (const auto& g : problem.generators) {
        lp.add_variable(g.min_mw, g.max_mw);
    }
    at.flow0 = lp.variables;
    for (const auto& l : problem.lines) {
        double cap = std::isfinite(l.capacity_mw) ? l.capacity_mw : big;
        lp.add_variable(-cap, cap);
    }

    // Rank nodes by id for the shedding tie-break.
    std::vector<std::size_t> rank(n);
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return problem.node_ids[a] < problem.node_ids[b];
        });
        for (std::size_t r = 0; r < n; ++r) {
            rank[order[r]] = r;
        }
    }
    for (std::size_t k = 0; k < problem.loads.size(); ++k) {
        lp.objectives[0][at.shed0 + k] = problem.loads[k].cost;
        lp.objectives[1][at.shed0 + k] = 1.0 + static_cast<double>(rank[problem.loads[k].node]);
    }
    for (std::size_t k = 0; k < problem.generators.size(); ++k) {
        lp.objectives[2][at.gen0 + k] = problem.generators[k].preference;
    }

    std::vector<std::vector<double>> rows(n, std::vector<double>(lp.variables, 0.0));
    std::vector<double> rhs(n, 0.0);
    for (std::size_t k = 0; k < problem.loads.size(); ++k) {
        rows[problem.loads[k].node][at.shed0 + k] += 1.0;
        rhs[problem.loads[k].node] += problem.loads[k].demand_mw;
    }
    for (std::size_t k = 0; k < problem.generators.size(); ++k) {
        rows[problem.generators[k].node][at.gen0 + k] += 1.0;
    }
    for (std::size_t k = 0; k < problem.lines.size(); ++k) {
        rows[problem.lines[k].from][at.flow0 + k] -= 1.0;
        rows[problem.lines[k].to][at.flow0 + k] += 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        lp.add_row(std::move(rows[i]), rhs[i]);
    }

    LpResult r;
    try {
        r = solve_lexicographic(lp);
    } catch (const std::exception& e) {
        throw ShedError(std::string("load shedding failed: ") + e.what(), dump_problem(problem));
    }

    ShedSolution s;
    s.shed.assign(r.x.begin() + at.shed0, r.x.begin() + at.gen0);
    s.dispatch.assign(r.x.begin() + at.gen0, r.x.begin() + at.flow0);
    s.flows.assign(r.x.begin() + at.flow0, r.x.end());
    s.pivots = r.pivots;
    for (std::size_t k = 0; k < s.shed.size(); ++k) {
        s.objective += problem.loads[k].cost * s.shed[k];
    }
    if (constraint_violation(problem, s) > 1e-9 * big) {
        throw ShedError("load shedding failed: solution violates constraints", dump_problem(problem));
    }
    return s;
}

double constraint_violation(const ShedProblem& problem, const ShedSolution& s)
{
    const std::size_t n = problem.node_ids.size();
    double worst = 0.0;
    std::vector<double> balance(n, 0.0);
    for (std::size_t k = 0; k < problem.loads.size(); ++k) {
        const auto& l = problem.loads[k];
        worst = std::max({worst, -s.shed[k], s.shed[k] - l.demand_mw});
        balance[l.node] += s.shed[k] - l.demand_mw;
    }
    for (std::size_t k = 0; k < problem.generators.size(); ++k) {
        const auto& g = problem.generators[k];
        worst = std::max({worst, g.min_mw - s.dispatch[k], s.dispatch[k] - g.max_mw});
        balance[g.node] += s.dispatch[k];
    }
    for (std::size_t k = 0; k < problem.lines.size(); ++k) {
        const auto& l = problem.lines[k];
        if (std::isfinite(l.capacity_mw)) {
            worst = std::max(worst, std::abs(s.flows[k]) - l.capacity_mw);
        }
        balance[l.from] -= s.flows[k];
        balance[l.to] += s.flows[k];
    }
    for (double b : balance) {
        worst = std::max(worst, std::abs(b));
    }
    return worst;
}

std::string dump_problem(const ShedProblem& problem)
{
    std::ostringstream out;
    out.precision(12);
    out << "nodes";
    for (BusId id : problem.node_ids) {
        out << ' ' << id;
    }
    out << '\n';
    for (const auto& l : problem.loads) {
        out << "load " << (l.label.empty() ? "-" : l.label) << " node " << problem.node_ids[l.node]
            << " demand_mw " << l.demand_mw << " cost " << l.cost << '\n';
    }
    for (const auto& g : problem.generators) {
        out << "gen " << (g.label.empty() ? "-" : g.label) << " node " << problem.node_ids[g.node]
            << " min_mw " << g.min_mw << " max_mw " << g.max_mw << " pref " << g.preference
            << '\n';
    }
    for (const auto& l : problem.lines) {
        out << "line " << (l.label.empty() ? "-" : l.label) << ' ' << problem.node_ids[l.from]
            << ' ' << problem.node_ids[l.to] << " cap_mw " << l.capacity_mw << '\n';
    }
    return out.str();
}

} // namespace v2grel
