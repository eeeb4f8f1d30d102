#include "v2grel/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace v2grel {

double FlowSolution::total_loss_p() const
{
    return std::accumulate(loss_p.begin(), loss_p.end(), 0.0);
}

namespace {

struct Ordering
{
    // Buses in breadth-first order from the root.
    std::vector<std::size_t> order;
    // Branch feeding each bus, npos for the root.
    std::vector<std::size_t> feeding;
    std::vector<std::size_t> parent;
    std::vector<bool> reversed;
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

Ordering order_tree(const Feeder& feeder)
{
    const std::size_t n = feeder.bus_count();
    if (feeder.q.size() != n) {
        throw std::invalid_argument("fbs: p and q sizes differ");
    }
    if (feeder.root >= n) {
        throw std::invalid_argument("fbs: root outside the feeder");
    }
    if (feeder.branches.size() + 1 != n) {
        throw std::invalid_argument("fbs: a tree over n buses needs n-1 branches");
    }
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t b = 0; b < feeder.branches.size(); ++b) {
        const auto& br = feeder.branches[b];
        if (br.from >= n || br.to >= n || br.from == br.to) {
            throw std::invalid_argument("fbs: branch endpoints invalid");
        }
        incident[br.from].push_back(b);
        incident[br.to].push_back(b);
    }

    Ordering o;
    o.feeding.assign(n, npos);
    o.parent.assign(n, npos);
    o.reversed.assign(feeder.branches.size(), false);
    std::vector<bool> seen(n, false);
    o.order.push_back(feeder.root);
    seen[feeder.root] = true;
    for (std::size_t head = 0; head < o.order.size(); ++head) {
        std::size_t u = o.order[head];
        for (std::size_t b : incident[u]) {
            if (b == o.feeding[u]) {
                continue;
            }
            const auto& br = feeder.branches[b];
            std::size_t v = br.from == u ? br.to : br.from;
            if (seen[v]) {
                throw std::invalid_argument("fbs: branches contain a cycle");
            }
            seen[v] = true;
            o.feeding[v] = b;
            o.parent[v] = u;
            o.reversed[b] = br.from != u;
            o.order.push_back(v);
        }
    }
    if (o.order.size() != n) {
        throw std::invalid_argument("fbs: feeder is not connected");
    }
    return o;
}

} // namespace

FlowSolution solve_fbs(const Feeder& feeder, const FlowOptions& options)
{
    const Ordering o = order_tree(feeder);
    const std::size_t n = feeder.bus_count();
    const std::size_t m = feeder.branches.size();

    FlowSolution s;
    s.vm.assign(n, feeder.root_voltage);
    s.va.assign(n, 0.0);
    s.branch_p.assign(m, 0.0);
    s.branch_q.assign(m, 0.0);
    s.loss_p.assign(m, 0.0);
    s.loss_q.assign(m, 0.0);

    // Power entering each bus from its feeding branch, receiving end.
    std::vector<double> recv_p(n), recv_q(n);

    for (s.iterations = 1; s.iterations <= options.max_iterations; ++s.iterations) {
        std::fill(recv_p.begin(), recv_p.end(), 0.0);
        std::fill(recv_q.begin(), recv_q.end(), 0.0);
        for (std::size_t i = n; i-- > 1;) {
            std::size_t v = o.order[i];
            std::size_t b = o.feeding[v];
            const auto& br = feeder.branches[b];
            double p = recv_p[v] + feeder.p[v];
            double q = recv_q[v] + feeder.q[v];
            double v2 = s.vm[v] * s.vm[v];
            double s2 = p * p + q * q;
            s.loss_p[b] = br.r * s2 / v2;
            s.loss_q[b] = br.x * s2 / v2;
            s.branch_p[b] = p + s.loss_p[b];
            s.branch_q[b] = q + s.loss_q[b];
            recv_p[o.parent[v]] += s.branch_p[b];
            recv_q[o.parent[v]] += s.branch_q[b];
        }
        s.root_p = recv_p[feeder.root] + feeder.p[feeder.root];
        s.root_q = recv_q[feeder.root] + feeder.q[feeder.root];

        double change = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t v = o.order[i];
            std::size_t u = o.parent[v];
            std::size_t b = o.feeding[v];
            const auto& br = feeder.branches[b];
            double p = s.branch_p[b];
            double q = s.branch_q[b];
            double vu2 = s.vm[u] * s.vm[u];
            double v2 = vu2 - 2.0 * (br.r * p + br.x * q)
                + (br.r * br.r + br.x * br.x) * (p * p + q * q) / vu2;
            // A drop larger than the sending voltage puts the far end in
            // antiphase: a fixed point of the sweep with no physical meaning.
            if (!(v2 > 0.0) || !(vu2 - (br.r * p + br.x * q) > 0.0)) {
                s.converged = false;
                return s;
            }
            double vm = std::sqrt(v2);
            double va = s.va[u] + std::atan2(-(br.x * p - br.r * q), vu2 - (br.r * p + br.x * q));
            change = std::max(change, std::abs(vm - s.vm[v]));
            s.vm[v] = vm;
            s.va[v] = va;
        }
        if (change < options.tolerance) {
            s.converged = true;
            break;
        }
    }
    s.iterations = std::min(s.iterations, options.max_iterations);

    for (std::size_t b = 0; b < m; ++b) {
        if (o.reversed[b]) {
            // Report flows in the branch's own from->to direction.
            s.branch_p[b] = -s.branch_p[b];
            s.branch_q[b] = -s.branch_q[b];
        }
    }
    return s;
}

NetworkFlow solve_sub_system(const PowerNetwork& network, const SubSystem& sub,
    std::size_t root_bus, const std::vector<double>& p_mw, const std::vector<double>& q_mvar,
    const PerUnitBase& base, const FlowOptions& options)
{
    const std::size_t nb = network.buses.size();
    std::vector<std::size_t> local(nb, npos);
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        local[sub.buses[i]] = i;
    }
    if (root_bus >= nb || local[root_bus] == npos) {
        throw std::invalid_argument("power flow: root bus outside the sub-system");
    }

    Feeder feeder;
    feeder.root = local[root_bus];
    feeder.p.resize(sub.buses.size());
    feeder.q.resize(sub.buses.size());
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        feeder.p[i] = p_mw[sub.buses[i]] / base.s_mva;
        feeder.q[i] = q_mvar[sub.buses[i]] / base.s_mva;
    }
    const double z = base.z_ohm();
    for (std::size_t l : sub.lines) {
        const Line& line = network.lines[l];
        feeder.branches.push_back({local[line.from], local[line.to], line.r_ohm / z, line.x_ohm / z});
    }

    FlowSolution s = solve_fbs(feeder, options);

    NetworkFlow out;
    out.root_bus = root_bus;
    out.vm.assign(nb, 0.0);
    out.va.assign(nb, 0.0);
    out.line_p_mw.assign(network.lines.size(), 0.0);
    out.line_q_mvar.assign(network.lines.size(), 0.0);
    out.line_loss_mw.assign(network.lines.size(), 0.0);
    for (std::size_t i = 0; i < sub.buses.size(); ++i) {
        out.vm[sub.buses[i]] = s.vm[i];
        out.va[sub.buses[i]] = s.va[i];
    }
    for (std::size_t k = 0; k < sub.lines.size(); ++k) {
        std::size_t l = sub.lines[k];
        out.line_p_mw[l] = s.branch_p[k] * base.s_mva;
        out.line_q_mvar[l] = s.branch_q[k] * base.s_mva;
        out.line_loss_mw[l] = s.loss_p[k] * base.s_mva;
    }
    out.loss_mw = s.total_loss_p() * base.s_mva;
    out.root_p_mw = s.root_p * base.s_mva;
    out.iterations = s.iterations;
    out.converged = s.converged;
    return out;
}

std::optional<std::size_t> island_reference(const PowerNetwork& network, const SubSystem& sub)
{
    std::optional<std::size_t> best;
    double best_rating = 0.0;
    for (std::size_t b : sub.batteries) {
        const Battery& battery = network.batteries[b];
        if (!best || battery.inverter_mw > best_rating
            || (battery.inverter_mw == best_rating && battery.bus < *best)) {
            best = battery.bus;
            best_rating = battery.inverter_mw;
        }
    }
    if (best) {
        return best;
    }
    for (std::size_t p : sub.ev_parks) {
        const EvPark& park = network.ev_parks[p];
        double rating = park.power_limit_kw();
        if (rating <= 0.0) {
            continue;
        }
        if (!best || rating > best_rating || (rating == best_rating && park.bus < *best)) {
            best = park.bus;
            best_rating = rating;
        }
    }
    return best;
}

} // namespace v2grel
