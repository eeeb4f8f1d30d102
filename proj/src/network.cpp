#include "v2grel/network.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace v2grel {

std::size_t PowerNetwork::bus_index(BusId id) const
{
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) {
            return i;
        }
    }
    throw std::out_of_range("unknown bus id " + std::to_string(id));
}

std::size_t PowerNetwork::line_index(const std::string& id) const
{
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].id == id) {
            return i;
        }
    }
    throw std::out_of_range("unknown line id " + id);
}

bool PowerNetwork::conducting(std::size_t line) const
{
    const Line& l = lines[line];
    if (l.failed || l.normally_open) {
        return false;
    }
    for (const Switchgear& s : switchgear) {
        if (s.line == line && !s.closed) {
            return false;
        }
    }
    return true;
}

namespace {

struct DisjointSets
{
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n)
        : parent(n)
    {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent[b] = a;
        return true;
    }
};

using Adjacency = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

// Bus path between two buses in a forest, empty when disconnected.
std::vector<std::size_t> forest_path(const Adjacency& adj, std::size_t from, std::size_t to)
{
    std::vector<std::size_t> prev(adj.size(), adj.size());
    std::deque<std::size_t> queue{from};
    prev[from] = from;
    while (!queue.empty()) {
        std::size_t u = queue.front();
        queue.pop_front();
        if (u == to) {
            break;
        }
        for (auto [v, line] : adj[u]) {
            (void)line;
            if (prev[v] == adj.size()) {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    std::vector<std::size_t> path;
    if (prev[to] == adj.size()) {
        return path;
    }
    for (std::size_t v = to; v != from; v = prev[v]) {
        path.push_back(v);
    }
    path.push_back(from);
    std::reverse(path.begin(), path.end());
    return path;
}

Adjacency conducting_adjacency(const PowerNetwork& network)
{
    Adjacency adj(network.buses.size());
    for (std::size_t l = 0; l < network.lines.size(); ++l) {
        if (network.conducting(l)) {
            adj[network.lines[l].from].emplace_back(network.lines[l].to, l);
            adj[network.lines[l].to].emplace_back(network.lines[l].from, l);
        }
    }
    return adj;
}

} // namespace

RadialityReport validate_radial(const PowerNetwork& network)
{
    RadialityReport report;
    const std::size_t n = network.buses.size();

    DisjointSets forest(n);
    Adjacency accepted(n);
    for (std::size_t l = 0; l < network.lines.size(); ++l) {
        if (!network.conducting(l)) {
            continue;
        }
        const Line& line = network.lines[l];
        if (!forest.unite(line.from, line.to)) {
            std::vector<BusId> cycle;
            for (std::size_t b : forest_path(accepted, line.from, line.to)) {
                cycle.push_back(network.buses[b].id);
            }
            if (line.from == line.to) {
                cycle.push_back(network.buses[line.from].id);
            }
            report.messages.push_back("line " + line.id + " closes a cycle");
            report.cycles.push_back(std::move(cycle));
            continue;
        }
        accepted[line.from].emplace_back(line.to, l);
        accepted[line.to].emplace_back(line.from, l);
    }

    // Connectivity inside each system, using only the lines internal to it.
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t b = 0; b < n; ++b) {
        members[network.buses[b].system].push_back(b);
    }
    for (const auto& [system, buses] : members) {
        DisjointSets internal(n);
        for (std::size_t l = 0; l < network.lines.size(); ++l) {
            const Line& line = network.lines[l];
            if (network.conducting(l) && network.buses[line.from].system == system
                && network.buses[line.to].system == system) {
                internal.unite(line.from, line.to);
            }
        }
        std::size_t anchor = buses.front();
        for (const Generator& g : network.generators) {
            if (g.slack && network.buses[g.bus].system == system) {
                anchor = g.bus;
                break;
            }
        }
        for (std::size_t b : buses) {
            if (internal.find(b) != internal.find(anchor)) {
                report.unreachable.push_back(network.buses[b].id);
            }
        }
        if (!report.unreachable.empty()) {
            report.messages.push_back("system " + system + " has buses unreachable from "
                + network.buses[anchor].name);
        }
    }

    report.ok = report.cycles.empty() && report.unreachable.empty();
    return report;
}

IsolationRecord isolate_fault(PowerNetwork& network, std::size_t failed_line)
{
    IsolationRecord record;
    auto disconnectors_on = [&](std::size_t line) {
        std::vector<std::size_t> found;
        for (std::size_t s = 0; s < network.switchgear.size(); ++s) {
            if (network.switchgear[s].line == line
                && network.switchgear[s].kind == SwitchKind::disconnector) {
                found.push_back(s);
            }
        }
        return found;
    };
    auto open = [&](std::size_t s) {
        record.held.push_back(s);
        if (network.switchgear[s].closed) {
            network.switchgear[s].closed = false;
            record.opened.push_back(s);
        }
    };

    auto own = disconnectors_on(failed_line);
    if (!own.empty()) {
        for (std::size_t s : own) {
            open(s);
        }
        return record;
    }

    // Walk outward over device-free lines; the first disconnector met on
    // each path bounds the dead section.
    const Line& failed = network.lines[failed_line];
    std::set<std::size_t> region{failed.from, failed.to};
    std::set<std::size_t> visited_lines{failed_line};
    std::deque<std::size_t> queue{failed.from, failed.to};
    while (!queue.empty()) {
        std::size_t bus = queue.front();
        queue.pop_front();
        for (std::size_t l = 0; l < network.lines.size(); ++l) {
            const Line& line = network.lines[l];
            if (line.from != bus && line.to != bus) {
                continue;
            }
            if (visited_lines.count(l) || line.failed || line.normally_open) {
                continue;
            }
            visited_lines.insert(l);
            // Devices already opened by another fault still bound this one.
            auto devices = disconnectors_on(l);
            if (!devices.empty()) {
                for (std::size_t s : devices) {
                    open(s);
                }
                continue;
            }
            if (!network.conducting(l)) {
                continue;
            }
            std::size_t other = line.from == bus ? line.to : line.from;
            if (region.insert(other).second) {
                queue.push_back(other);
            }
        }
    }
    record.dead_buses.assign(region.begin(), region.end());
    record.isolated = !record.held.empty();
    return record;
}

const IsolationRecord& fail_line(PowerNetwork& network, std::size_t line, double repair_h)
{
    Line& l = network.lines[line];
    l.failed = true;
    l.remaining_repair_h = repair_h;
    l.isolation = isolate_fault(network, line);
    return l.isolation;
}

void restore_line(PowerNetwork& network, std::size_t line)
{
    Line& l = network.lines[line];
    l.failed = false;
    l.remaining_repair_h = 0.0;
    std::vector<std::size_t> held = std::move(l.isolation.held);
    l.isolation = IsolationRecord{};
    for (std::size_t s : held) {
        bool still_needed = false;
        for (const Line& other : network.lines) {
            if (other.failed
                && std::find(other.isolation.held.begin(), other.isolation.held.end(), s)
                    != other.isolation.held.end()) {
                still_needed = true;
                break;
            }
        }
        if (!still_needed) {
            network.switchgear[s].closed = true;
        }
    }
}

bool SubSystem::contains_bus(std::size_t bus) const
{
    return std::find(buses.begin(), buses.end(), bus) != buses.end();
}

std::vector<SubSystem> find_sub_systems(const PowerNetwork& network)
{
    const std::size_t n = network.buses.size();
    Adjacency adj = conducting_adjacency(network);

    std::vector<bool> dead(n, false);
    for (const Line& line : network.lines) {
        if (line.failed) {
            for (std::size_t b : line.isolation.dead_buses) {
                dead[b] = true;
            }
        }
    }

    std::vector<std::size_t> component(n, n);
    std::vector<SubSystem> subs;
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] != n) {
            continue;
        }
        SubSystem sub;
        std::deque<std::size_t> queue{start};
        component[start] = subs.size();
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            sub.buses.push_back(u);
            sub.dead = sub.dead || dead[u];
            for (auto [v, line] : adj[u]) {
                if (component[v] == n) {
                    component[v] = subs.size();
                    queue.push_back(v);
                    sub.lines.push_back(line);
                }
            }
        }
        std::sort(sub.buses.begin(), sub.buses.end());
        std::sort(sub.lines.begin(), sub.lines.end());
        subs.push_back(std::move(sub));
    }

    for (std::size_t g = 0; g < network.generators.size(); ++g) {
        SubSystem& sub = subs[component[network.generators[g].bus]];
        sub.generators.push_back(g);
        if (network.generators[g].slack && !sub.slack && !sub.dead) {
            sub.slack = g;
        }
    }
    for (std::size_t b = 0; b < network.batteries.size(); ++b) {
        subs[component[network.batteries[b].bus]].batteries.push_back(b);
    }
    for (std::size_t p = 0; p < network.ev_parks.size(); ++p) {
        subs[component[network.ev_parks[p].bus]].ev_parks.push_back(p);
    }
    return subs;
}

} // namespace v2grel
