#include "v2grel/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace v2grel {

std::int64_t SimulationConfig::increments() const
{
    return std::llround(horizon_h / increment_h());
}

void SimulationConfig::validate() const
{
    if (!(increment_min > 0.0)) {
        throw std::invalid_argument("increment must be positive");
    }
    if (!(horizon_h > 0.0)) {
        throw std::invalid_argument("horizon must be positive");
    }
    double n = horizon_h / increment_h();
    if (std::abs(n - std::round(n)) > 1e-9 * n) {
        throw std::invalid_argument("increment must divide the horizon");
    }
    if (iterations < 1) {
        throw std::invalid_argument("iterations must be at least 1");
    }
    if (threads < 1) {
        throw std::invalid_argument("threads must be at least 1");
    }
}

namespace {

constexpr double shed_eps = 1e-9;
// Charging is the first thing to give up in a shortage.
constexpr double charging_cost = 1e-3;

struct Streams
{
    std::vector<RandomStream> fail;
    std::vector<RandomStream> repair;
    std::vector<RandomStream> ev;
};

class Year
{
public:
    Year(const Dataset& data, const SimulationConfig& config, std::int64_t index)
        : data_(data)
        , config_(config)
        , net_(data.network)
        , dt_(config.increment_h())
        , k_end_(config.increments())
    {
        history_.index = index;
        history_.load_points.resize(net_.buses.size());
        history_.parks.resize(net_.ev_parks.size());
        auto iteration = static_cast<std::uint64_t>(index);
        for (const Line& l : net_.lines) {
            streams_.fail.emplace_back(config.seed, iteration, "fail/" + l.id);
            streams_.repair.emplace_back(config.seed, iteration, "repair/" + l.id);
            repair_.push_back(data.repair_model(l.repair_model).distribution());
        }
        for (const EvPark& p : net_.ev_parks) {
            streams_.ev.emplace_back(
                config.seed, iteration, "ev/" + std::to_string(net_.buses[p.bus].id));
        }
        for (Battery& b : net_.batteries) {
            b.stored_mwh = b.capacity_mwh;
        }
        next_failure_.assign(net_.lines.size(), never);
        for (std::size_t l = 0; l < net_.lines.size(); ++l) {
            schedule(l, 0);
        }
        interrupted_.assign(net_.buses.size(), false);
        p_.assign(net_.buses.size(), 0.0);
        q_.assign(net_.buses.size(), 0.0);
    }

    IterationHistory run()
    {
        std::int64_t k = 0;
        while (k < k_end_) {
            if (failed_count() == 0) {
                std::int64_t next = *std::min_element(next_failure_.begin(), next_failure_.end());
                next = std::min(next, k_end_);
                go_healthy(k, next);
                k = next;
                if (k >= k_end_) {
                    break;
                }
            }
            run_increment(k);
            ++k;
        }
        for (auto& park : net_.ev_parks) {
            history_.parks[&park - net_.ev_parks.data()] = park.acc;
        }
        return std::move(history_);
    }

private:
    void schedule(std::size_t line, std::int64_t from)
    {
        const Line& l = net_.lines[line];
        std::int64_t gap = increments_until_failure(l.failure_rate, l.length_km, dt_, streams_.fail[line]);
        next_failure_[line] = gap == never || gap >= k_end_ - from ? never : from + gap;
    }

    std::size_t failed_count() const
    {
        std::size_t n = 0;
        for (const Line& l : net_.lines) {
            n += l.failed ? 1 : 0;
        }
        return n;
    }

    void go_healthy(std::int64_t from, std::int64_t to)
    {
        std::fill(interrupted_.begin(), interrupted_.end(), false);
        for (EvPark& p : net_.ev_parks) {
            clear_fault(p);
        }
        double hours = static_cast<double>(to - from) * dt_;
        for (Battery& b : net_.batteries) {
            battery_recharge(b, hours);
        }
    }

    void run_increment(std::int64_t k)
    {
        const double t = static_cast<double>(k) * dt_;
        for (std::size_t i = 0; i < net_.buses.size(); ++i) {
            const Bus& b = net_.buses[i];
            double f = data_.profiles[b.load_profile].factor(t);
            p_[i] = b.peak_p_mw * f;
            q_[i] = b.peak_q_mvar * f;
        }

        bool new_fault = false;
        for (std::size_t l = 0; l < net_.lines.size(); ++l) {
            if (!net_.lines[l].failed && next_failure_[l] == k) {
                double r = repair_[l].sample(streams_.repair[l]);
                const IsolationRecord& rec = fail_line(net_, l, r);
                history_.events.push_back({net_.lines[l].id, t, r, rec.isolated});
                new_fault = true;
            }
        }

        if (failed_count() > 0) {
            ++history_.faulted_increments;
            std::vector<SubSystem> subs = find_sub_systems(net_);
            std::vector<double> shed(net_.buses.size(), 0.0);
            for (std::size_t s = 0; s < subs.size(); ++s) {
                solve_sub_system_step(subs[s], static_cast<int>(s), t, new_fault, shed);
            }
            for (std::size_t i = 0; i < net_.buses.size(); ++i) {
                auto& lp = history_.load_points[i];
                lp.ens_mwh += shed[i] * dt_;
                history_.ens_mwh += shed[i] * dt_;
                bool out = net_.buses[i].customers > 0 && shed[i] > shed_eps;
                if (out && !interrupted_[i]) {
                    ++lp.interruptions;
                }
                if (out) {
                    lp.outage_h += dt_;
                }
                interrupted_[i] = out;
            }
        }

        for (std::size_t l = 0; l < net_.lines.size(); ++l) {
            Line& line = net_.lines[l];
            if (!line.failed) {
                continue;
            }
            line.remaining_repair_h -= dt_;
            if (line.remaining_repair_h < 0.5 * dt_) {
                restore_line(net_, l);
                schedule(l, k + 1);
            }
        }
    }

    void solve_sub_system_step(
        const SubSystem& sub, int sub_index, double t, bool new_fault, std::vector<double>& shed_out)
    {
        const double hour = std::fmod(t, 24.0);
        double demand = 0.0;
        for (std::size_t b : sub.buses) {
            demand += p_[b];
        }

        // Pre-dispatch: who would charge or discharge given the balance.
        double balance = -demand;
        if (sub.slack) {
            balance += net_.generators[*sub.slack].p_max_mw;
        }
        for (std::size_t g : sub.generators) {
            if (!net_.generators[g].slack) {
                balance += net_.generators[g].p_max_mw;
            }
        }

        std::vector<std::size_t> batteries = sub.batteries;
        std::sort(batteries.begin(), batteries.end(),
            [&](std::size_t a, std::size_t b) { return net_.buses[net_.batteries[a].bus].id < net_.buses[net_.batteries[b].bus].id; });
        std::vector<std::size_t> parks = sub.ev_parks;
        std::sort(parks.begin(), parks.end(),
            [&](std::size_t a, std::size_t b) { return net_.buses[net_.ev_parks[a].bus].id < net_.buses[net_.ev_parks[b].bus].id; });

        std::vector<double> battery_offer(batteries.size(), 0.0);
        std::vector<double> park_offer(parks.size(), 0.0);
        const bool live = !sub.dead;
        if (live) {
            for (std::size_t i = 0; i < batteries.size(); ++i) {
                Battery& b = net_.batteries[batteries[i]];
                if (balance < 0.0) {
                    battery_offer[i] = std::min(b.max_discharge_mw(dt_), -balance);
                } else if (balance > 0.0) {
                    battery_offer[i] = -std::min(b.max_charge_mw(dt_), balance);
                }
                balance += battery_offer[i];
            }
        }
        for (std::size_t i = 0; i < parks.size(); ++i) {
            EvPark& park = net_.ev_parks[parks[i]];
            if (sub.slack) {
                // Supplied from the feeder: the park charges as usual.
                clear_fault(park);
                continue;
            }
            if (new_fault || !park.active) {
                on_fault_draw(park, hour, data_.ev_availability, streams_.ev[parks[i]]);
            }
            if (live) {
                park_offer[i] = ev_park_offer(park, balance, dt_);
                balance += park_offer[i];
            }
        }

        // Load-shedding LP over the sub-system.
        ShedProblem problem;
        std::vector<std::size_t> local(net_.buses.size(), 0);
        for (std::size_t i = 0; i < sub.buses.size(); ++i) {
            local[sub.buses[i]] = i;
            problem.node_ids.push_back(net_.buses[sub.buses[i]].id);
        }
        std::vector<std::size_t> load_bus;
        for (std::size_t b : sub.buses) {
            if (p_[b] > 0.0) {
                problem.loads.push_back({local[b], p_[b], net_.buses[b].shed_cost, net_.buses[b].name});
                load_bus.push_back(b);
            }
        }
        const std::size_t bus_loads = problem.loads.size();
        std::vector<std::size_t> battery_gen(batteries.size(), npos), battery_load(batteries.size(), npos);
        std::vector<std::size_t> park_gen(parks.size(), npos), park_load(parks.size(), npos);
        if (sub.slack) {
            const Generator& g = net_.generators[*sub.slack];
            problem.generators.push_back({local[g.bus], g.p_min_mw, g.p_max_mw, 0.0, g.id});
        }
        std::vector<std::size_t> other_gens;
        for (std::size_t g : sub.generators) {
            const Generator& gen = net_.generators[g];
            if (!gen.slack && live) {
                other_gens.push_back(problem.generators.size());
                problem.generators.push_back({local[gen.bus], gen.p_min_mw, gen.p_max_mw, 0.5, gen.id});
            }
        }
        for (std::size_t i = 0; i < batteries.size(); ++i) {
            const Battery& b = net_.batteries[batteries[i]];
            if (battery_offer[i] > 0.0) {
                battery_gen[i] = problem.generators.size();
                problem.generators.push_back(
                    {local[b.bus], 0.0, battery_offer[i], 1.0 + static_cast<double>(i), b.id});
            } else if (battery_offer[i] < 0.0) {
                battery_load[i] = problem.loads.size();
                problem.loads.push_back({local[b.bus], -battery_offer[i], charging_cost, b.id});
            }
        }
        for (std::size_t i = 0; i < parks.size(); ++i) {
            const EvPark& park = net_.ev_parks[parks[i]];
            std::string label = "ev/" + std::to_string(net_.buses[park.bus].id);
            if (park_offer[i] > 0.0) {
                park_gen[i] = problem.generators.size();
                problem.generators.push_back(
                    {local[park.bus], 0.0, park_offer[i], 100.0 + static_cast<double>(i), label});
            } else if (park_offer[i] < 0.0) {
                park_load[i] = problem.loads.size();
                problem.loads.push_back({local[park.bus], -park_offer[i], charging_cost, label});
            }
        }
        for (std::size_t l : sub.lines) {
            const Line& line = net_.lines[l];
            problem.lines.push_back({local[line.from], local[line.to], line.capacity_mw, line.id});
        }

        ShedSolution solution;
        bool solved = false;
        if (!live) {
            solution.shed.resize(problem.loads.size());
            for (std::size_t k = 0; k < problem.loads.size(); ++k) {
                solution.shed[k] = problem.loads[k].demand_mw;
            }
            solution.dispatch.assign(problem.generators.size(), 0.0);
            solved = true;
        } else if (config_.fast_path && sub.slack) {
            solved = try_fast_path(sub, problem, solution);
        }
        if (!solved) {
            try {
                solution = solve_shed(problem);
            } catch (const ShedError& e) {
                throw SimulationError(std::string(e.what()) + " (iteration "
                    + std::to_string(history_.index) + ", hour " + std::to_string(t) + ")\n"
                    + e.problem);
            }
        }

        // Post-shed flow from the feeder or the island reference.
        std::vector<double> net_p(net_.buses.size(), 0.0), net_q(net_.buses.size(), 0.0);
        double served = 0.0;
        for (std::size_t k = 0; k < bus_loads; ++k) {
            std::size_t b = load_bus[k];
            double kept = p_[b] - solution.shed[k];
            net_p[b] += kept;
            net_q[b] += p_[b] > 0.0 ? q_[b] * kept / p_[b] : 0.0;
            served += kept;
        }
        double discharge = 0.0, charge = 0.0;
        std::vector<double> battery_mw(batteries.size(), 0.0), park_mw(parks.size(), 0.0);
        for (std::size_t i = 0; i < batteries.size(); ++i) {
            if (battery_gen[i] != npos) {
                battery_mw[i] = solution.dispatch[battery_gen[i]];
            } else if (battery_load[i] != npos) {
                battery_mw[i] = -(problem.loads[battery_load[i]].demand_mw - solution.shed[battery_load[i]]);
            }
        }
        for (std::size_t i = 0; i < parks.size(); ++i) {
            if (park_gen[i] != npos) {
                park_mw[i] = solution.dispatch[park_gen[i]];
            } else if (park_load[i] != npos) {
                park_mw[i] = -(problem.loads[park_load[i]].demand_mw - solution.shed[park_load[i]]);
            }
        }
        auto add_exchange = [&](std::size_t bus, double mw) {
            net_p[bus] -= mw;
            if (mw > 0.0) {
                discharge += mw;
            } else {
                charge -= mw;
            }
        };
        for (std::size_t i = 0; i < batteries.size(); ++i) {
            add_exchange(net_.batteries[batteries[i]].bus, battery_mw[i]);
        }
        for (std::size_t i = 0; i < parks.size(); ++i) {
            add_exchange(net_.ev_parks[parks[i]].bus, park_mw[i]);
        }
        double other_gen = 0.0;
        for (std::size_t g : other_gens) {
            net_p[sub.buses[problem.generators[g].node]] -= solution.dispatch[g];
            other_gen += solution.dispatch[g];
        }

        std::optional<std::size_t> root;
        if (sub.slack) {
            root = net_.generators[*sub.slack].bus;
        } else if (live) {
            root = island_reference(net_, sub);
        }
        NetworkFlow flow;
        bool flow_ok = true;
        const bool energized = served + charge + discharge > shed_eps;
        if (root && energized && !sub.lines.empty()) {
            flow = solve_sub_system(net_, sub, *root, net_p, net_q, data_.base, config_.flow);
            flow_ok = flow.converged;
        }
        if (!flow_ok) {
            // No physical operating point: give up the whole sub-system.
            ++history_.flow_failures;
            for (std::size_t k = 0; k < problem.loads.size(); ++k) {
                solution.shed[k] = problem.loads[k].demand_mw;
            }
            std::fill(battery_mw.begin(), battery_mw.end(), 0.0);
            std::fill(park_mw.begin(), park_mw.end(), 0.0);
            std::fill(solution.dispatch.begin(), solution.dispatch.end(), 0.0);
            flow = NetworkFlow{};
            discharge = charge = other_gen = 0.0;
        }

        for (std::size_t i = 0; i < batteries.size(); ++i) {
            battery_exchange(net_.batteries[batteries[i]], battery_mw[i], dt_);
        }
        for (std::size_t i = 0; i < parks.size(); ++i) {
            EvPark& park = net_.ev_parks[parks[i]];
            if (park.active) {
                ev_park_commit(park, park_mw[i], dt_);
            }
        }

        double shed_total = 0.0;
        for (std::size_t k = 0; k < bus_loads; ++k) {
            shed_out[load_bus[k]] += solution.shed[k];
            shed_total += solution.shed[k];
        }

        if (config_.record_balance) {
            BalanceRecord rec;
            rec.time_h = t;
            rec.has_slack = sub.has_slack();
            rec.demand = demand;
            rec.shed = shed_total;
            rec.discharge = discharge + other_gen;
            rec.charge = charge;
            rec.losses = flow.loss_mw;
            if (sub.slack) {
                rec.generation = flow_ok && root && energized && !sub.lines.empty()
                    ? flow.root_p_mw
                    : demand - shed_total + charge - discharge - other_gen;
            } else {
                // The island reference covers the losses on top of its dispatch.
                rec.generation = flow.loss_mw;
                rec.reference_mismatch = flow.root_p_mw - flow.loss_mw;
            }
            history_.balance.push_back(rec);
        }

        if (config_.trace) {
            TraceRecord tr;
            tr.time_h = t;
            tr.sub_system = sub_index;
            tr.root = root ? net_.buses[*root].id : 0;
            tr.has_slack = sub.has_slack();
            tr.converged = flow_ok;
            for (std::size_t b : sub.buses) {
                tr.buses.push_back(net_.buses[b].id);
                tr.shed_mw.push_back(shed_out[b]);
            }
            for (std::size_t i = 0; i < batteries.size(); ++i) {
                tr.battery_mw.emplace_back(net_.buses[net_.batteries[batteries[i]].bus].id, battery_mw[i]);
            }
            for (std::size_t i = 0; i < parks.size(); ++i) {
                tr.ev_mw.emplace_back(net_.buses[net_.ev_parks[parks[i]].bus].id, park_mw[i]);
            }
            if (!solved) {
                tr.problem = dump_problem(problem);
            }
            history_.trace.push_back(std::move(tr));
        }
    }

    // Serve everything from the feeder when that breaks no limit; this is the
    // unique optimum, so the LP can be skipped.
    bool try_fast_path(const SubSystem& sub, const ShedProblem& problem, ShedSolution& solution)
    {
        if (problem.generators.size() != 1) {
            return false;
        }
        const ShedGenerator& slack = problem.generators.front();
        double total = 0.0;
        std::vector<double> node_load(problem.node_ids.size(), 0.0);
        for (const auto& l : problem.loads) {
            node_load[l.node] += l.demand_mw;
            total += l.demand_mw;
        }
        if (total > slack.max_mw || total < slack.min_mw) {
            return false;
        }
        // Line flows in a tree: everything below each line.
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(problem.node_ids.size());
        for (std::size_t k = 0; k < problem.lines.size(); ++k) {
            adj[problem.lines[k].from].emplace_back(problem.lines[k].to, k);
            adj[problem.lines[k].to].emplace_back(problem.lines[k].from, k);
        }
        std::vector<std::size_t> order{slack.node}, parent(problem.node_ids.size(), npos),
            via(problem.node_ids.size(), npos);
        std::vector<bool> seen(problem.node_ids.size(), false);
        seen[slack.node] = true;
        for (std::size_t h = 0; h < order.size(); ++h) {
            for (auto [v, k] : adj[order[h]]) {
                if (!seen[v]) {
                    seen[v] = true;
                    parent[v] = order[h];
                    via[v] = k;
                    order.push_back(v);
                }
            }
        }
        if (order.size() != problem.node_ids.size()) {
            return false;
        }
        std::vector<double> below = node_load;
        solution.flows.assign(problem.lines.size(), 0.0);
        for (std::size_t i = order.size(); i-- > 1;) {
            std::size_t v = order[i];
            std::size_t k = via[v];
            if (below[v] > problem.lines[k].capacity_mw) {
                return false;
            }
            solution.flows[k] = problem.lines[k].to == v ? below[v] : -below[v];
            below[parent[v]] += below[v];
        }
        (void)sub;
        solution.shed.assign(problem.loads.size(), 0.0);
        solution.dispatch = {total};
        solution.objective = 0.0;
        return true;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    const Dataset& data_;
    const SimulationConfig& config_;
    PowerNetwork net_;
    double dt_;
    std::int64_t k_end_;
    Streams streams_;
    std::vector<TruncatedNormal> repair_;
    std::vector<std::int64_t> next_failure_;
    std::vector<bool> interrupted_;
    std::vector<double> p_;
    std::vector<double> q_;
    IterationHistory history_;
};

} // namespace

IterationHistory run_iteration(const Dataset& data, const SimulationConfig& config, std::int64_t index)
{
    config.validate();
    return Year(data, config, index).run();
}

void run_monte_carlo(const Dataset& data, const SimulationConfig& config, const HistorySink& sink)
{
    config.validate();
    const auto n = static_cast<std::size_t>(config.iterations);
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(static_cast<std::size_t>(config.threads), n));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            sink(run_iteration(data, config, static_cast<std::int64_t>(i)));
        }
        return;
    }

    std::vector<std::optional<IterationHistory>> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mutex;
    std::condition_variable ready;
    std::exception_ptr error;
    std::size_t error_index = n;

    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || stop.load()) {
                return;
            }
            try {
                IterationHistory h = run_iteration(data, config, static_cast<std::int64_t>(i));
                std::lock_guard lock(mutex);
                slots[i] = std::move(h);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (i < error_index) {
                    error = std::current_exception();
                    error_index = i;
                }
                stop.store(true);
            }
            ready.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    std::exception_ptr sink_error;
    for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[i].has_value() || error_index <= i; });
        if (!slots[i]) {
            break;
        }
        IterationHistory h = std::move(*slots[i]);
        slots[i].reset();
        lock.unlock();
        try {
            sink(std::move(h));
        } catch (...) {
            sink_error = std::current_exception();
            stop.store(true);
            break;
        }
    }
    for (auto& t : pool) {
        t.join();
    }
    if (sink_error) {
        std::rethrow_exception(sink_error);
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace v2grel
