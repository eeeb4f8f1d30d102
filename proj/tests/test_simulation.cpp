#include "oracles.hpp"
#include "v2grel/indices.hpp"
#include "v2grel/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace v2grel;

namespace {

SimulationConfig quick(int iterations)
{
    SimulationConfig c;
    c.iterations = iterations;
    return c;
}

std::vector<IterationHistory> run_all(const Dataset& d, const SimulationConfig& c)
{
    std::vector<IterationHistory> out;
    run_monte_carlo(d, c, [&](IterationHistory&& h) { out.push_back(std::move(h)); });
    return out;
}

} // namespace

TEST_CASE("configuration checks")
{
    SimulationConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.increments() == 8760 * 12);
    c.increment_min = 7.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.increment_min = 5.0;
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("no failures, no interruptions")
{
    oracle::ToyFeeder toy;
    toy.buses = 3;
    toy.failure_rate = 0.0;
    Dataset d = oracle::toy_dataset(toy);
    auto h = run_iteration(d, quick(1), 0);
    CHECK(h.events.empty());
    CHECK(h.faulted_increments == 0);
    auto r = compute_report(h, d.network);
    CHECK(r.ens_mwh == 0.0);
    CHECK(r.saifi == 0.0);
    CHECK(r.saidi == 0.0);
}

TEST_CASE("same seed and index give the same year")
{
    Dataset d = embedded_dataset();
    SimulationConfig c = quick(1);
    c.record_balance = true;
    for (int index : {0, 5, 17}) {
        auto a = run_iteration(d, c, index);
        auto b = run_iteration(d, c, index);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t e = 0; e < a.events.size(); ++e) {
            CHECK(a.events[e].line == b.events[e].line);
            CHECK(a.events[e].start_h == b.events[e].start_h);
            CHECK(a.events[e].repair_h == b.events[e].repair_h);
        }
        CHECK(a.ens_mwh == b.ens_mwh);
        for (std::size_t i = 0; i < a.load_points.size(); ++i) {
            CHECK(a.load_points[i].outage_h == b.load_points[i].outage_h);
        }
    }
}

TEST_CASE("single line toy feeder follows the Poisson mean")
{
    oracle::ToyFeeder toy;
    toy.failure_rate = 2.0;
    Dataset d = oracle::toy_dataset(toy);
    double interruptions = 0.0;
    for (const auto& h : run_all(d, quick(3000))) {
        interruptions += h.load_points[1].interruptions;
    }
    CHECK(interruptions / 3000.0 == doctest::Approx(2.0).epsilon(0.04));
}

TEST_CASE("a sourceless island is shed for the whole repair")
{
    oracle::ToyFeeder toy;
    toy.buses = 3;
    toy.failing_lines = {2};
    toy.load_mw = 0.3;
    Dataset d = oracle::toy_dataset(toy);
    int checked = 0;
    for (int it = 0; it < 50 && checked < 5; ++it) {
        auto h = run_iteration(d, quick(1), it);
        if (h.events.size() != 1) {
            continue;
        }
        ++checked;
        CHECK(h.events[0].line == "L2");
        CHECK(h.load_points[2].interruptions == 1);
        CHECK(h.load_points[2].outage_h == doctest::Approx(1.0));
        CHECK(h.load_points[2].ens_mwh == doctest::Approx(0.3));
        CHECK(h.load_points[1].interruptions == 0);
        CHECK(h.load_points[1].ens_mwh == 0.0);
    }
    CHECK(checked == 5);
}

TEST_CASE("a battery carries a small island through a one hour repair")
{
    oracle::ToyFeeder toy;
    toy.buses = 3;
    toy.failing_lines = {2};
    toy.load_mw = 0.2;
    toy.battery_bus = 3;
    Dataset d = oracle::toy_dataset(toy);
    SimulationConfig c = quick(1);
    c.trace = true;
    c.record_balance = true;
    int checked = 0;
    for (int it = 0; it < 50 && checked < 3; ++it) {
        auto h = run_iteration(d, c, it);
        if (h.events.size() != 1) {
            continue;
        }
        ++checked;
        CHECK(h.load_points[2].ens_mwh == doctest::Approx(0.0));
        CHECK(h.load_points[2].interruptions == 0);
        double delivered = 0.0;
        for (const auto& t : h.trace) {
            for (const auto& [bus, mw] : t.battery_mw) {
                if (bus == 3) {
                    delivered += mw * c.increment_h();
                }
            }
        }
        // 0.2 MWh delivered draws 0.2 / 0.95 from the 0.5 MWh store.
        CHECK(delivered == doctest::Approx(0.2));
        CHECK(0.5 - delivered / 0.95 == doctest::Approx(0.2895).epsilon(1e-3));
        for (const auto& b : h.balance) {
            CHECK(std::abs(b.residual()) < 1e-9);
        }
    }
    CHECK(checked == 3);
}

TEST_CASE("thread count does not change the histories")
{
    Dataset d = embedded_dataset();
    SimulationConfig c = quick(40);
    auto one = run_all(d, c);
    c.threads = 4;
    auto four = run_all(d, c);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].index == static_cast<std::int64_t>(i));
        CHECK(four[i].index == static_cast<std::int64_t>(i));
        CHECK(one[i].ens_mwh == four[i].ens_mwh);
        CHECK(one[i].events.size() == four[i].events.size());
    }
}

TEST_CASE("one iteration aggregates to itself")
{
    Dataset d = embedded_dataset();
    auto hs = run_all(d, quick(1));
    REQUIRE(hs.size() == 1);
    auto r = compute_report(hs[0], d.network);
    auto agg = aggregate({r});
    CHECK(agg.indices[0].mean == r.ens_mwh);
    CHECK(agg.indices[1].mean == r.saifi);
}

TEST_CASE("failing sinks stop the run")
{
    Dataset d = embedded_dataset();
    int seen = 0;
    CHECK_THROWS_AS(run_monte_carlo(d, quick(10),
                        [&](IterationHistory&&) {
                            if (++seen == 3) {
                                throw std::runtime_error("sink");
                            }
                        }),
        std::runtime_error);
    CHECK(seen == 3);
}
