#include "v2grel/indices.hpp"

#include <doctest.h>

using namespace v2grel;

TEST_CASE("ENS sums load point energy")
{
    IterationHistory h;
    h.load_points.resize(2);
    CHECK(compute_ens(h) == 0.0);
    // 1 kW shed for 2 h.
    h.load_points[1].ens_mwh = 0.001 * 2.0;
    CHECK(compute_ens(h) * 1000.0 == doctest::Approx(2.0));
}

TEST_CASE("customer weighted SAIFI and SAIDI")
{
    CHECK(compute_saifi({0.1}, {10}) == doctest::Approx(0.1));
    CHECK(compute_saifi({0.2, 0.1}, {5, 15}) == doctest::Approx(0.125));
    CHECK(compute_saidi({2.0}, {10}) == doctest::Approx(2.0));
    CHECK(compute_saidi({1.0, 0.0}, {10, 10}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(compute_saifi({1.0}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_saidi({}, {}), std::invalid_argument);
}

TEST_CASE("EV indices")
{
    EvParkAccumulators a;
    a.unmet_charge_kwh = 3.6;
    CHECK(compute_ev_demand({a}) * 1000.0 == doctest::Approx(3.6));
    a.discharged_kwh = 3.6;
    CHECK(compute_ev_demand({a}) * 1000.0 == doctest::Approx(7.2));
    CHECK(compute_ev_demand({EvParkAccumulators{}}) == 0.0);

    CHECK(compute_ev_int({1.0, 2.0}, {4, 6}) == doctest::Approx(1.6));
    CHECK(compute_ev_int({0.5}, {8}) == doctest::Approx(0.5));
    CHECK(compute_ev_dur({0.5}, {3}) == doctest::Approx(0.5));
    CHECK(compute_ev_dur({1.0, 0.0}, {10, 30}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(compute_ev_int({1.0}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_ev_dur({}, {}), std::invalid_argument);
}

TEST_CASE("report from a history")
{
    PowerNetwork net;
    Bus b0, b1, b2;
    b1.customers = 10;
    b2.customers = 30;
    net.buses = {b0, b1, b2};
    EvPark p;
    p.households = 10;
    p.ev_share = 1.0;
    net.ev_parks = {p};

    IterationHistory h;
    h.load_points.resize(3);
    h.load_points[1] = {2, 3.0, 0.5};
    h.parks.resize(1);
    h.parks[0].v2g_hours = 0.25;
    h.parks[0].rho = 1.0;
    auto r = compute_report(h, net);
    CHECK(r.lambda_s == 2.0);
    CHECK(r.u_s == 3.0);
    REQUIRE(r.r_s);
    CHECK(*r.r_s == doctest::Approx(1.5));
    CHECK(r.saifi == doctest::Approx(0.5));
    CHECK(r.saidi == doctest::Approx(0.75));
    CHECK(r.ens_mwh == doctest::Approx(0.5));
    CHECK(r.ev_dur_h == doctest::Approx(0.25));
    CHECK(r.ev_int == doctest::Approx(1.0));

    h.load_points[1] = {};
    CHECK_FALSE(compute_report(h, net).r_s);
}

TEST_CASE("summaries")
{
    auto s = summarize({1.0, 2.0, 3.0});
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.variance == doctest::Approx(1.0));
    CHECK(s.median == doctest::Approx(2.0));
    CHECK(s.q1 == doctest::Approx(1.5));
    CHECK(s.q3 == doctest::Approx(2.5));
    auto one = summarize({4.0});
    CHECK(one.mean == 4.0);
    CHECK(one.variance == 0.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK_THROWS_AS(summarize({}), std::invalid_argument);

    IndexReport r;
    r.ens_mwh = 1.25;
    r.saifi = 0.4;
    auto agg = aggregate({r});
    CHECK(agg.indices[0].mean == 1.25);
    CHECK(agg.indices[1].mean == 0.4);
    CHECK(agg.indices[0].variance == 0.0);
}
