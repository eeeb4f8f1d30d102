#include "oracles.hpp"
#include "v2grel/stochastic.hpp"

#include <doctest.h>

#include <cmath>

using namespace v2grel;

TEST_CASE("streams are reproducible and distinct")
{
    RandomStream a(7, 3, "fail/L1"), b(7, 3, "fail/L1"), c(7, 4, "fail/L1"), d(7, 3, "fail/L2");
    double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va != c.uniform());
    CHECK(va != d.uniform());
    CHECK(stream_key("fail/L1") != stream_key("fail/L2"));
}

TEST_CASE("failure probability per increment")
{
    CHECK(failure_probability(0.026, 1.0, 5.0 / 60.0) == doctest::Approx(2.473e-7).epsilon(1e-3));
    CHECK(failure_probability(0.0, 1.0, 5.0 / 60.0) == 0.0);
    RandomStream s(1, 0, "x");
    CHECK(increments_until_failure(0.0, 3.0, 5.0 / 60.0, s) == never);
}

TEST_CASE("geometric gaps reproduce the annual rate")
{
    // 1 failure per year on average, counted over 3000 years of 5 min steps.
    const double dt = 5.0 / 60.0;
    const std::int64_t year = 8760 * 12;
    long failures = 0;
    for (int it = 0; it < 3000; ++it) {
        RandomStream s(11, it, "fail/L1");
        std::int64_t k = increments_until_failure(1.0, 1.0, dt, s);
        while (k < year) {
            ++failures;
            k += 1 + increments_until_failure(1.0, 1.0, dt, s);
        }
    }
    CHECK(failures / 3000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bernoulli draws agree with the geometric gap in mean")
{
    const double p = failure_probability(2000.0, 1.0, 1.0 / 60.0);
    RandomStream s(3, 0, "b");
    long hits = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        hits += sample_line_failure(2000.0, 1.0, 1.0 / 60.0, s);
    }
    CHECK(hits / double(n) == doctest::Approx(p).epsilon(0.03));
    RandomStream g(3, 1, "g");
    double gaps = 0.0;
    for (int i = 0; i < 20000; ++i) {
        gaps += static_cast<double>(increments_until_failure(2000.0, 1.0, 1.0 / 60.0, g));
    }
    CHECK(gaps / 20000.0 == doctest::Approx((1.0 - p) / p).epsilon(0.03));
}

TEST_CASE("truncated normal repair times")
{
    TruncatedNormal tn(1.0, 0.5, 0.0, 2.0);
    RandomStream s(5, 0, "repair/L1");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = tn.sample(s);
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 2.0);
        sum += x;
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(tn.mean() == doctest::Approx(1.0));
    CHECK(tn.cdf(0.0) == 0.0);
    CHECK(tn.cdf(2.0) == doctest::Approx(1.0));
    CHECK(tn.cdf(1.0) == doctest::Approx(0.5));

    TruncatedNormal narrow(1.0, 1e-9, 0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        CHECK(narrow.sample(s) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK_THROWS_AS(TruncatedNormal(1.0, 0.0, 0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedNormal(1.0, 0.5, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("truncated normal passes KS for every repair level")
{
    for (double loc : {0.5, 1.0, 1.5}) {
        TruncatedNormal tn(loc, 0.5, 0.0, 2.0);
        RandomStream s(9, 0, "ks/" + std::to_string(loc));
        std::vector<double> x(100000);
        for (double& v : x) {
            v = tn.sample(s);
        }
        double d = oracle::ks_statistic(x, [&](double v) { return tn.cdf(v); });
        CHECK(d < oracle::ks_critical_1pct(x.size()));
    }
}

TEST_CASE("EV availability arithmetic")
{
    EvAvailabilityModel m;
    m.ev_share = 0.46;
    m.daily_charge_frequency = 0.61;
    m.charging_profile.fill(0.5);
    CHECK(expected_available_evs(10.0, m, 100) == doctest::Approx(14.03));
    m.charging_profile.fill(0.0);
    CHECK(expected_available_evs(10.0, m, 100) == 0.0);
    m.ev_share = 1.5;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("binomial EV counts")
{
    RandomStream s(2, 0, "ev/2");
    CHECK(sample_binomial(10, 1.0, s) == 10);
    CHECK(sample_binomial(10, 0.0, s) == 0);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double k = sample_binomial(20, 0.3, s);
        sum += k;
        sq += k * k;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(6.0).epsilon(0.01));
    CHECK(var == doctest::Approx(4.2).epsilon(0.01));
}

TEST_CASE("state of charge draws")
{
    RandomStream s(4, 0, "soc");
    SocSpec spec{0.1, 1.0};
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double e = sample_soc(spec, 70.0, s);
        REQUIRE(e >= 7.0);
        REQUIRE(e <= 70.0);
        sum += e;
    }
    CHECK(sum / n == doctest::Approx(38.5).epsilon(0.2 / 38.5));
    SocSpec flat{0.5, 0.5 + 1e-12};
    CHECK(sample_soc(flat, 70.0, s) == doctest::Approx(35.0));
}
