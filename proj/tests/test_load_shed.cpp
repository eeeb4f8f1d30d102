#include "oracles.hpp"
#include "v2grel/load_shed.hpp"
#include "v2grel/simplex.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace v2grel;

namespace {

const double inf = std::numeric_limits<double>::infinity();

ShedProblem two_loads()
{
    ShedProblem p;
    p.node_ids = {1, 2, 3};
    p.generators = {{0, 0.0, 5.0, 0.0, "G"}};
    p.loads = {{1, 3.0, 1.0, "a"}, {2, 4.0, 2.0, "b"}};
    p.lines = {{0, 1, inf, "L1"}, {0, 2, inf, "L2"}};
    return p;
}

} // namespace

TEST_CASE("cheapest load is shed first")
{
    ShedProblem p = two_loads();
    auto s = solve_shed(p);
    CHECK(s.shed[0] == doctest::Approx(2.0));
    CHECK(s.shed[1] == doctest::Approx(0.0));
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(oracle::shed_cost(p) == doctest::Approx(2.0));
    CHECK(constraint_violation(p, s) < 1e-9);
}

TEST_CASE("ample supply sheds nothing")
{
    ShedProblem p = two_loads();
    p.generators[0].max_mw = 10.0;
    auto s = solve_shed(p);
    CHECK(s.total_shed() == doctest::Approx(0.0));
    CHECK(s.objective == 0.0);
}

TEST_CASE("line capacity forces shedding")
{
    ShedProblem p;
    p.node_ids = {1, 2};
    p.generators = {{0, -10.0, 10.0, 0.0, "G"}};
    p.loads = {{1, 3.0, 100.0, "a"}};
    p.lines = {{0, 1, 1.0, "L1"}};
    auto s = solve_shed(p);
    CHECK(s.shed[0] == doctest::Approx(2.0));
    CHECK(s.flows[0] == doctest::Approx(1.0));
    CHECK(oracle::shed_cost(p) == doctest::Approx(200.0));
}

TEST_CASE("island without sources sheds everything")
{
    ShedProblem p;
    p.node_ids = {6, 7};
    p.loads = {{0, 0.2, 10.0, "a"}, {1, 0.3, 10.0, "b"}};
    p.lines = {{0, 1, 6.0, "L6"}};
    auto s = solve_shed(p);
    CHECK(s.total_shed() == doctest::Approx(0.5));
}

TEST_CASE("battery bound limits island supply")
{
    ShedProblem p;
    p.node_ids = {18};
    p.generators = {{0, 0.0, 0.25, 1.0, "B18"}};
    p.loads = {{0, 0.4, 10.0, "a"}};
    auto s = solve_shed(p);
    CHECK(s.dispatch[0] == doctest::Approx(0.25));
    CHECK(s.shed[0] == doctest::Approx(0.15));
}

TEST_CASE("zero demand gives zero objective")
{
    ShedProblem p;
    p.node_ids = {1};
    p.loads = {{0, 0.0, 3.0, "a"}};
    CHECK(solve_shed(p).objective == 0.0);
    CHECK(oracle::shed_cost(p) == 0.0);
}

TEST_CASE("ties shed the lowest node id first")
{
    ShedProblem p;
    p.node_ids = {9, 4};
    p.generators = {{0, 0.0, 1.0, 0.0, "G"}};
    p.loads = {{0, 1.0, 5.0, "a"}, {1, 1.0, 5.0, "b"}};
    p.lines = {{0, 1, inf, "L"}};
    auto s = solve_shed(p);
    CHECK(s.shed[1] == doctest::Approx(1.0));
    CHECK(s.shed[0] == doctest::Approx(0.0));
}

TEST_CASE("ties dispatch the preferred generator")
{
    ShedProblem p;
    p.node_ids = {1};
    p.generators = {{0, 0.0, 1.0, 2.0, "late"}, {0, 0.0, 1.0, 1.0, "early"}};
    p.loads = {{0, 0.6, 5.0, "a"}};
    auto s = solve_shed(p);
    CHECK(s.dispatch[1] == doctest::Approx(0.6));
    CHECK(s.dispatch[0] == doctest::Approx(0.0));
}

TEST_CASE("invalid problems are rejected")
{
    ShedProblem p = two_loads();
    p.loads[0].node = 7;
    CHECK_THROWS_AS(solve_shed(p), std::invalid_argument);
    p = two_loads();
    p.generators[0].min_mw = 6.0;
    CHECK_THROWS_AS(solve_shed(p), std::invalid_argument);
}

TEST_CASE("infeasible problems raise with the problem attached")
{
    ShedProblem p;
    p.node_ids = {1};
    p.generators = {{0, 1.0, 2.0, 0.0, "must-run"}};
    try {
        solve_shed(p);
        FAIL("expected ShedError");
    } catch (const ShedError& e) {
        CHECK(e.problem.find("must-run") != std::string::npos);
    }
}

TEST_CASE("randomized problems match the exact oracle")
{
    std::mt19937_64 rng(2024);
    int agree = 0;
    for (int trial = 0; trial < 300; ++trial) {
        ShedProblem p = oracle::random_shed_problem(rng, 4);
        auto s = solve_shed(p);
        double want = oracle::shed_cost(p);
        bool ok = std::abs(s.objective - want) <= 1e-6 * std::max(1.0, std::abs(want));
        agree += ok;
        CHECK_MESSAGE(ok, dump_problem(p));
        CHECK(constraint_violation(p, s) < 1e-7);
    }
    CHECK(agree == 300);
}

TEST_CASE("lexicographic simplex on a textbook program")
{
    // max x + y st x + 2y <= 4, 3x + y <= 6  ->  (1.6, 1.2)
    LinearProgram lp;
    std::size_t x = lp.add_variable(0.0, 100.0);
    std::size_t y = lp.add_variable(0.0, 100.0);
    lp.add_variable(0.0, 100.0);
    lp.add_variable(0.0, 100.0);
    lp.add_row({1.0, 2.0, 1.0, 0.0}, 4.0);
    lp.add_row({3.0, 1.0, 0.0, 1.0}, 6.0);
    std::vector<double> c(lp.variables, 0.0);
    c[x] = -1.0;
    c[y] = -1.0;
    lp.objectives.push_back(c);
    auto r = solve_lexicographic(lp);
    CHECK(r.x[x] == doctest::Approx(1.6));
    CHECK(r.x[y] == doctest::Approx(1.2));
    CHECK(r.values[0] == doctest::Approx(-2.8));

    // Second stage picks min x on the optimal face of max x + 2y.
    lp.objectives = {{-1.0, -2.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0}};
    r = solve_lexicographic(lp);
    CHECK(r.values[0] == doctest::Approx(-4.0));
    CHECK(r.x[x] == doctest::Approx(0.0));
    CHECK(r.x[y] == doctest::Approx(2.0));

    lp.objectives = {{0.0, 0.0, 0.0, 0.0}};
    lp.add_row({1.0, 1.0, 0.0, 0.0}, 500.0);
    CHECK_THROWS_AS(solve_lexicographic(lp), LpError);
}
