#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2grel {

/// min c'x  s.t.  A x = b,  lower <= x <= upper, all bounds finite.
///
/// Several objectives are minimized in sequence: each later objective only
/// chooses among the optima of the earlier ones.
struct LinearProgram
{
    std::size_t variables = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    /// Dense rows of A, each `variables` long.
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<std::vector<double>> objectives;

    std::size_t add_variable(double lo, double hi);
    void add_row(std::vector<double> coefficients, double b);
};

struct LpResult
{
    std::vector<double> x;
    /// Value of each objective at x.
    std::vector<double> values;
    int pivots = 0;
};

class LpError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bounded-variable primal simplex on a dense tableau, phase 1 with
/// artificials, Bland's rule throughout. Throws LpError when the program is
/// infeasible, the iteration limit is hit or the final point fails the
/// residual check; throws std::invalid_argument on malformed input.
LpResult solve_lexicographic(const LinearProgram& lp);

} // namespace v2grel
