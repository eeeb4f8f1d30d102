#include "v2grel/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace v2grel {

std::size_t LinearProgram::add_variable(double lo, double hi)
{
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& row : rows) {
        row.push_back(0.0);
    }
    for (auto& c : objectives) {
        c.push_back(0.0);
    }
    return variables++;
}

void LinearProgram::add_row(std::vector<double> coefficients, double b)
{
    coefficients.resize(variables, 0.0);
    rows.push_back(std::move(coefficients));
    rhs.push_back(b);
}

namespace {

constexpr double pivot_tol = 1e-9;
constexpr double cost_tol = 1e-9;
constexpr double bound_tol = 1e-9;

class Tableau
{
public:
    // Columns: structural 0..n-1 (shifted to lower bound 0), artificials n..n+m-1.
    Tableau(const LinearProgram& lp)
        : m_(lp.rows.size())
        , n_(lp.variables)
        , cols_(n_ + m_)
        , t_(m_, std::vector<double>(cols_, 0.0))
        , width_(cols_, 0.0)
        , value_(m_, 0.0)
        , basis_(m_)
        , at_upper_(cols_, false)
        , is_basic_(cols_, false)
        , blocked_(cols_, false)
    {
        for (std::size_t j = 0; j < n_; ++j) {
            width_[j] = lp.upper[j] - lp.lower[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            double b = lp.rhs[i];
            for (std::size_t j = 0; j < n_; ++j) {
                b -= lp.rows[i][j] * lp.lower[j];
            }
            double sign = b < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) {
                t_[i][j] = sign * lp.rows[i][j];
            }
            t_[i][n_ + i] = 1.0;
            width_[n_ + i] = std::numeric_limits<double>::infinity();
            value_[i] = sign * b;
            basis_[i] = n_ + i;
            is_basic_[n_ + i] = true;
        }
    }

    // Drive the objective to its minimum over the unblocked columns.
    void optimize(const std::vector<double>& cost, int& pivots, int limit)
    {
        std::vector<double> d(cols_);
        for (;;) {
            if (pivots > limit) {
                throw LpError("simplex: iteration limit reached");
            }
            reduced_costs(cost, d);
            // Bland: lowest index among improving columns.
            std::size_t enter = cols_;
            double dir = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (is_basic_[j] || blocked_[j] || width_[j] <= 0.0) {
                    continue;
                }
                if (!at_upper_[j] && d[j] < -cost_tol) {
                    enter = j;
                    dir = 1.0;
                    break;
                }
                if (at_upper_[j] && d[j] > cost_tol) {
                    enter = j;
                    dir = -1.0;
                    break;
                }
            }
            if (enter == cols_) {
                return;
            }

            double step = width_[enter];
            std::size_t leave = m_;
            bool leave_to_upper = false;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = dir * t_[i][enter];
                if (std::abs(a) <= pivot_tol) {
                    continue;
                }
                double limit_i;
                bool to_upper;
                if (a > 0.0) {
                    limit_i = std::max(0.0, value_[i]) / a;
                    to_upper = false;
                } else {
                    double room = width_[basis_[i]] - value_[i];
                    if (!std::isfinite(room)) {
                        continue;
                    }
                    limit_i = std::max(0.0, room) / -a;
                    to_upper = true;
                }
                if (limit_i < step - bound_tol
                    || (leave != m_ && limit_i <= step + bound_tol && basis_[i] < basis_[leave])) {
                    step = limit_i;
                    leave = i;
                    leave_to_upper = to_upper;
                } else if (leave == m_ && limit_i <= step + bound_tol && limit_i < step) {
                    step = limit_i;
                    leave = i;
                    leave_to_upper = to_upper;
                }
            }
            if (!std::isfinite(step)) {
                throw LpError("simplex: unbounded direction");
            }

            for (std::size_t i = 0; i < m_; ++i) {
                value_[i] -= dir * t_[i][enter] * step;
            }
            ++pivots;
            if (leave == m_) {
                at_upper_[enter] = !at_upper_[enter];
                continue;
            }
            double entering_value = (at_upper_[enter] ? width_[enter] : 0.0) + dir * step;
            std::size_t old = basis_[leave];
            is_basic_[old] = false;
            at_upper_[old] = leave_to_upper;
            pivot(leave, enter);
            basis_[leave] = enter;
            is_basic_[enter] = true;
            at_upper_[enter] = false;
            value_[leave] = entering_value;
        }
    }

    double artificial_sum() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= n_) {
                s += value_[i];
            }
        }
        return s;
    }

    void close_artificials()
    {
        for (std::size_t j = n_; j < cols_; ++j) {
            width_[j] = 0.0;
            blocked_[j] = true;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= n_) {
                value_[i] = 0.0;
            }
        }
    }

    // Hold every nonbasic column with a nonzero reduced cost at its bound.
    void fix_optimal_face(const std::vector<double>& cost)
    {
        std::vector<double> d(cols_);
        reduced_costs(cost, d);
        for (std::size_t j = 0; j < n_; ++j) {
            if (!is_basic_[j] && std::abs(d[j]) > cost_tol) {
                blocked_[j] = true;
            }
        }
    }

    std::vector<double> solution(const LinearProgram& lp) const
    {
        std::vector<double> x(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            x[j] = lp.lower[j] + (at_upper_[j] ? width_[j] : 0.0);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) {
                std::size_t j = basis_[i];
                x[j] = lp.lower[j] + std::clamp(value_[i], 0.0, width_[j]);
            }
        }
        return x;
    }

private:
    void reduced_costs(const std::vector<double>& cost, std::vector<double>& d) const
    {
        for (std::size_t j = 0; j < cols_; ++j) {
            d[j] = j < cost.size() ? cost[j] : 0.0;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = basis_[i] < cost.size() ? cost[basis_[i]] : 0.0;
            if (cb == 0.0) {
                continue;
            }
            const auto& row = t_[i];
            for (std::size_t j = 0; j < cols_; ++j) {
                d[j] -= cb * row[j];
            }
        }
    }

    void pivot(std::size_t r, std::size_t c)
    {
        auto& prow = t_[r];
        double inv = 1.0 / prow[c];
        for (double& v : prow) {
            v *= inv;
        }
        prow[c] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double f = t_[i][c];
            if (f == 0.0) {
                continue;
            }
            auto& row = t_[i];
            for (std::size_t j = 0; j < cols_; ++j) {
                row[j] -= f * prow[j];
            }
            row[c] = 0.0;
        }
    }

    std::size_t m_;
    std::size_t n_;
    std::size_t cols_;
    std::vector<std::vector<double>> t_;
    std::vector<double> width_;
    std::vector<double> value_;
    std::vector<std::size_t> basis_;
    std::vector<bool> at_upper_;
    std::vector<bool> is_basic_;
    std::vector<bool> blocked_;
};

void check_input(const LinearProgram& lp)
{
    if (lp.lower.size() != lp.variables || lp.upper.size() != lp.variables) {
        throw std::invalid_argument("lp: bound vectors do not match the variable count");
    }
    if (lp.rhs.size() != lp.rows.size()) {
        throw std::invalid_argument("lp: rhs does not match the row count");
    }
    for (const auto& row : lp.rows) {
        if (row.size() != lp.variables) {
            throw std::invalid_argument("lp: row length does not match the variable count");
        }
    }
    for (const auto& c : lp.objectives) {
        if (c.size() != lp.variables) {
            throw std::invalid_argument("lp: objective length does not match the variable count");
        }
    }
    for (std::size_t j = 0; j < lp.variables; ++j) {
        if (!std::isfinite(lp.lower[j]) || !std::isfinite(lp.upper[j])
            || lp.lower[j] > lp.upper[j]) {
            throw std::invalid_argument("lp: variable bounds must be finite and ordered");
        }
    }
}

} // namespace

LpResult solve_lexicographic(const LinearProgram& lp)
{
    check_input(lp);
    const std::size_t m = lp.rows.size();
    const std::size_t n = lp.variables;

    double scale = 1.0;
    for (double b : lp.rhs) {
        scale = std::max(scale, std::abs(b));
    }
    for (std::size_t j = 0; j < n; ++j) {
        scale = std::max({scale, std::abs(lp.lower[j]), std::abs(lp.upper[j])});
    }

    Tableau tab(lp);
    LpResult result;
    const int limit = static_cast<int>(50 * (m + n) + 1000);

    std::vector<double> phase1(n + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        phase1[n + i] = 1.0;
    }
    tab.optimize(phase1, result.pivots, limit);
    if (tab.artificial_sum() > 1e-8 * scale) {
        throw LpError("simplex: program is infeasible");
    }
    tab.close_artificials();

    for (std::size_t k = 0; k < lp.objectives.size(); ++k) {
        tab.optimize(lp.objectives[k], result.pivots, limit);
        if (k + 1 < lp.objectives.size()) {
            tab.fix_optimal_face(lp.objectives[k]);
        }
    }

    result.x = tab.solution(lp);
    for (std::size_t i = 0; i < m; ++i) {
        double r = -lp.rhs[i];
        for (std::size_t j = 0; j < n; ++j) {
            r += lp.rows[i][j] * result.x[j];
        }
        if (std::abs(r) > 1e-7 * scale) {
            throw LpError("simplex: residual " + std::to_string(r) + " on row " + std::to_string(i));
        }
    }
    for (const auto& c : lp.objectives) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            v += c[j] * result.x[j];
        }
        result.values.push_back(v);
    }
    return result;
}

} // namespace v2grel
