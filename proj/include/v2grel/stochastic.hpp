#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace v2grel {

/// Hash a component identifier into a stream key (FNV-1a, 64 bit).
std::uint64_t stream_key(std::string_view component);

/// A reproducible substream of random numbers.
///
/// Every (seed, iteration, component) triple maps to its own engine, so the
/// sequence drawn for a component never depends on how many numbers other
/// components consumed or on which thread runs the iteration.
class RandomStream
{
public:
    RandomStream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t component);
    RandomStream(std::uint64_t seed, std::uint64_t iteration, std::string_view component)
        : RandomStream(seed, iteration, stream_key(component))
    {
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();

private:
    std::mt19937_64 engine_;
};

/// Normal distribution renormalized over [lower, upper].
class TruncatedNormal
{
public:
    /// Throws std::invalid_argument unless scale > 0 and lower < upper.
    TruncatedNormal(double loc, double scale, double lower, double upper);

    double loc() const { return loc_; }
    double scale() const { return scale_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double mean() const;
    double sample(RandomStream& stream) const;

private:
    double loc_;
    double scale_;
    double lower_;
    double upper_;
    double alpha_;
    double beta_;
    double mass_;
};

double normal_cdf(double z);
/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

/// Probability that a line fails within one increment.
double failure_probability(double rate_per_km_year, double length_km, double dt_hours);

/// Bernoulli draw with the per-increment failure probability.
bool sample_line_failure(
    double rate_per_km_year, double length_km, double dt_hours, RandomStream& stream);

inline constexpr std::int64_t never = std::numeric_limits<std::int64_t>::max();

/// Number of healthy increments before the next failing increment.
///
/// Geometrically distributed with the per-increment failure probability,
/// which is the same law as repeating sample_line_failure until it returns
/// true. Returns `never` for a zero rate.
std::int64_t increments_until_failure(
    double rate_per_km_year, double length_km, double dt_hours, RandomStream& stream);

struct EvAvailabilityModel
{
    double ev_share = 0.46;
    /// Share of EVs plugged in and charging for each hour of the day.
    std::array<double, 24> charging_profile{};
    double daily_charge_frequency = 0.61;

    /// Throws std::invalid_argument when a share lies outside [0, 1].
    void validate() const;
    double charging_share(double hour_of_day) const;
};

/// Expected number of EVs charging at home: customers * share * C(t) * D.
double expected_available_evs(
    double hour_of_day, const EvAvailabilityModel& model, double n_customers);

/// Binomial(n, p) by summing Bernoulli trials.
int sample_binomial(int n, double p, RandomStream& stream);

/// Cars plugged in at a park with `households` households at hour t.
int sample_ev_count(
    int households, double hour_of_day, const EvAvailabilityModel& model, RandomStream& stream);

struct SocSpec
{
    double soc_min = 0.1;
    double soc_max = 1.0;

    void validate() const;
};

/// Stored energy of one car, uniform on [soc_min, soc_max] * capacity.
double sample_soc(const SocSpec& spec, double capacity_kwh, RandomStream& stream);

} // namespace v2grel
