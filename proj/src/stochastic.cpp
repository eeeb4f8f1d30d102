#include "v2grel/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace v2grel {

namespace {

constexpr double hours_per_year = 8760.0;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t stream_key(std::string_view component)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : component) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t component)
{
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ iteration);
    s = splitmix64(s ^ component);
    engine_.seed(s);
}

double RandomStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open()
{
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        if (p == 1.0) {
            return std::numeric_limits<double>::infinity();
        }
        throw std::domain_error("normal_quantile: p outside [0, 1]");
    }
    // Acklam's rational approximation, then one Halley step against erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
        -2.759285104469687e+02, 1.383577518672690e+02, -3.066479806614716e+01,
        2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
        -1.556989798598866e+02, 6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
        -2.400758277161838e+00, -2.549732539343734e+00, 4.374664141464968e+00,
        2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
        2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

TruncatedNormal::TruncatedNormal(double loc, double scale, double lower, double upper)
    : loc_(loc)
    , scale_(scale)
    , lower_(lower)
    , upper_(upper)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("truncated normal: scale must be positive");
    }
    if (!(lower < upper)) {
        throw std::invalid_argument("truncated normal: lower bound must be below upper bound");
    }
    alpha_ = (lower - loc) / scale;
    beta_ = (upper - loc) / scale;
    mass_ = normal_cdf(beta_) - normal_cdf(alpha_);
    if (!(mass_ > 0.0)) {
        throw std::invalid_argument("truncated normal: no probability mass inside the bounds");
    }
}

double TruncatedNormal::pdf(double x) const
{
    if (x < lower_ || x > upper_) {
        return 0.0;
    }
    double z = (x - loc_) / scale_;
    return std::exp(-0.5 * z * z) / (scale_ * std::sqrt(2.0 * std::numbers::pi) * mass_);
}

double TruncatedNormal::cdf(double x) const
{
    if (x <= lower_) {
        return 0.0;
    }
    if (x >= upper_) {
        return 1.0;
    }
    return (normal_cdf((x - loc_) / scale_) - normal_cdf(alpha_)) / mass_;
}

double TruncatedNormal::mean() const
{
    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    return loc_ + scale_ * (phi(alpha_) - phi(beta_)) / mass_;
}

double TruncatedNormal::sample(RandomStream& stream) const
{
    double u = stream.uniform_open();
    // Work in whichever tail keeps the CDF values away from 1.
    double x;
    if (alpha_ > 0.0) {
        double lo = normal_cdf(-beta_);
        double hi = normal_cdf(-alpha_);
        x = loc_ - scale_ * normal_quantile(lo + u * (hi - lo));
    } else {
        double lo = normal_cdf(alpha_);
        double hi = normal_cdf(beta_);
        x = loc_ + scale_ * normal_quantile(lo + u * (hi - lo));
    }
    return std::clamp(x, lower_, upper_);
}

double failure_probability(double rate_per_km_year, double length_km, double dt_hours)
{
    return rate_per_km_year * length_km * dt_hours / hours_per_year;
}

bool sample_line_failure(
    double rate_per_km_year, double length_km, double dt_hours, RandomStream& stream)
{
    double p = failure_probability(rate_per_km_year, length_km, dt_hours);
    if (p <= 0.0) {
        return false;
    }
    return stream.uniform() < p;
}

std::int64_t increments_until_failure(
    double rate_per_km_year, double length_km, double dt_hours, RandomStream& stream)
{
    double p = failure_probability(rate_per_km_year, length_km, dt_hours);
    if (p <= 0.0) {
        return never;
    }
    if (p >= 1.0) {
        return 0;
    }
    double k = std::floor(std::log(stream.uniform_open()) / std::log1p(-p));
    if (k >= static_cast<double>(never)) {
        return never;
    }
    return static_cast<std::int64_t>(k);
}

void EvAvailabilityModel::validate() const
{
    auto check = [](double v, const char* what) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(std::string("ev availability: ") + what + " outside [0, 1]");
        }
    };
    check(ev_share, "ev_share");
    check(daily_charge_frequency, "daily_charge_frequency");
    for (double c : charging_profile) {
        check(c, "charging_profile entry");
    }
}

double EvAvailabilityModel::charging_share(double hour_of_day) const
{
    double h = std::fmod(hour_of_day, 24.0);
    if (h < 0.0) {
        h += 24.0;
    }
    auto index = static_cast<std::size_t>(h);
    return charging_profile[std::min<std::size_t>(index, 23)];
}

double expected_available_evs(
    double hour_of_day, const EvAvailabilityModel& model, double n_customers)
{
    return n_customers * model.ev_share * model.charging_share(hour_of_day)
        * model.daily_charge_frequency;
}

int sample_binomial(int n, double p, RandomStream& stream)
{
    if (n <= 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    int k = 0;
    for (int i = 0; i < n; ++i) {
        if (stream.uniform() < p) {
            ++k;
        }
    }
    return k;
}

int sample_ev_count(
    int households, double hour_of_day, const EvAvailabilityModel& model, RandomStream& stream)
{
    int n = static_cast<int>(std::lround(households * model.ev_share));
    double p = model.charging_share(hour_of_day) * model.daily_charge_frequency;
    return sample_binomial(n, p, stream);
}

void SocSpec::validate() const
{
    if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0)) {
        throw std::invalid_argument("soc bounds must satisfy 0 <= min < max <= 1");
    }
}

double sample_soc(const SocSpec& spec, double capacity_kwh, RandomStream& stream)
{
    double lo = spec.soc_min * capacity_kwh;
    double hi = spec.soc_max * capacity_kwh;
    return lo + stream.uniform() * (hi - lo);
}

} // namespace v2grel
