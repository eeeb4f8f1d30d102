#pragma once

#include "v2grel/network.hpp"
#include "v2grel/power_flow.hpp"
#include "v2grel/stochastic.hpp"

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2grel {

inline constexpr int dataset_schema_version = 1;
inline constexpr double hours_per_year = 8760.0;

/// Hourly demand relative to peak with a seasonal factor per month.
struct LoadProfile
{
    std::string id;
    std::array<double, 24> hourly{};
    std::array<double, 12> monthly{};

    /// Factor at an hour of the (365 day) year, interpolated linearly
    /// between the hourly points.
    double factor(double hour_of_year) const;
};

/// Zero-based month of an hour of a 365 day year.
int month_of(double hour_of_year);

struct RepairSpec
{
    std::string id;
    double loc = 1.0;
    double scale = 0.5;
    double lower = 0.0;
    double upper = 2.0;

    TruncatedNormal distribution() const { return {loc, scale, lower, upper}; }
};

/// A network together with everything the simulator reads from file.
struct Dataset
{
    PowerNetwork network;
    PerUnitBase base;
    std::vector<LoadProfile> profiles;
    std::map<std::string, RepairSpec> repair_models;
    EvAvailabilityModel ev_availability;
    /// Original document, kept for hashing.
    std::string source;
    std::string origin;

    const RepairSpec& repair_model(const std::string& id) const;
};

/// Schema or consistency problem in an input file. `where` names the field.
class DatasetError : public std::runtime_error
{
public:
    DatasetError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what)
        , field(where)
    {
    }
    std::string field;
};

/// Parse and validate a network document. The result passes validate_radial.
Dataset parse_dataset(const std::string& text, const std::string& origin);
Dataset load_dataset(const std::string& path);
/// The bundled 33-bus feeder.
Dataset embedded_dataset();
const std::string& embedded_dataset_text();

/// FNV-1a 64 of a byte string, hex encoded.
std::string content_hash(const std::string& bytes);

} // namespace v2grel
