#pragma once

#include "v2grel/agents.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace v2grel {

using BusId = int;

struct Coordinates
{
    double x = 0.0;
    double y = 0.0;
};

struct Bus
{
    BusId id = 0;
    std::string name;
    /// Distribution system or microgrid the bus belongs to.
    std::string system = "D1";
    /// Peak demand; the load profile scales it over the year.
    double peak_p_mw = 0.0;
    double peak_q_mvar = 0.0;
    std::size_t load_profile = 0;
    std::string customer_class;
    /// Cost of shedding, currency per MWh.
    double shed_cost = 1.0;
    int customers = 0;
    int households = 0;
    std::optional<Coordinates> coordinates;
};

struct IsolationRecord
{
    /// Devices this call switched from closed to open.
    std::vector<std::size_t> opened;
    /// Every device that must stay open while the fault lasts.
    std::vector<std::size_t> held;
    std::vector<std::size_t> dead_buses;
    bool isolated = true;
};

struct Line
{
    std::string id;
    std::size_t from = 0;
    std::size_t to = 0;
    double length_km = 1.0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    double capacity_mw = 1e3;
    /// Failures per year and km.
    double failure_rate = 0.0;
    std::string repair_model;
    /// Tie line kept open in normal operation.
    bool normally_open = false;

    bool failed = false;
    double remaining_repair_h = 0.0;
    IsolationRecord isolation;
};

enum class SwitchKind
{
    disconnector,
    circuit_breaker,
};

enum class LineEnd
{
    from,
    to,
};

struct Switchgear
{
    std::string id;
    SwitchKind kind = SwitchKind::disconnector;
    std::size_t line = 0;
    LineEnd end = LineEnd::from;
    bool closed = true;
};

struct Generator
{
    std::string id;
    std::size_t bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    /// Models the connection to the overlying grid.
    bool slack = false;
};

struct NetworkSystem
{
    std::string id;
    enum class Kind
    {
        distribution,
        microgrid,
    } kind = Kind::distribution;
};

struct PowerNetwork
{
    std::string name;
    std::vector<NetworkSystem> systems;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Switchgear> switchgear;
    std::vector<Generator> generators;
    std::vector<Battery> batteries;
    std::vector<EvPark> ev_parks;

    /// Throws std::out_of_range for an unknown bus id.
    std::size_t bus_index(BusId id) const;
    std::size_t line_index(const std::string& id) const;
    /// A line carries power: in service, not failed, every device on it closed.
    bool conducting(std::size_t line) const;
};

struct RadialityReport
{
    bool ok = true;
    /// Bus ids on each detected cycle.
    std::vector<std::vector<BusId>> cycles;
    /// Bus ids not reachable within their system.
    std::vector<BusId> unreachable;
    std::vector<std::string> messages;
};

/// Check that the conducting lines form one tree per distribution system.
RadialityReport validate_radial(const PowerNetwork& network);

/// Open the nearest disconnectors around a failed line.
///
/// A disconnector on the failed line isolates it on its own. Otherwise the
/// search walks outward over lines without disconnectors, opening the first
/// disconnector found on each boundary line; every bus reached on the way
/// stays de-energized with the fault. When the search runs out of network
/// without meeting a disconnector the record is flagged as not isolated and
/// the whole reached section stays dead. The feeder breaker trips and
/// recloses inside the increment, so it never appears in `opened`.
IsolationRecord isolate_fault(PowerNetwork& network, std::size_t failed_line);

/// Mark a line failed and isolate it. Returns the isolation record.
const IsolationRecord& fail_line(PowerNetwork& network, std::size_t line, double repair_h);

/// Return a repaired line to service and reclose the devices its fault
/// opened, unless another active fault still needs them.
void restore_line(PowerNetwork& network, std::size_t line);

struct SubSystem
{
    std::vector<std::size_t> buses;
    std::vector<std::size_t> lines;
    std::vector<std::size_t> generators;
    std::vector<std::size_t> batteries;
    std::vector<std::size_t> ev_parks;
    std::optional<std::size_t> slack;
    /// In contact with a fault that could not be sectioned off.
    bool dead = false;

    bool has_slack() const { return slack.has_value(); }
    bool contains_bus(std::size_t bus) const;
};

/// Connected components over conducting lines, sources attached.
std::vector<SubSystem> find_sub_systems(const PowerNetwork& network);

} // namespace v2grel
