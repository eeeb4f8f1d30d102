#pragma once

#include "v2grel/stochastic.hpp"

#include <cstddef>
#include <string>

namespace v2grel {

/// Stationary battery behind an inverter. Positive exchange is discharge.
struct Battery
{
    std::string id;
    std::size_t bus = 0;
    double capacity_mwh = 0.5;
    double inverter_mw = 0.25;
    double efficiency = 0.95;
    double soc_min = 0.1;
    double stored_mwh = 0.5;

    void validate() const;
    double floor_mwh() const { return soc_min * capacity_mwh; }
    /// Largest power deliverable to the grid for `dt_h` hours.
    double max_discharge_mw(double dt_h) const;
    /// Largest power absorbable from the grid for `dt_h` hours.
    double max_charge_mw(double dt_h) const;
};

/// Apply a signed power request to the battery, clipping it to the inverter
/// rating and the energy bounds. Discharge draws delivered/efficiency from
/// storage; charge stores absorbed*efficiency. Returns the delivered (+) or
/// absorbed (-) power.
double battery_exchange(Battery& battery, double requested_mw, double dt_h);

/// Recharge an idle battery from the grid for `hours` at full inverter rate.
void battery_recharge(Battery& battery, double hours);

struct EvParkAccumulators
{
    /// Hours with unmet charging demand or discharge (U_EV of EV_Demand).
    double demand_hours = 0.0;
    /// Hours spent discharging to the grid (U_EV of EV_Dur).
    double v2g_hours = 0.0;
    double unmet_charge_kwh = 0.0;
    double charged_kwh = 0.0;
    double discharged_kwh = 0.0;
    /// Sum over activations of cars used / cars present.
    double rho = 0.0;
    int activations = 0;
};

/// Aggregated battery of the EVs plugged in at one bus.
struct EvPark
{
    std::size_t bus = 0;
    int households = 0;
    double ev_share = 0.46;
    double battery_kwh = 70.0;
    double charge_kw = 3.6;
    bool v2g = false;
    SocSpec soc;

    // Fault snapshot.
    bool active = false;
    int fleet = 0;
    double stored_kwh = 0.0;
    // Cars used in the current discharge activation, 0 when idle.
    int cars_in_use = 0;

    EvParkAccumulators acc;

    void validate() const;
    /// Cars owned by the households at this bus.
    int max_fleet() const;
    double power_limit_kw() const { return fleet * charge_kw; }
    double floor_kwh() const { return fleet * soc.soc_min * battery_kwh; }
    double ceiling_kwh() const { return fleet * battery_kwh; }
    double max_discharge_kw(double dt_h) const;
    double charge_demand_kw(double dt_h) const;
};

/// Draw the plugged-in fleet and each car's stored energy at fault onset.
void on_fault_draw(
    EvPark& park, double hour_of_day, const EvAvailabilityModel& model, RandomStream& stream);

/// Drop the fault snapshot once the park is supplied again.
void clear_fault(EvPark& park);

/// The exchange the park would make given the sub-system balance
/// (negative = deficit, positive = surplus), in MW, + = discharge.
/// V2G parks discharge into a deficit; every park charges from a surplus.
double ev_park_offer(const EvPark& park, double balance_mw, double dt_h);

/// Apply an exchange decided by the caller and update the accumulators.
void ev_park_commit(EvPark& park, double exchange_mw, double dt_h);

/// offer + commit in one step; returns the exchange in MW.
double ev_park_step(EvPark& park, double balance_mw, double dt_h);

} // namespace v2grel
