#include "v2grel/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace v2grel {

namespace {
constexpr double power_eps = 1e-12;
}

void Battery::validate() const
{
    if (!(capacity_mwh > 0.0) || !(inverter_mw > 0.0)) {
        throw std::invalid_argument("battery " + id + ": capacity and inverter must be positive");
    }
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("battery " + id + ": efficiency must lie in (0, 1]");
    }
    if (!(soc_min >= 0.0 && soc_min < 1.0)) {
        throw std::invalid_argument("battery " + id + ": soc_min must lie in [0, 1)");
    }
}

double Battery::max_discharge_mw(double dt_h) const
{
    double energy = std::max(0.0, stored_mwh - floor_mwh());
    return std::min(inverter_mw, energy * efficiency / dt_h);
}

double Battery::max_charge_mw(double dt_h) const
{
    double headroom = std::max(0.0, capacity_mwh - stored_mwh);
    return std::min(inverter_mw, headroom / (efficiency * dt_h));
}

double battery_exchange(Battery& battery, double requested_mw, double dt_h)
{
    if (requested_mw > 0.0) {
        double delivered = std::min(requested_mw, battery.max_discharge_mw(dt_h));
        battery.stored_mwh -= delivered * dt_h / battery.efficiency;
        battery.stored_mwh = std::max(battery.stored_mwh, battery.floor_mwh());
        return delivered;
    }
    if (requested_mw < 0.0) {
        double absorbed = std::min(-requested_mw, battery.max_charge_mw(dt_h));
        battery.stored_mwh += absorbed * dt_h * battery.efficiency;
        battery.stored_mwh = std::min(battery.stored_mwh, battery.capacity_mwh);
        return -absorbed;
    }
    return 0.0;
}

void battery_recharge(Battery& battery, double hours)
{
    double gain = battery.inverter_mw * battery.efficiency * hours;
    battery.stored_mwh = std::min(battery.capacity_mwh, battery.stored_mwh + gain);
}

void EvPark::validate() const
{
    soc.validate();
    if (households < 0) {
        throw std::invalid_argument("ev park: negative household count");
    }
    if (!(ev_share >= 0.0 && ev_share <= 1.0)) {
        throw std::invalid_argument("ev park: ev share outside [0, 1]");
    }
    if (!(battery_kwh > 0.0) || !(charge_kw > 0.0)) {
        throw std::invalid_argument("ev park: battery and charger ratings must be positive");
    }
}

int EvPark::max_fleet() const
{
    return static_cast<int>(std::lround(households * ev_share));
}

double EvPark::max_discharge_kw(double dt_h) const
{
    double energy = std::max(0.0, stored_kwh - floor_kwh());
    return std::min(power_limit_kw(), energy / dt_h);
}

double EvPark::charge_demand_kw(double dt_h) const
{
    double headroom = std::max(0.0, ceiling_kwh() - stored_kwh);
    return std::min(power_limit_kw(), headroom / dt_h);
}

void on_fault_draw(
    EvPark& park, double hour_of_day, const EvAvailabilityModel& model, RandomStream& stream)
{
    EvAvailabilityModel local = model;
    local.ev_share = park.ev_share;
    park.fleet = sample_ev_count(park.households, hour_of_day, local, stream);
    park.stored_kwh = 0.0;
    for (int car = 0; car < park.fleet; ++car) {
        park.stored_kwh += sample_soc(park.soc, park.battery_kwh, stream);
    }
    park.active = true;
    park.cars_in_use = 0;
}

void clear_fault(EvPark& park)
{
    park.active = false;
    park.fleet = 0;
    park.stored_kwh = 0.0;
    park.cars_in_use = 0;
}

double ev_park_offer(const EvPark& park, double balance_mw, double dt_h)
{
    if (!park.active || park.fleet == 0) {
        return 0.0;
    }
    if (balance_mw < 0.0) {
        if (!park.v2g) {
            return 0.0;
        }
        return std::min(park.max_discharge_kw(dt_h) / 1000.0, -balance_mw);
    }
    if (balance_mw > 0.0) {
        return -std::min(park.charge_demand_kw(dt_h) / 1000.0, balance_mw);
    }
    return 0.0;
}

void ev_park_commit(EvPark& park, double exchange_mw, double dt_h)
{
    if (!park.active) {
        return;
    }
    double exchange_kw = exchange_mw * 1000.0;
    if (!park.v2g && exchange_kw > 0.0) {
        exchange_kw = 0.0;
    }
    double demand_kw = park.charge_demand_kw(dt_h);
    double charged_kw = 0.0;
    double discharged_kw = 0.0;
    if (exchange_kw > power_eps) {
        discharged_kw = std::min(exchange_kw, park.max_discharge_kw(dt_h));
        park.stored_kwh = std::max(park.floor_kwh(), park.stored_kwh - discharged_kw * dt_h);
    } else if (exchange_kw < -power_eps) {
        charged_kw = std::min(-exchange_kw, demand_kw);
        park.stored_kwh = std::min(park.ceiling_kwh(), park.stored_kwh + charged_kw * dt_h);
    }

    auto& acc = park.acc;
    double unmet_kw = std::max(0.0, demand_kw - charged_kw);
    if (unmet_kw > power_eps || discharged_kw > power_eps) {
        acc.demand_hours += dt_h;
    }
    acc.unmet_charge_kwh += unmet_kw * dt_h;
    acc.charged_kwh += charged_kw * dt_h;
    acc.discharged_kwh += discharged_kw * dt_h;

    if (discharged_kw > power_eps) {
        acc.v2g_hours += dt_h;
        int used = std::min(park.fleet,
            static_cast<int>(std::ceil(discharged_kw / park.charge_kw - 1e-9)));
        if (park.cars_in_use == 0) {
            ++acc.activations;
        }
        // Each activation adds the peak share of present cars it used.
        if (used > park.cars_in_use) {
            acc.rho += static_cast<double>(used - park.cars_in_use) / park.fleet;
            park.cars_in_use = used;
        }
    } else {
        park.cars_in_use = 0;
    }
}

double ev_park_step(EvPark& park, double balance_mw, double dt_h)
{
    double exchange = ev_park_offer(park, balance_mw, dt_h);
    ev_park_commit(park, exchange, dt_h);
    return exchange;
}

} // namespace v2grel
