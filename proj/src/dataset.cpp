#include "v2grel/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace v2grel {

namespace {
constexpr int month_days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
}

int month_of(double hour_of_year)
{
    double day = std::fmod(hour_of_year, hours_per_year) / 24.0;
    if (day < 0.0) {
        day += 365.0;
    }
    int start = 0;
    for (int m = 0; m < 12; ++m) {
        start += month_days[m];
        if (day < start) {
            return m;
        }
    }
    return 11;
}

double LoadProfile::factor(double hour_of_year) const
{
    double h = std::fmod(hour_of_year, 24.0);
    if (h < 0.0) {
        h += 24.0;
    }
    auto i = static_cast<std::size_t>(h);
    i = std::min<std::size_t>(i, 23);
    double w = h - static_cast<double>(i);
    double shape = hourly[i] * (1.0 - w) + hourly[(i + 1) % 24] * w;
    return shape * monthly[static_cast<std::size_t>(month_of(hour_of_year))];
}

const RepairSpec& Dataset::repair_model(const std::string& id) const
{
    auto it = repair_models.find(id);
    if (it == repair_models.end()) {
        throw DatasetError("repair_models", "unknown repair model '" + id + "'");
    }
    return it->second;
}

std::string content_hash(const std::string& bytes)
{
    std::uint64_t h = stream_key(bytes);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using json = nlohmann::json;

struct Reader
{
    static const json& field(const json& obj, const std::string& key, const std::string& path)
    {
        if (!obj.is_object()) {
            throw DatasetError(path, "expected an object");
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            throw DatasetError(path + "." + key, "missing");
        }
        return *it;
    }

    template <typename T>
    static T get(const json& obj, const std::string& key, const std::string& path)
    {
        const json& v = field(obj, key, path);
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            throw DatasetError(path + "." + key, std::string("wrong type (") + e.what() + ")");
        }
    }

    template <typename T>
    static T get_or(const json& obj, const std::string& key, const std::string& path, T fallback)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            return fallback;
        }
        return get<T>(obj, key, path);
    }

    static const json& array(const json& obj, const std::string& key, const std::string& path)
    {
        const json& v = field(obj, key, path);
        if (!v.is_array()) {
            throw DatasetError(path + "." + key, "expected an array");
        }
        return v;
    }

    template <std::size_t N>
    static std::array<double, N> fixed(const json& obj, const std::string& key, const std::string& path)
    {
        auto values = get<std::vector<double>>(obj, key, path);
        if (values.size() != N) {
            throw DatasetError(path + "." + key,
                "expected " + std::to_string(N) + " values, got " + std::to_string(values.size()));
        }
        std::array<double, N> out{};
        std::copy(values.begin(), values.end(), out.begin());
        return out;
    }
};

std::string at(const std::string& section, std::size_t i)
{
    return section + "[" + std::to_string(i) + "]";
}

void require(bool ok, const std::string& where, const std::string& what)
{
    if (!ok) {
        throw DatasetError(where, what);
    }
}

} // namespace

Dataset parse_dataset(const std::string& text, const std::string& origin)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DatasetError(origin, std::string("not valid JSON: ") + e.what());
    }
    using R = Reader;
    const std::string top = "$";

    Dataset ds;
    ds.source = text;
    ds.origin = origin;
    PowerNetwork& net = ds.network;

    int version = R::get<int>(root, "schema_version", top);
    require(version == dataset_schema_version, "$.schema_version",
        "unsupported version " + std::to_string(version));
    net.name = R::get_or<std::string>(root, "name", top, "network");

    if (root.contains("base")) {
        ds.base.s_mva = R::get<double>(root["base"], "s_mva", "$.base");
        ds.base.v_kv = R::get<double>(root["base"], "v_kv", "$.base");
        require(ds.base.s_mva > 0.0 && ds.base.v_kv > 0.0, "$.base", "bases must be positive");
    }

    if (root.contains("systems")) {
        const json& systems = R::array(root, "systems", top);
        for (std::size_t i = 0; i < systems.size(); ++i) {
            NetworkSystem s;
            s.id = R::get<std::string>(systems[i], "id", at("$.systems", i));
            auto kind = R::get_or<std::string>(systems[i], "kind", at("$.systems", i), "distribution");
            require(kind == "distribution" || kind == "microgrid", at("$.systems", i) + ".kind",
                "expected distribution or microgrid");
            s.kind = kind == "microgrid" ? NetworkSystem::Kind::microgrid
                                         : NetworkSystem::Kind::distribution;
            net.systems.push_back(s);
        }
    } else {
        net.systems.push_back({"D1", NetworkSystem::Kind::distribution});
    }

    std::map<std::string, std::size_t> profile_index;
    const json& profiles = R::array(root, "load_profiles", top);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        std::string path = at("$.load_profiles", i);
        LoadProfile p;
        p.id = R::get<std::string>(profiles[i], "id", path);
        p.hourly = R::fixed<24>(profiles[i], "hourly", path);
        p.monthly = R::fixed<12>(profiles[i], "monthly", path);
        for (double v : p.hourly) {
            require(v >= 0.0, path + ".hourly", "negative factor");
        }
        for (double v : p.monthly) {
            require(v >= 0.0, path + ".monthly", "negative factor");
        }
        require(profile_index.emplace(p.id, ds.profiles.size()).second, path + ".id", "duplicate");
        ds.profiles.push_back(p);
    }

    struct CustomerClass
    {
        std::size_t profile;
        double shed_cost;
    };
    std::map<std::string, CustomerClass> classes;
    const json& class_list = R::array(root, "customer_classes", top);
    for (std::size_t i = 0; i < class_list.size(); ++i) {
        std::string path = at("$.customer_classes", i);
        auto id = R::get<std::string>(class_list[i], "id", path);
        auto profile = R::get<std::string>(class_list[i], "profile", path);
        auto it = profile_index.find(profile);
        require(it != profile_index.end(), path + ".profile", "unknown profile '" + profile + "'");
        double cost = R::get<double>(class_list[i], "shed_cost", path);
        require(cost > 0.0, path + ".shed_cost", "must be positive");
        require(classes.emplace(id, CustomerClass{it->second, cost}).second, path + ".id", "duplicate");
    }

    const json& repairs = R::array(root, "repair_models", top);
    for (std::size_t i = 0; i < repairs.size(); ++i) {
        std::string path = at("$.repair_models", i);
        RepairSpec r;
        r.id = R::get<std::string>(repairs[i], "id", path);
        auto dist = R::get_or<std::string>(repairs[i], "distribution", path, "truncated_normal");
        require(dist == "truncated_normal", path + ".distribution", "only truncated_normal is supported");
        r.loc = R::get<double>(repairs[i], "loc", path);
        r.scale = R::get<double>(repairs[i], "scale", path);
        r.lower = R::get_or<double>(repairs[i], "lower", path, 0.0);
        r.upper = R::get_or<double>(repairs[i], "upper", path, 2.0);
        try {
            (void)r.distribution();
        } catch (const std::invalid_argument& e) {
            throw DatasetError(path, e.what());
        }
        require(ds.repair_models.emplace(r.id, r).second, path + ".id", "duplicate");
    }

    std::set<std::string> system_ids;
    for (const auto& s : net.systems) {
        system_ids.insert(s.id);
    }
    const json& buses = R::array(root, "buses", top);
    for (std::size_t i = 0; i < buses.size(); ++i) {
        std::string path = at("$.buses", i);
        const json& jb = buses[i];
        Bus b;
        b.id = R::get<int>(jb, "id", path);
        b.name = R::get_or<std::string>(jb, "name", path, "B" + std::to_string(b.id));
        b.system = R::get_or<std::string>(jb, "system", path, net.systems.front().id);
        require(system_ids.count(b.system) > 0, path + ".system", "unknown system '" + b.system + "'");
        b.peak_p_mw = R::get_or<double>(jb, "p_mw", path, 0.0);
        b.peak_q_mvar = R::get_or<double>(jb, "q_mvar", path, 0.0);
        require(b.peak_p_mw >= 0.0, path + ".p_mw", "must be nonnegative");
        b.customer_class = R::get<std::string>(jb, "class", path);
        auto cls = classes.find(b.customer_class);
        require(cls != classes.end(), path + ".class", "unknown class '" + b.customer_class + "'");
        b.load_profile = cls->second.profile;
        b.shed_cost = R::get_or<double>(jb, "shed_cost", path, cls->second.shed_cost);
        require(b.shed_cost > 0.0, path + ".shed_cost", "must be positive");
        b.customers = R::get_or<int>(jb, "customers", path, 0);
        require(b.customers >= 0, path + ".customers", "must be nonnegative");
        b.households = R::get_or<int>(jb, "households", path, 0);
        require(b.households >= 0, path + ".households", "must be nonnegative");
        if (jb.contains("coordinates")) {
            auto xy = R::get<std::vector<double>>(jb, "coordinates", path);
            require(xy.size() == 2, path + ".coordinates", "expected [x, y]");
            b.coordinates = Coordinates{xy[0], xy[1]};
        }
        for (const Bus& other : net.buses) {
            require(other.id != b.id, path + ".id", "duplicate bus id " + std::to_string(b.id));
        }
        net.buses.push_back(b);
    }
    require(!net.buses.empty(), "$.buses", "no buses");

    auto bus_ref = [&](const json& obj, const std::string& path) {
        int id = R::get<int>(obj, "bus", path);
        try {
            return net.bus_index(id);
        } catch (const std::out_of_range&) {
            throw DatasetError(path + ".bus", "unknown bus " + std::to_string(id));
        }
    };

    const json& lines = R::array(root, "lines", top);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string path = at("$.lines", i);
        const json& jl = lines[i];
        Line l;
        l.id = R::get<std::string>(jl, "id", path);
        int from = R::get<int>(jl, "from", path);
        int to = R::get<int>(jl, "to", path);
        try {
            l.from = net.bus_index(from);
            l.to = net.bus_index(to);
        } catch (const std::out_of_range& e) {
            throw DatasetError(path, e.what());
        }
        l.length_km = R::get<double>(jl, "length_km", path);
        l.r_ohm = R::get<double>(jl, "r_ohm", path);
        l.x_ohm = R::get<double>(jl, "x_ohm", path);
        l.capacity_mw = R::get<double>(jl, "capacity_mw", path);
        l.failure_rate = R::get<double>(jl, "failure_rate", path);
        l.repair_model = R::get<std::string>(jl, "repair_model", path);
        l.normally_open = R::get_or<bool>(jl, "normally_open", path, false);
        require(l.length_km > 0.0, path + ".length_km", "must be positive");
        require(l.capacity_mw > 0.0, path + ".capacity_mw", "must be positive");
        require(l.failure_rate >= 0.0, path + ".failure_rate", "must be nonnegative");
        require(l.r_ohm >= 0.0, path + ".r_ohm", "must be nonnegative");
        require(ds.repair_models.count(l.repair_model) > 0, path + ".repair_model",
            "unknown repair model '" + l.repair_model + "'");
        for (const Line& other : net.lines) {
            require(other.id != l.id, path + ".id", "duplicate line id " + l.id);
        }
        net.lines.push_back(l);
    }

    if (root.contains("switchgear")) {
        const json& gear = R::array(root, "switchgear", top);
        for (std::size_t i = 0; i < gear.size(); ++i) {
            std::string path = at("$.switchgear", i);
            Switchgear s;
            s.id = R::get<std::string>(gear[i], "id", path);
            auto kind = R::get<std::string>(gear[i], "kind", path);
            require(kind == "disconnector" || kind == "circuit_breaker", path + ".kind",
                "expected disconnector or circuit_breaker");
            s.kind = kind == "disconnector" ? SwitchKind::disconnector : SwitchKind::circuit_breaker;
            auto line = R::get<std::string>(gear[i], "line", path);
            try {
                s.line = net.line_index(line);
            } catch (const std::out_of_range& e) {
                throw DatasetError(path + ".line", e.what());
            }
            auto end = R::get_or<std::string>(gear[i], "end", path, "from");
            require(end == "from" || end == "to", path + ".end", "expected from or to");
            s.end = end == "from" ? LineEnd::from : LineEnd::to;
            for (const Switchgear& other : net.switchgear) {
                require(other.id != s.id, path + ".id", "duplicate switchgear id " + s.id);
                require(!(other.line == s.line && other.end == s.end && other.kind == s.kind),
                    path, "two devices of one kind on the same line end");
            }
            net.switchgear.push_back(s);
        }
    }

    const json& gens = R::array(root, "generators", top);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        std::string path = at("$.generators", i);
        Generator g;
        g.id = R::get<std::string>(gens[i], "id", path);
        g.bus = bus_ref(gens[i], path);
        g.p_min_mw = R::get_or<double>(gens[i], "p_min_mw", path, 0.0);
        g.p_max_mw = R::get<double>(gens[i], "p_max_mw", path);
        g.slack = R::get_or<bool>(gens[i], "slack", path, false);
        require(g.p_min_mw <= g.p_max_mw, path, "p_min_mw exceeds p_max_mw");
        net.generators.push_back(g);
    }
    for (const auto& s : net.systems) {
        if (s.kind != NetworkSystem::Kind::distribution) {
            continue;
        }
        int slacks = 0;
        std::size_t slack_bus = 0;
        for (const Generator& g : net.generators) {
            if (g.slack && net.buses[g.bus].system == s.id) {
                ++slacks;
                slack_bus = g.bus;
            }
        }
        require(slacks == 1, "$.generators",
            "system " + s.id + " needs exactly one slack, found " + std::to_string(slacks));
        bool breaker = false;
        for (const Switchgear& sw : net.switchgear) {
            const Line& l = net.lines[sw.line];
            if (sw.kind == SwitchKind::circuit_breaker && (l.from == slack_bus || l.to == slack_bus)) {
                breaker = true;
            }
        }
        require(breaker, "$.switchgear", "system " + s.id + " has no circuit breaker at its feeder");
    }

    std::set<std::size_t> battery_buses;
    if (root.contains("batteries")) {
        const json& bats = R::array(root, "batteries", top);
        for (std::size_t i = 0; i < bats.size(); ++i) {
            std::string path = at("$.batteries", i);
            Battery b;
            b.id = R::get<std::string>(bats[i], "id", path);
            b.bus = bus_ref(bats[i], path);
            b.capacity_mwh = R::get<double>(bats[i], "capacity_mwh", path);
            b.inverter_mw = R::get<double>(bats[i], "inverter_mw", path);
            b.efficiency = R::get_or<double>(bats[i], "efficiency", path, 1.0);
            b.soc_min = R::get_or<double>(bats[i], "soc_min", path, 0.0);
            b.stored_mwh = b.capacity_mwh;
            try {
                b.validate();
            } catch (const std::invalid_argument& e) {
                throw DatasetError(path, e.what());
            }
            require(battery_buses.insert(b.bus).second, path + ".bus", "second battery on one bus");
            net.batteries.push_back(b);
        }
    }

    const json defaults = root.value("ev_park_defaults", json::object());
    std::set<std::size_t> park_buses;
    if (root.contains("ev_parks")) {
        const json& parks = R::array(root, "ev_parks", top);
        for (std::size_t i = 0; i < parks.size(); ++i) {
            std::string path = at("$.ev_parks", i);
            const json& jp = parks[i];
            auto pick = [&](const char* key, double fallback) {
                if (jp.contains(key)) {
                    return R::get<double>(jp, key, path);
                }
                return R::get_or<double>(defaults, key, "$.ev_park_defaults", fallback);
            };
            EvPark p;
            p.bus = bus_ref(jp, path);
            p.households = R::get_or<int>(jp, "households", path, net.buses[p.bus].households);
            p.battery_kwh = pick("battery_kwh", 70.0);
            p.charge_kw = pick("charge_kw", 3.6);
            p.soc.soc_min = pick("soc_min", 0.1);
            p.soc.soc_max = pick("soc_max", 1.0);
            p.v2g = jp.contains("v2g") ? R::get<bool>(jp, "v2g", path)
                                       : R::get_or<bool>(defaults, "v2g", "$.ev_park_defaults", false);
            try {
                p.validate();
            } catch (const std::invalid_argument& e) {
                throw DatasetError(path, e.what());
            }
            require(park_buses.insert(p.bus).second, path + ".bus", "second EV park on one bus");
            net.ev_parks.push_back(p);
        }
    }

    if (root.contains("ev_availability")) {
        const json& ja = root["ev_availability"];
        std::string path = "$.ev_availability";
        ds.ev_availability.ev_share = R::get<double>(ja, "ev_share", path);
        ds.ev_availability.daily_charge_frequency = R::get<double>(ja, "daily_charge_frequency", path);
        ds.ev_availability.charging_profile = R::fixed<24>(ja, "charging_profile", path);
        try {
            ds.ev_availability.validate();
        } catch (const std::invalid_argument& e) {
            throw DatasetError(path, e.what());
        }
    } else {
        require(net.ev_parks.empty(), "$.ev_availability", "required when EV parks are present");
    }
    for (EvPark& p : net.ev_parks) {
        p.ev_share = ds.ev_availability.ev_share;
    }

    RadialityReport report = validate_radial(net);
    if (!report.ok) {
        std::string msg;
        for (const auto& m : report.messages) {
            msg += (msg.empty() ? "" : "; ") + m;
        }
        throw DatasetError("$.lines", "network is not radial: " + msg);
    }
    return ds;
}

Dataset load_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError(path, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path);
}

Dataset embedded_dataset()
{
    return parse_dataset(embedded_dataset_text(), "embedded:ieee33");
}

} // namespace v2grel
