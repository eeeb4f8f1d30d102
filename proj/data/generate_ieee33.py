"""Writes ieee33.json: the 33-bus feeder with the reconstructed
customer, profile and reliability data used by the simulator."""
import json
import sys

LINES = [
    (1, 2, .0922, .0470), (2, 3, .4930, .2511), (3, 4, .3660, .1864), (4, 5, .3811, .1941),
    (5, 6, .8190, .7070), (6, 7, .1872, .6188), (7, 8, .7114, .2351), (8, 9, 1.030, .740),
    (9, 10, 1.044, .740), (10, 11, .1966, .0650), (11, 12, .3744, .1238), (12, 13, 1.468, 1.155),
    (13, 14, .5416, .7129), (14, 15, .5910, .5260), (15, 16, .7463, .5450), (16, 17, 1.289, 1.721),
    (17, 18, .7320, .5740), (2, 19, .1640, .1565), (19, 20, 1.5042, 1.3554), (20, 21, .4095, .4784),
    (21, 22, .7089, .9373), (3, 23, .4512, .3083), (23, 24, .8980, .7091), (24, 25, .8960, .7011),
    (6, 26, .2030, .1034), (26, 27, .2842, .1447), (27, 28, 1.059, .9337), (28, 29, .8042, .7006),
    (29, 30, .5075, .2585), (30, 31, .9744, .9630), (31, 32, .3105, .3619), (32, 33, .3410, .5302),
]
LOADS = [
    (100, 60), (90, 40), (120, 80), (60, 30), (60, 20), (200, 100), (200, 100), (60, 20),
    (60, 20), (45, 30), (60, 35), (60, 35), (120, 80), (60, 10), (60, 20), (60, 20),
    (90, 40), (90, 40), (90, 40), (90, 40), (90, 40), (90, 50), (420, 200), (420, 200),
    (60, 25), (60, 25), (60, 20), (120, 70), (200, 600), (150, 70), (210, 100), (60, 40),
]

COMMERCIAL = {7: 4, 8: 4, 14: 3, 32: 4}
OFFICE = {29: 2, 31: 3}
INDUSTRY = {24: 1, 25: 1, 30: 1}
KW_PER_HOUSEHOLD = 2.659
FAILURE_RATE = 0.026
KM_PER_OHM = float(sys.argv[1]) if len(sys.argv) > 1 else 4.1

PROFILES = {
    "household": (
        [0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.62, 0.80, 0.78, 0.68, 0.62, 0.60,
         0.60, 0.58, 0.58, 0.63, 0.75, 0.90, 1.00, 0.97, 0.90, 0.80, 0.68, 0.55],
        [1.00, 0.97, 0.88, 0.75, 0.62, 0.55, 0.52, 0.55, 0.63, 0.75, 0.88, 0.97]),
    "commercial": (
        [0.30, 0.28, 0.28, 0.28, 0.30, 0.35, 0.50, 0.75, 0.90, 0.97, 1.00, 1.00,
         0.98, 0.97, 0.95, 0.93, 0.90, 0.85, 0.70, 0.55, 0.45, 0.40, 0.35, 0.32],
        [1.00, 0.98, 0.92, 0.85, 0.78, 0.75, 0.70, 0.72, 0.80, 0.87, 0.94, 0.99]),
    "office": (
        [0.25, 0.25, 0.25, 0.25, 0.27, 0.32, 0.50, 0.80, 0.95, 1.00, 1.00, 0.98,
         0.92, 0.97, 0.97, 0.93, 0.80, 0.55, 0.38, 0.32, 0.30, 0.28, 0.27, 0.26],
        [1.00, 0.98, 0.93, 0.86, 0.78, 0.72, 0.62, 0.68, 0.82, 0.90, 0.96, 1.00]),
    "industry": (
        [0.70, 0.68, 0.68, 0.68, 0.70, 0.75, 0.88, 0.97, 1.00, 1.00, 1.00, 0.98,
         0.95, 0.98, 1.00, 0.98, 0.95, 0.90, 0.85, 0.80, 0.78, 0.75, 0.73, 0.72],
        [1.00, 0.99, 0.97, 0.95, 0.92, 0.90, 0.85, 0.88, 0.93, 0.96, 0.98, 1.00]),
}
COSTS = {"household": 10.0, "industry": 70.0, "office": 100.0, "commercial": 120.0}
CHARGING = [0.30, 0.27, 0.22, 0.17, 0.12, 0.08, 0.06, 0.05, 0.04, 0.04, 0.04, 0.04,
            0.05, 0.05, 0.06, 0.08, 0.13, 0.20, 0.27, 0.32, 0.35, 0.36, 0.35, 0.33]


def bus_class(b):
    if b in COMMERCIAL:
        return "commercial"
    if b in OFFICE:
        return "office"
    if b in INDUSTRY:
        return "industry"
    return "household"


def apportion_households():
    """Largest-remainder split of round(total kW / kW per household)."""
    kw = {i + 2: p for i, (p, _) in enumerate(LOADS) if bus_class(i + 2) == "household"}
    total = round(sum(kw.values()) / KW_PER_HOUSEHOLD)
    share = {b: total * p / sum(kw.values()) for b, p in kw.items()}
    out = {b: int(v) for b, v in share.items()}
    rest = sorted(kw, key=lambda b: (-(share[b] - out[b]), b))
    for b in rest[:total - sum(out.values())]:
        out[b] += 1
    return out


def build():
    households_at = apportion_households()
    buses = [{"id": 1, "name": "B1", "class": "household", "p_mw": 0.0, "q_mvar": 0.0,
              "customers": 0, "households": 0, "coordinates": [0, 0]}]
    for i, (p, q) in enumerate(LOADS):
        b = i + 2
        cls = bus_class(b)
        households = households_at.get(b, 0)
        customers = households if cls == "household" else {**COMMERCIAL, **OFFICE, **INDUSTRY}[b]
        buses.append({"id": b, "name": f"B{b}", "class": cls, "p_mw": p / 1000, "q_mvar": q / 1000,
                      "customers": customers, "households": households})
    # Plot positions following the usual one-line drawing of the feeder.
    rows = {**{b: (b - 1, 0) for b in range(1, 19)}, **{b: (b - 18, -1) for b in range(19, 23)},
            **{b: (b - 21, 1) for b in range(23, 26)}, **{b: (b - 21, -2) for b in range(26, 34)}}
    for bus in buses:
        bus["coordinates"] = list(rows[bus["id"]])

    lines, gear = [], []
    for k, (f, t, r, x) in enumerate(LINES, start=1):
        lines.append({"id": f"L{k}", "from": f, "to": t,
                      "length_km": round(r * KM_PER_OHM, 4), "r_ohm": r, "x_ohm": x,
                      "capacity_mw": 6.0, "failure_rate": FAILURE_RATE,
                      "repair_model": "default"})
        gear.append({"id": f"D{k}", "kind": "disconnector", "line": f"L{k}", "end": "from"})
    gear.append({"id": "CB1", "kind": "circuit_breaker", "line": "L1", "end": "from"})

    parks = [{"bus": b["id"]} for b in buses if b["class"] == "household" and b["households"] > 0]
    return {
        "schema_version": 1,
        "name": "ieee33",
        "notes": ("Line and load data of the 33-bus feeder. Customer classes, household counts "
                  f"({KW_PER_HOUSEHOLD} kW peak per household), line lengths ({KM_PER_OHM} km per "
                  "ohm), load profiles and the EV charging profile are reconstructions, not "
                  "measured data. The charging profile is synthetic and user-replaceable."),
        "base": {"s_mva": 10.0, "v_kv": 12.66},
        "systems": [{"id": "D1", "kind": "distribution"}],
        "load_profiles": [{"id": k, "hourly": v[0], "monthly": v[1]} for k, v in PROFILES.items()],
        "customer_classes": [{"id": k, "profile": k, "shed_cost": c} for k, c in COSTS.items()],
        "repair_models": [{"id": "default", "distribution": "truncated_normal",
                           "loc": 1.0, "scale": 0.5, "lower": 0.0, "upper": 2.0}],
        "buses": buses,
        "lines": lines,
        "switchgear": gear,
        "generators": [{"id": "G1", "bus": 1, "p_min_mw": -10.0, "p_max_mw": 10.0, "slack": True}],
        "batteries": [
            {"id": "B18", "bus": 18, "capacity_mwh": 0.5, "inverter_mw": 0.25,
             "efficiency": 0.95, "soc_min": 0.1},
            {"id": "B33", "bus": 33, "capacity_mwh": 0.5, "inverter_mw": 0.25,
             "efficiency": 0.95, "soc_min": 0.1},
        ],
        "ev_park_defaults": {"battery_kwh": 70.0, "charge_kw": 3.6, "soc_min": 0.1,
                             "soc_max": 1.0, "v2g": False},
        "ev_parks": parks,
        "ev_availability": {"ev_share": 0.46, "daily_charge_frequency": 0.61,
                            "charging_profile": CHARGING,
                            "charging_profile_note": "synthetic, user-replaceable"},
    }


def expected_saifi(doc):
    children = {}
    for l in doc["lines"]:
        children.setdefault(l["from"], []).append((l["to"], l))
    cust = {b["id"]: b["customers"] for b in doc["buses"]}

    def below(b):
        return cust[b] + sum(below(c) for c, _ in children.get(b, []))
    total = sum(cust.values())
    return sum(l["failure_rate"] * l["length_km"] * below(l["to"]) for l in doc["lines"]) / total


if __name__ == "__main__":
    doc = build()
    hh = sum(b["households"] for b in doc["buses"])
    evs = sum(round(b["households"] * 0.46) for b in doc["buses"])
    km = sum(l["length_km"] for l in doc["lines"])
    print(f"households {hh} evs {evs} km {km:.2f} saifi {expected_saifi(doc):.4f}", file=sys.stderr)
    with open(__file__.replace("generate_ieee33.py", "ieee33.json"), "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
