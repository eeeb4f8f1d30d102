#include "v2grel/experiments.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef V2GREL_VERSION
#define V2GREL_VERSION "dev"
#endif

namespace v2grel {

std::string library_version()
{
    return V2GREL_VERSION;
}

std::vector<CaseSpec> standard_cases()
{
    return {
        {"Case 1", false, false, {}, {}, {}, {}},
        {"Case 2", true, false, {}, {}, {}, {}},
        {"Case 3", false, true, {}, {}, {}, {}},
        {"Case 4", true, true, {}, {}, {}, {}},
    };
}

Dataset apply_case(const Dataset& base, const CaseSpec& spec)
{
    Dataset d = base;
    PowerNetwork& net = d.network;
    if (!spec.batteries) {
        net.batteries.clear();
    } else if (net.batteries.empty()) {
        throw ConfigError(spec.name + " needs batteries but the network defines none");
    }
    if (spec.ev_share) {
        d.ev_availability.ev_share = *spec.ev_share;
    }
    for (EvPark& p : net.ev_parks) {
        p.v2g = spec.v2g;
        p.ev_share = d.ev_availability.ev_share;
        if (spec.charge_kw) {
            p.charge_kw = *spec.charge_kw;
        }
    }
    for (auto& [id, r] : d.repair_models) {
        if (spec.repair_loc) {
            r.loc = *spec.repair_loc;
        }
        if (spec.repair_scale) {
            r.scale = *spec.repair_scale;
        }
    }
    try {
        d.ev_availability.validate();
        for (const EvPark& p : net.ev_parks) {
            p.validate();
        }
        for (const auto& [id, r] : d.repair_models) {
            (void)r.distribution();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(spec.name + ": " + e.what());
    }
    return d;
}

std::vector<CaseSpec> FactorialDesign::cells() const
{
    std::vector<CaseSpec> out;
    for (double c : charge_kw) {
        for (double s : ev_share) {
            for (double r : repair_loc) {
                CaseSpec spec = base;
                spec.charge_kw = c;
                spec.ev_share = s;
                spec.repair_loc = r;
                spec.repair_scale = repair_scale;
                char name[96];
                std::snprintf(name, sizeof name, "charge=%g share=%g loc=%g", c, s, r);
                spec.name = name;
                out.push_back(spec);
            }
        }
    }
    return out;
}

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v)
{
    return v ? num(*v) : "";
}

} // namespace

CaseResult run_case(const Dataset& base, const SimulationConfig& config, const CaseSpec& spec)
{
    CaseResult result;
    result.spec = spec;
    std::uint64_t hash = stream_key("");
    RunningStats ens;
    try {
        Dataset data = apply_case(base, spec);
        run_monte_carlo(data, config, [&](IterationHistory&& h) {
            result.reports.push_back(compute_report(h, data.network));
            ens.add(result.reports.back().ens_mwh);
            result.ens_running_mean.push_back(ens.mean());
            result.ens_running_variance.push_back(ens.variance());
            std::string events = std::to_string(h.index) + ":";
            for (const auto& e : h.events) {
                events += e.line + "@" + num(e.start_h) + "+" + num(e.repair_h) + ";";
            }
            for (char c : events) {
                hash ^= static_cast<unsigned char>(c);
                hash *= 0x100000001b3ULL;
            }
            for (auto& t : h.trace) {
                result.trace.emplace_back(h.index, std::move(t));
            }
        });
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    result.event_hash = buf;
    if (!result.reports.empty()) {
        result.summary = aggregate(result.reports);
    }
    return result;
}

std::string describe_config(const SimulationConfig& config, const std::vector<CaseSpec>& cases,
    const std::optional<FactorialDesign>& design)
{
    nlohmann::ordered_json j;
    j["increment_min"] = config.increment_min;
    j["horizon_h"] = config.horizon_h;
    j["iterations"] = config.iterations;
    j["seed"] = config.seed;
    j["flow_tolerance"] = config.flow.tolerance;
    j["flow_max_iterations"] = config.flow.max_iterations;
    auto spec_json = [](const CaseSpec& c) {
        nlohmann::ordered_json s;
        s["name"] = c.name;
        s["v2g"] = c.v2g;
        s["batteries"] = c.batteries;
        if (c.charge_kw) {
            s["charge_kw"] = *c.charge_kw;
        }
        if (c.ev_share) {
            s["ev_share"] = *c.ev_share;
        }
        if (c.repair_loc) {
            s["repair_loc"] = *c.repair_loc;
        }
        if (c.repair_scale) {
            s["repair_scale"] = *c.repair_scale;
        }
        return s;
    };
    j["cases"] = nlohmann::ordered_json::array();
    for (const auto& c : cases) {
        j["cases"].push_back(spec_json(c));
    }
    if (design) {
        j["factorial"]["charge_kw"] = design->charge_kw;
        j["factorial"]["ev_share"] = design->ev_share;
        j["factorial"]["repair_loc"] = design->repair_loc;
        j["factorial"]["repair_scale"] = design->repair_scale;
        j["factorial"]["base"] = spec_json(design->base);
    }
    return j.dump();
}

ResultBundle run_cases(const Dataset& base, const SimulationConfig& config, const std::vector<CaseSpec>& cases)
{
    ResultBundle bundle;
    bundle.config = config;
    bundle.dataset_hash = content_hash(base.source);
    bundle.config_hash = content_hash(describe_config(config, cases, std::nullopt));
    for (const auto& spec : cases) {
        bundle.cases.push_back(run_case(base, config, spec));
        if (!bundle.cases.back().ok()) {
            break;
        }
    }
    return bundle;
}

ResultBundle run_factorial(const Dataset& base, const SimulationConfig& config, const FactorialDesign& design)
{
    ResultBundle bundle;
    bundle.kind = "factorial";
    bundle.config = config;
    bundle.design = design;
    bundle.dataset_hash = content_hash(base.source);
    bundle.config_hash = content_hash(describe_config(config, {}, design));
    for (const auto& spec : design.cells()) {
        bundle.cases.push_back(run_case(base, config, spec));
    }
    return bundle;
}

namespace {

namespace fs = std::filesystem;

class Staged
{
public:
    explicit Staged(fs::path dir)
        : dir_(std::move(dir))
    {
    }

    ~Staged()
    {
        for (const auto& [tmp, final] : files_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }

    std::ofstream& open(const std::string& name)
    {
        fs::path final = dir_ / name;
        fs::path tmp = dir_ / (name + ".partial");
        files_.emplace_back(tmp, final);
        streams_.emplace_back(std::make_unique<std::ofstream>(tmp, std::ios::binary | std::ios::trunc));
        if (!*streams_.back()) {
            throw OutputError("cannot write " + tmp.string());
        }
        return *streams_.back();
    }

    std::vector<fs::path> commit()
    {
        for (auto& s : streams_) {
            s->flush();
            if (!*s) {
                throw OutputError("write failed in " + dir_.string());
            }
            s->close();
        }
        std::vector<fs::path> out;
        for (const auto& [tmp, final] : files_) {
            fs::rename(tmp, final);
            out.push_back(final);
        }
        files_.clear();
        return out;
    }

private:
    fs::path dir_;
    std::vector<std::pair<fs::path, fs::path>> files_;
    std::vector<std::unique_ptr<std::ofstream>> streams_;
};

void write_summary_csv(std::ostream& out, const ResultBundle& b)
{
    out << "index,unit";
    for (const auto& c : b.cases) {
        out << ',' << c.spec.name;
    }
    out << '\n';
    for (std::size_t k = 0; k < reported_indices.size(); ++k) {
        out << reported_indices[k].name << ',' << reported_indices[k].unit;
        for (const auto& c : b.cases) {
            out << ',' << (c.summary ? num(c.summary->indices[k].mean) : "");
        }
        out << '\n';
    }
}

nlohmann::ordered_json summary_json(const Summary& s)
{
    nlohmann::ordered_json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["min"] = s.min;
    j["q1"] = s.q1;
    j["median"] = s.median;
    j["q3"] = s.q3;
    j["max"] = s.max;
    return j;
}

void write_summary_json(std::ostream& out, const ResultBundle& b)
{
    nlohmann::ordered_json j;
    j["kind"] = b.kind;
    j["cases"] = nlohmann::ordered_json::array();
    for (const auto& c : b.cases) {
        nlohmann::ordered_json cj;
        cj["name"] = c.spec.name;
        cj["iterations"] = c.reports.size();
        cj["event_hash"] = c.event_hash;
        if (!c.ok()) {
            cj["error"] = c.error;
        }
        if (c.summary) {
            for (std::size_t k = 0; k < reported_indices.size(); ++k) {
                cj["indices"][std::string(reported_indices[k].name)] = summary_json(c.summary->indices[k]);
            }
            cj["lambda_s"] = summary_json(c.summary->lambda_s);
            cj["U_s"] = summary_json(c.summary->u_s);
            double lam = c.summary->lambda_s.mean;
            if (lam > 0.0) {
                cj["r_s_of_means"] = c.summary->u_s.mean / lam;
            }
        }
        j["cases"].push_back(cj);
    }
    out << j.dump(2) << '\n';
}

void write_iterations(std::ostream& out, const ResultBundle& b)
{
    out << "case,iteration";
    for (const auto& f : reported_indices) {
        out << ',' << f.name << " [" << f.unit << ']';
    }
    out << ",lambda_s [1/yr],U_s [h/yr],r_s [h]\n";
    for (const auto& c : b.cases) {
        for (std::size_t i = 0; i < c.reports.size(); ++i) {
            const IndexReport& r = c.reports[i];
            out << c.spec.name << ',' << i;
            for (const auto& f : reported_indices) {
                out << ',' << num(r.*f.member);
            }
            out << ',' << num(r.lambda_s) << ',' << num(r.u_s) << ',' << opt_num(r.r_s) << '\n';
        }
    }
}

void write_boxplot(std::ostream& out, const ResultBundle& b)
{
    out << "case,index,unit,count,min,q1,median,q3,max,mean,variance\n";
    for (const auto& c : b.cases) {
        if (!c.summary) {
            continue;
        }
        for (std::size_t k = 0; k < reported_indices.size(); ++k) {
            const Summary& s = c.summary->indices[k];
            out << c.spec.name << ',' << reported_indices[k].name << ',' << reported_indices[k].unit
                << ',' << s.count << ',' << num(s.min) << ',' << num(s.q1) << ',' << num(s.median)
                << ',' << num(s.q3) << ',' << num(s.max) << ',' << num(s.mean) << ','
                << num(s.variance) << '\n';
        }
    }
}

void write_convergence(std::ostream& out, const ResultBundle& b)
{
    out << "case,iteration,ENS cumulative mean [MWh],ENS running variance [MWh^2]\n";
    for (const auto& c : b.cases) {
        for (std::size_t i = 0; i < c.ens_running_mean.size(); ++i) {
            out << c.spec.name << ',' << i + 1 << ',' << num(c.ens_running_mean[i]) << ','
                << num(c.ens_running_variance[i]) << '\n';
        }
    }
}

void write_factorial(std::ostream& out, const ResultBundle& b)
{
    out << "charge_kw [kW],ev_share [-],repair_loc [h],repair_scale [h]";
    for (const auto& f : reported_indices) {
        out << ',' << f.name << " mean [" << f.unit << ']';
    }
    out << ",status\n";
    for (const auto& c : b.cases) {
        out << opt_num(c.spec.charge_kw) << ',' << opt_num(c.spec.ev_share) << ','
            << opt_num(c.spec.repair_loc) << ',' << opt_num(c.spec.repair_scale);
        for (std::size_t k = 0; k < reported_indices.size(); ++k) {
            out << ',' << (c.summary ? num(c.summary->indices[k].mean) : "");
        }
        out << ',' << (c.ok() ? "ok" : "failed") << '\n';
    }
}

void write_trace(std::ostream& out, const ResultBundle& b)
{
    out << "case,iteration,time [h],sub_system,root,has_slack,converged,bus,shed [MW],battery [MW],ev [MW]\n";
    for (const auto& c : b.cases) {
        for (const auto& [iteration, t] : c.trace) {
            for (std::size_t i = 0; i < t.buses.size(); ++i) {
                double bat = 0.0, ev = 0.0;
                for (const auto& [bus, mw] : t.battery_mw) {
                    if (bus == t.buses[i]) {
                        bat = mw;
                    }
                }
                for (const auto& [bus, mw] : t.ev_mw) {
                    if (bus == t.buses[i]) {
                        ev = mw;
                    }
                }
                out << c.spec.name << ',' << iteration << ',' << num(t.time_h) << ',' << t.sub_system
                    << ',' << t.root << ',' << t.has_slack << ',' << t.converged << ',' << t.buses[i]
                    << ',' << num(t.shed_mw[i]) << ',' << num(bat) << ',' << num(ev) << '\n';
            }
        }
    }
}

} // namespace

std::vector<fs::path> emit_results(
    const ResultBundle& bundle, const fs::path& out_dir, const std::set<std::string>& formats, bool force)
{
    for (const auto& f : formats) {
        if (!all_formats.count(f)) {
            throw ConfigError("unknown output format '" + f + "'");
        }
    }
    std::vector<std::string> names;
    if (formats.count("summary")) {
        names.push_back("summary.csv");
    }
    if (formats.count("json")) {
        names.push_back("summary.json");
    }
    if (formats.count("iterations")) {
        names.push_back("iterations.csv");
    }
    if (formats.count("boxplot")) {
        names.push_back("boxplot.csv");
    }
    if (formats.count("convergence")) {
        names.push_back("convergence.csv");
    }
    if (formats.count("factorial") && bundle.kind == "factorial") {
        names.push_back("factorial.csv");
    }
    bool has_trace = false;
    for (const auto& c : bundle.cases) {
        has_trace = has_trace || !c.trace.empty();
    }
    if (formats.count("trace") && has_trace) {
        names.push_back("trace.csv");
    }
    names.push_back("manifest.json");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    if (!force) {
        for (const auto& n : names) {
            if (fs::exists(out_dir / n)) {
                throw OutputError((out_dir / n).string() + " exists; pass --force to overwrite");
            }
        }
    }

    Staged staged(out_dir);
    for (const auto& n : names) {
        std::ofstream& out = staged.open(n);
        if (n == "summary.csv") {
            write_summary_csv(out, bundle);
        } else if (n == "summary.json") {
            write_summary_json(out, bundle);
        } else if (n == "iterations.csv") {
            write_iterations(out, bundle);
        } else if (n == "boxplot.csv") {
            write_boxplot(out, bundle);
        } else if (n == "convergence.csv") {
            write_convergence(out, bundle);
        } else if (n == "factorial.csv") {
            write_factorial(out, bundle);
        } else if (n == "trace.csv") {
            write_trace(out, bundle);
        } else if (n == "manifest.json") {
            nlohmann::ordered_json m;
            m["version"] = library_version();
            m["kind"] = bundle.kind;
            m["seed"] = bundle.config.seed;
            m["iterations"] = bundle.config.iterations;
            m["increment_min"] = bundle.config.increment_min;
            m["config_hash"] = bundle.config_hash;
            m["dataset_hash"] = bundle.dataset_hash;
            m["cases"] = nlohmann::ordered_json::array();
            for (const auto& c : bundle.cases) {
                m["cases"].push_back(c.spec.name);
            }
            m["files"] = names;
            out << m.dump(2) << '\n';
        }
    }
    return staged.commit();
}

} // namespace v2grel
