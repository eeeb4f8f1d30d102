// relsim: Monte Carlo reliability runs for a radial feeder with EVs and batteries.
//
// Exit codes: 0 success, 1 bad input or configuration, 2 failure while running.

#include "v2grel/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace v2grel;

namespace {

struct Options
{
    std::string config_path;
    std::string network_path;
    std::optional<int> iterations;
    std::optional<std::uint64_t> seed;
    std::optional<double> increment_min;
    std::optional<int> threads;
    std::string out_dir;
    bool trace = false;
    bool force = false;
    std::vector<std::string> formats;
    std::vector<std::string> cases;
};

// Settings file: {"iterations", "seed", "increment_min", "threads", "network",
// "out", "formats", "cases", "factorial": {"charge_kw", "ev_share",
// "repair_loc", "repair_scale"}}. Command-line flags win.
struct FileConfig
{
    nlohmann::json doc = nlohmann::json::object();
};

FileConfig read_config(const std::string& path)
{
    FileConfig c;
    if (path.empty()) {
        return c;
    }
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    try {
        c.doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    if (!c.doc.is_object()) {
        throw ConfigError("config " + path + ": top level must be an object");
    }
    static const std::set<std::string> known
        = {"iterations", "seed", "increment_min", "threads", "network", "out", "formats", "cases", "factorial"};
    for (const auto& [k, v] : c.doc.items()) {
        if (!known.count(k)) {
            throw ConfigError("config " + path + ": unknown key '" + k + "'");
        }
    }
    return c;
}

template <typename T>
std::optional<T> config_value(const FileConfig& c, const char* key)
{
    if (!c.doc.contains(key)) {
        return std::nullopt;
    }
    try {
        return c.doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

struct Setup
{
    Dataset data;
    SimulationConfig sim;
    std::filesystem::path out;
    std::set<std::string> formats;
    std::vector<CaseSpec> cases;
    FactorialDesign design;
};

Setup resolve(const Options& o)
{
    FileConfig file = read_config(o.config_path);
    Setup s;

    std::string network = o.network_path;
    if (network.empty()) {
        network = config_value<std::string>(file, "network").value_or("");
    }
    s.data = network.empty() ? embedded_dataset() : load_dataset(network);

    s.sim.iterations = o.iterations.value_or(config_value<int>(file, "iterations").value_or(s.sim.iterations));
    s.sim.seed = o.seed.value_or(config_value<std::uint64_t>(file, "seed").value_or(s.sim.seed));
    s.sim.increment_min
        = o.increment_min.value_or(config_value<double>(file, "increment_min").value_or(s.sim.increment_min));
    s.sim.threads = o.threads.value_or(config_value<int>(file, "threads").value_or(s.sim.threads));
    if (s.sim.threads == 0) {
        s.sim.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    s.sim.trace = o.trace;
    try {
        s.sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::string out = o.out_dir;
    if (out.empty()) {
        out = config_value<std::string>(file, "out").value_or("");
    }
    if (out.empty()) {
        if (const char* env = std::getenv("RELSIM_OUT_DIR")) {
            out = env;
        }
    }
    s.out = out.empty() ? std::filesystem::path("results") : std::filesystem::path(out);

    std::vector<std::string> formats = o.formats;
    if (formats.empty()) {
        formats = config_value<std::vector<std::string>>(file, "formats").value_or(std::vector<std::string>{});
    }
    if (formats.empty()) {
        s.formats = all_formats;
    } else {
        for (const auto& f : formats) {
            if (!all_formats.count(f)) {
                throw ConfigError("unknown output format '" + f + "'");
            }
            s.formats.insert(f);
        }
    }

    std::vector<std::string> names = o.cases;
    if (names.empty()) {
        names = config_value<std::vector<std::string>>(file, "cases").value_or(std::vector<std::string>{});
    }
    auto all = standard_cases();
    if (names.empty()) {
        s.cases = all;
    } else {
        for (const auto& n : names) {
            auto it = std::find_if(all.begin(), all.end(), [&](const CaseSpec& c) {
                return c.name == n || c.name == "Case " + n;
            });
            if (it == all.end()) {
                throw ConfigError("unknown case '" + n + "'");
            }
            s.cases.push_back(*it);
        }
    }

    if (file.doc.contains("factorial")) {
        const auto& f = file.doc["factorial"];
        try {
            if (f.contains("charge_kw")) {
                s.design.charge_kw = f.at("charge_kw").get<std::vector<double>>();
            }
            if (f.contains("ev_share")) {
                s.design.ev_share = f.at("ev_share").get<std::vector<double>>();
            }
            if (f.contains("repair_loc")) {
                s.design.repair_loc = f.at("repair_loc").get<std::vector<double>>();
            }
            if (f.contains("repair_scale")) {
                s.design.repair_scale = f.at("repair_scale").get<double>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config key 'factorial': ") + e.what());
        }
    }
    return s;
}

void print_summary(const ResultBundle& b)
{
    std::printf("%-10s %-6s", "index", "unit");
    for (const auto& c : b.cases) {
        std::printf(" %14s", c.spec.name.substr(0, 14).c_str());
    }
    std::printf("\n");
    for (std::size_t k = 0; k < reported_indices.size(); ++k) {
        std::printf("%-10s %-6s", std::string(reported_indices[k].name).c_str(),
            std::string(reported_indices[k].unit).c_str());
        for (const auto& c : b.cases) {
            if (c.summary) {
                std::printf(" %14.4f", c.summary->indices[k].mean);
            } else {
                std::printf(" %14s", "-");
            }
        }
        std::printf("\n");
    }
}

int finish(const ResultBundle& bundle, const Setup& s, bool force)
{
    print_summary(bundle);
    for (const auto& p : emit_results(bundle, s.out, s.formats, force)) {
        std::cout << "wrote " << p.string() << '\n';
    }
    int status = 0;
    for (const auto& c : bundle.cases) {
        if (!c.ok()) {
            std::cerr << "relsim: " << c.spec.name << " failed: " << c.error << '\n';
            status = 2;
        }
    }
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sequential Monte Carlo reliability of a radial feeder with EV parks and batteries"};
    app.set_version_flag("--version", library_version());
    app.require_subcommand(1);

    Options o;
    auto add_common = [&](CLI::App* sub, bool running) {
        sub->add_option("--config", o.config_path, "JSON settings file")->check(CLI::ExistingFile);
        sub->add_option("--network", o.network_path, "network JSON (default: bundled 33-bus feeder)");
        if (!running) {
            return;
        }
        sub->add_option("--iterations", o.iterations, "simulated years")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--increment", o.increment_min, "time step in minutes")->check(CLI::PositiveNumber);
        sub->add_option("--threads", o.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", o.out_dir, "output directory (env RELSIM_OUT_DIR, default ./results)");
        sub->add_flag("--trace", o.trace, "record every faulted sub-system");
        sub->add_flag("--force", o.force, "overwrite existing output files");
        sub->add_option("--formats", o.formats, "subset of summary,json,iterations,boxplot,convergence,factorial,trace")
            ->delimiter(',');
    };

    CLI::App* validate = app.add_subcommand("validate", "check a network file and print its size");
    add_common(validate, false);
    CLI::App* run = app.add_subcommand("run", "run selected cases");
    add_common(run, true);
    run->add_option("--case", o.cases, "case name or number (repeatable)")->delimiter(',');
    CLI::App* cases = app.add_subcommand("cases", "run the four standard cases");
    add_common(cases, true);
    CLI::App* factorial = app.add_subcommand("factorial", "charge rate x EV share x repair time sweep");
    add_common(factorial, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Setup s = resolve(o);
        if (validate->parsed()) {
            const PowerNetwork& n = s.data.network;
            int customers = 0;
            for (const auto& b : n.buses) {
                customers += b.customers;
            }
            std::cout << s.data.origin << ": " << n.buses.size() << " buses, " << n.lines.size() << " lines, "
                      << n.batteries.size() << " batteries, " << n.ev_parks.size() << " EV parks, " << customers
                      << " customers\n"
                      << "dataset hash " << content_hash(s.data.source) << '\n';
            return 0;
        }
        if (!o.force && std::filesystem::exists(s.out / "manifest.json")) {
            throw ConfigError(s.out.string() + " already holds results; pass --force to overwrite");
        }
        if (factorial->parsed()) {
            return finish(run_factorial(s.data, s.sim, s.design), s, o.force);
        }
        if (cases->parsed()) {
            s.cases = standard_cases();
        }
        return finish(run_cases(s.data, s.sim, s.cases), s, o.force);
    } catch (const DatasetError& e) {
        std::cerr << "relsim: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "relsim: " << e.what() << '\n';
        return 1;
    } catch (const OutputError& e) {
        std::cerr << "relsim: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "relsim: " << e.what() << '\n';
        return 2;
    }
}
