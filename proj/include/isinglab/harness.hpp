#pragma once

// Experiment plumbing: JSON configs, tidy result tables, CSV/JSON/SVG output and log-log fits.
// A run is a pure function of its config: replica seeds derive from (seed, L, replica).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "diffusion.hpp"
#include "dimer.hpp"
#include "glauber.hpp"
#include "modified2d.hpp"
#include "rng.hpp"
#include "spectral.hpp"
#include "stats.hpp"
#include "surface_dynamics.hpp"

namespace isinglab {

inline constexpr const char* kVersion = "0.1.0";

// bad config: exit code 2 in the CLI
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// a module refused the size: exit code 3
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_kinds()
{
    static const std::vector<std::string> k{"tau-plus", "coupling", "dimer", "spectrum", "heat", "coldyn", "modified-2d"};
    return k;
}

struct ExperimentConfig {
    std::string experiment;
    std::vector<int> sizes;
    long replicas = 1;
    std::uint64_t seed = 1;
    double beta = kInf;
    int dim = 2;
    std::string out = ".";
    std::string format = "csv";
    nlohmann::json params = nlohmann::json::object();  // per-experiment knobs

    double param(const std::string& k, double def) const { return params.contains(k) ? params.at(k).get<double>() : def; }
};

inline void validate(const ExperimentConfig& c)
{
    const auto& k = experiment_kinds();
    if (std::find(k.begin(), k.end(), c.experiment) == k.end()) throw ConfigError("unknown experiment kind '" + c.experiment + "'");
    if (c.sizes.empty()) throw ConfigError("sizes must not be empty");
    for (std::size_t i = 0; i < c.sizes.size(); ++i) {
        if (c.sizes[i] <= 0) throw ConfigError("sizes must be positive");
        if (i > 0 && c.sizes[i] <= c.sizes[i - 1]) throw ConfigError("sizes must be increasing");
    }
    if (c.replicas < 1) throw ConfigError("replicas must be at least 1");
    if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
    if (c.dim != 2 && c.dim != 3) throw ConfigError("dim must be 2 or 3");
    if (!(c.beta >= 0)) throw ConfigError("beta must be non-negative");
    if (!c.params.is_object()) throw ConfigError("params must be an object");
}

// beta = infinity is written as the string "inf"
inline nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json j;
    j["experiment"] = c.experiment;
    j["sizes"] = c.sizes;
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    if (std::isinf(c.beta))
        j["beta"] = "inf";
    else
        j["beta"] = c.beta;
    j["dim"] = c.dim;
    j["out"] = c.out;
    j["format"] = c.format;
    j["params"] = c.params;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        static const std::set<std::string> known{"experiment", "sizes", "replicas", "seed", "beta", "dim", "out", "format", "params"};
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
        c.experiment = j.at("experiment").get<std::string>();
        c.sizes = j.at("sizes").get<std::vector<int>>();
        if (j.contains("replicas")) c.replicas = j["replicas"].get<long>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("beta")) {
            const auto& b = j["beta"];
            if (b.is_string()) {
                if (b.get<std::string>() != "inf") throw ConfigError("beta must be a number or \"inf\"");
                c.beta = kInf;
            } else {
                c.beta = b.get<double>();
            }
        }
        if (j.contains("dim")) c.dim = j["dim"].get<int>();
        if (j.contains("out")) c.out = j["out"].get<std::string>();
        if (j.contains("format")) c.format = j["format"].get<std::string>();
        if (j.contains("params")) c.params = j["params"];
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

// FNV-1a of the canonical dump (object keys sorted); the output directory is not part of it
inline std::string config_hash(const ExperimentConfig& c)
{
    nlohmann::json j = to_json(c);
    j.erase("out");
    std::string s = j.dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
    return buf;
}

struct ResultRow {
    std::string experiment;
    int L = 0;
    long replica = 0;  // replica index; site or block index for profile/spectrum rows
    std::string observable;
    double value = 0;
    double sigma = 0;
    std::string config_hash;
    bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::string config_hash;
    nlohmann::json config;

    void add(const std::string& exp, int L, long rep, const std::string& obs, double v, double s = 0)
    {
        rows.push_back({exp, L, rep, obs, v, s, config_hash});
    }
    std::vector<std::string> observables() const
    {
        std::vector<std::string> o;
        for (const ResultRow& r : rows)
            if (std::find(o.begin(), o.end(), r.observable) == o.end()) o.push_back(r.observable);
        return o;
    }
};

namespace detail {

inline void run_tau_plus(const ExperimentConfig& c, ResultTable& t)
{
    for (int L : c.sizes) {
        double horizon = c.param("horizon", default_tau_horizon(L));
        TauSample s = tau_plus(make_box(c.dim, L), RateRule{c.beta}, std::size_t(c.replicas), horizon, derive_seed(c.seed, L));
        for (long r = 0; r < c.replicas; ++r) t.add(c.experiment, L, r, "tau_plus", s.values[r]);
        t.add(c.experiment, L, 0, "energy_increases", double(s.energy_increases));
    }
}

inline void run_coupling(const ExperimentConfig& c, ResultTable& t)
{
    int H = int(c.param("height", 4));
    SurfaceDynamics dyn = c.params.value("dynamics", std::string("column")) == "local" ? SurfaceDynamics::local : SurfaceDynamics::column;
    for (int L : c.sizes) {
        BoxSpec b = BoxSpec::uniform(L, L, H);
        std::vector<SurfaceCoupling> res(c.replicas);
        std::uint64_t base = derive_seed(c.seed, L);
        parallel_for(std::size_t(c.replicas), [&](std::size_t r) { res[r] = coupling_time(b, dyn, derive_seed(base, r), c.param("horizon", 1e9)); });
        long viol = 0;
        for (long r = 0; r < c.replicas; ++r) {
            t.add(c.experiment, L, r, "coupling_time", res[r].coalesced ? res[r].time : kInf);
            viol += res[r].order_violations;
        }
        t.add(c.experiment, L, 0, "order_violations", double(viol));
    }
}

inline void run_dimer(const ExperimentConfig& c, ResultTable& t)
{
    DimerSpec s(c.param("pa", 1.0 / 3), c.param("pb", 1.0 / 3), c.param("pc", 1.0 / 3));
    for (int n : c.sizes) {
        if (n > 20000) throw BudgetError("dimer: n above 20000");
        double v = variance_Nn(n, s);
        t.add(c.experiment, n, 0, "variance", v);
        if (n > 1) t.add(c.experiment, n, 0, "variance_over_log", v / std::log(double(n)));
        if (n <= 400) {
            auto [A, p] = build_A(n, s);
            TailBound tb = poisson_binomial_tail(p.q, c.param("delta", 8.0));
            t.add(c.experiment, n, 0, "tail_exact", tb.exact);
            t.add(c.experiment, n, 0, "tail_bound", tb.bound);
        }
    }
}

// square L x L block; rows: per class, its principal eigenvalue (replica = class index)
inline void run_spectrum(const ExperimentConfig& c, ResultTable& t)
{
    for (int L : c.sizes) {
        DomainPtr dom = make_block(2, {0, 0, 0}, {L - 1, L - 1, 0});
        StateSpace sp = enumerate_states(dom);
        BlockDecomposition B = decompose_blocks(sp);
        SymmetrizedMatrix Uinf = symmetrized_limit(sp);
        for (std::size_t k = 0; k < B.classes(); ++k) {
            PrincipalEigen p = principal_eigen(block_matrix(Uinf, B, k));
            t.add(c.experiment, L, long(k), "lambda", p.lambda);
            t.add(c.experiment, L, long(k), "block_size", double(B.members[k].size()));
        }
        t.add(c.experiment, L, long(B.plus_class), "plus_block", 1.0);
        if (std::isfinite(c.beta)) {
            SparseGenerator g = build_generator(dom, c.beta);
            t.add(c.experiment, L, 0, "gap", spectral_gap(symmetrize(g), g).gap);
        }
    }
}

// rows per site x (replica column); t defaults to L^2/50
inline void run_heat(const ExperimentConfig& c, ResultTable& t)
{
    for (int L : c.sizes) {
        double time = c.param("t", double(L) * L * c.param("t_over_L2", 1.0 / 50));
        HeatState h = heat_solve(L, time);
        for (int x = 0; x <= L; ++x) t.add(c.experiment, L, x, "u", h.u[x]);
        if (time > 0) {
            HeatTail tail = heat_tail_check(L, time);
            t.add(c.experiment, L, 0, "tail_lhs", tail.lhs);
            t.add(c.experiment, L, 0, "tail_bound", tail.bound);
        }
        if (c.replicas > 1) {
            SSEPProfile p = ssep_simulate(L, time, c.replicas, derive_seed(c.seed, L));
            for (int x = 1; x <= L; ++x) {
                t.add(c.experiment, L, x, "ssep_density", p.empirical[x - 1], p.sigma[x - 1]);
                t.add(c.experiment, L, x, "ssep_expected", p.expected[x - 1]);
            }
            t.add(c.experiment, L, 0, "ssep_max_z", p.max_z);
        }
    }
}

inline void run_coldyn(const ExperimentConfig& c, ResultTable& t)
{
    for (int L : c.sizes) {
        double time = c.param("t", double(L) * L * c.param("t_over_L2", 1.0 / 8));
        ColdynReport r = coldyn_profile(L, time, std::max(2L, c.replicas), derive_seed(c.seed, L));
        for (int x = 0; x <= L; ++x) {
            t.add(c.experiment, L, x, "h_mean", r.mean[x], r.sigma[x]);
            t.add(c.experiment, L, x, "u", r.heat[x]);
        }
        t.add(c.experiment, L, 0, "max_z", r.max_z);
        t.add(c.experiment, L, 0, "corner", r.corner, r.corner_sigma);
        t.add(c.experiment, L, 0, "corner_bound", r.corner_bound);
    }
}

inline void run_modified_2d(const ExperimentConfig& c, ResultTable& t)
{
    for (int L : c.sizes) {
        std::vector<Modified2dReport> res(c.replicas);
        std::uint64_t base = derive_seed(c.seed, L);
        double fraction = c.param("fraction", 0.9);
        parallel_for(std::size_t(c.replicas), [&](std::size_t r) { res[r] = modified_2d_simulate(L, derive_seed(base, r), fraction); });
        for (long r = 0; r < c.replicas; ++r) {
            const Modified2dReport& m = res[r];
            t.add(c.experiment, L, r, "tau_D", m.tau_D);
            t.add(c.experiment, L, r, "drop", double(m.drop()));
            t.add(c.experiment, L, r, "good_violations", double(m.good_violations));
            t.add(c.experiment, L, r, "relation_violations", double(m.relation_violations));
            t.add(c.experiment, L, r, "max_vertices", double(m.max_vertices));
        }
    }
}

} // namespace detail

inline ResultTable run_experiment(const ExperimentConfig& c)
{
    validate(c);
    ResultTable t;
    t.seed = c.seed;
    t.config_hash = config_hash(c);
    t.config = to_json(c);
    try {
        if (c.experiment == "tau-plus") detail::run_tau_plus(c, t);
        else if (c.experiment == "coupling") detail::run_coupling(c, t);
        else if (c.experiment == "dimer") detail::run_dimer(c, t);
        else if (c.experiment == "spectrum") detail::run_spectrum(c, t);
        else if (c.experiment == "heat") detail::run_heat(c, t);
        else if (c.experiment == "coldyn") detail::run_coldyn(c, t);
        else detail::run_modified_2d(c, t);
    } catch (const std::length_error& e) {
        throw BudgetError(c.experiment + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("params: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.experiment + ": " + e.what());
    }
    return t;
}

// ---- CSV ----

inline const char* kCsvHeader = "experiment,L,replica,observable,value,sigma,config_hash";

inline std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    if (v == 0) v = 0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const ResultTable& t)
{
    std::string s = std::string(kCsvHeader) + "\n";
    for (const ResultRow& r : t.rows)
        s += r.experiment + "," + std::to_string(r.L) + "," + std::to_string(r.replica) + "," + r.observable + "," + format_double(r.value) + "," +
             format_double(r.sigma) + "," + r.config_hash + "\n";
    return s;
}

inline ResultTable parse_csv(std::istream& in)
{
    ResultTable t;
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("CSV header mismatch");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw std::runtime_error("CSV row with " + std::to_string(f.size()) + " fields: " + line);
        t.rows.push_back({f[0], std::stoi(f[1]), std::stol(f[2]), f[3], std::stod(f[4]), std::stod(f[5]), f[6]});
    }
    if (!t.rows.empty()) t.config_hash = t.rows.front().config_hash;
    return t;
}

inline ResultTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_csv(in);
}

inline nlohmann::json to_json(const ResultTable& t)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const ResultRow& r : t.rows)
        rows.push_back({{"experiment", r.experiment}, {"L", r.L}, {"replica", r.replica}, {"observable", r.observable},
                        {"value", format_double(r.value)}, {"sigma", format_double(r.sigma)}, {"config_hash", r.config_hash}});
    return {{"seed", t.seed}, {"version", t.version}, {"config_hash", t.config_hash}, {"config", t.config}, {"rows", rows}};
}

// ---- scaling fit ----

struct ScalingFit {
    double slope = 0, intercept = 0, r2 = 0;
    double ci_lo = 0, ci_hi = 0;  // 95% bootstrap interval of the slope
    std::vector<int> sizes;
    std::vector<double> medians;
};

// least squares of log median(y) on log L; replicas resampled within each size for the CI
inline ScalingFit scaling_fit(const ResultTable& t, const std::string& observable, int resamples = 1000, std::uint64_t seed = 12345)
{
    std::map<int, std::vector<double>> by;
    for (const ResultRow& r : t.rows)
        if (r.observable == observable) {
            if (!(r.value > 0)) throw std::invalid_argument("scaling fit needs positive observables");
            by[r.L].push_back(r.value);
        }
    if (by.size() < 3) throw std::invalid_argument("scaling fit needs at least 3 distinct sizes");
    ScalingFit f;
    std::vector<double> lx;
    for (auto& [L, v] : by) {
        f.sizes.push_back(L);
        f.medians.push_back(median(v));
        lx.push_back(double(L));
    }
    LineFit lf = loglog_fit(lx, f.medians);
    f.slope = lf.slope;
    f.intercept = lf.intercept;
    f.r2 = lf.r2;
    Engine g(seed);
    std::vector<double> slopes;
    for (int b = 0; b < resamples; ++b) {
        std::vector<double> med;
        for (auto& [L, v] : by) {
            std::vector<double> s(v.size());
            for (double& x : s) x = v[uniform_index(g, v.size())];
            med.push_back(median(s));
        }
        slopes.push_back(loglog_fit(lx, med).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    if (!slopes.empty()) {
        f.ci_lo = slopes[std::size_t(0.025 * (slopes.size() - 1))];
        f.ci_hi = slopes[std::size_t(std::ceil(0.975 * (slopes.size() - 1)))];
    }
    return f;
}

// ---- SVG ----

// one scatter plot of an observable against L, with the per-size median joined by a line
inline std::string svg_plot(const ResultTable& t, const std::string& observable)
{
    std::map<int, std::vector<double>> by;
    for (const ResultRow& r : t.rows)
        if (r.observable == observable && std::isfinite(r.value)) by[r.L].push_back(r.value);
    const double W = 480, H = 320, m = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!by.empty()) {
        x0 = by.begin()->first;
        x1 = by.rbegin()->first;
        y0 = kInf;
        y1 = -kInf;
        for (auto& [L, v] : by)
            for (double y : v) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
    auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 2 * m); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << m << "\" y1=\"" << H - m << "\" x2=\"" << W - m << "\" y2=\"" << H - m << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << H - m << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << observable << "</text>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">L</text>\n";
    s << "<text x=\"" << m << "\" y=\"" << H - m + 16 << "\" font-size=\"10\">" << format_double(x0) << "</text>\n";
    s << "<text x=\"" << W - m << "\" y=\"" << H - m + 16 << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(x1) << "</text>\n";
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.4g", y0);
    s << "<text x=\"" << m - 4 << "\" y=\"" << H - m << "\" text-anchor=\"end\" font-size=\"10\">" << lab << "</text>\n";
    std::snprintf(lab, sizeof lab, "%.4g", y1);
    s << "<text x=\"" << m - 4 << "\" y=\"" << m + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << lab << "</text>\n";
    std::string path;
    for (auto& [L, v] : by) {
        for (double y : v) s << "<circle cx=\"" << px(L) << "\" cy=\"" << py(y) << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.5\"/>\n";
        path += (path.empty() ? "M" : " L") + std::to_string(px(L)) + " " + std::to_string(py(median(v)));
    }
    if (!path.empty()) s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    s << "</svg>\n";
    return s.str();
}

// Writes <experiment>.csv (or .json), a .meta.json sidecar and one SVG per observable into dir.
inline std::vector<std::string> emit_report(const ResultTable& t, const std::string& dir, const std::string& format, const std::string& stem,
                                            bool plots = true)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
    std::vector<std::string> written;
    auto write = [&](const fs::path& p, const std::string& body) {
        std::ofstream o(p, std::ios::binary);
        if (!o) throw std::runtime_error("cannot write " + p.string());
        o << body;
        o.close();
        if (!o) throw std::runtime_error("write failed for " + p.string());
        written.push_back(p.string());
    };
    fs::path base = fs::path(dir) / stem;
    if (format == "json")
        write(base.string() + ".json", to_json(t).dump(2) + "\n");
    else
        write(base.string() + ".csv", to_csv(t));
    nlohmann::json meta{{"seed", t.seed}, {"version", t.version}, {"config_hash", t.config_hash}, {"config", t.config}, {"rows", t.rows.size()}};
    write(base.string() + ".meta.json", meta.dump(2) + "\n");
    if (plots)
        for (const std::string& o : t.observables()) write(base.string() + "_" + o + ".svg", svg_plot(t, o));
    return written;
}

} // namespace isinglab
