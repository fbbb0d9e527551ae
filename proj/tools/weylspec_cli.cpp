#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

#include "acceptance.hpp"
#include "weylspec/green.hpp"
#include "weylspec/herglotz.hpp"
#include "weylspec/linalg.hpp"
#include "weylspec/potential_config.hpp"
#include "weylspec/reflectionless.hpp"
#include "weylspec/weyl.hpp"

namespace {

using nlohmann::json;
using namespace weylspec;

constexpr int schema_version = 1;

struct RunConfig {
    std::string command;
    std::string potential_path;
    json potential;  // inline potential object from the run config
    std::string config_path;
    std::string out_path;
    std::string format;  // csv | json, empty = from the output extension

    int workers = 0;
    double rtol = 1e-10;
    double atol = 1e-12;
    double weyl_tol = 1e-10;
    double unit_tol = 1e-6;
    double edge_tol = 1e-8;
    double quad_tol = 1e-7;
    std::vector<double> y_schedule{50.0, 100.0, 200.0, 400.0};
    double threshold = 5e-3;
    double reconstruction_threshold = 5e-2;

    std::vector<double> range;
    int grid = 2000;
    double x0 = 0.0;
    std::vector<double> xs;
    std::vector<std::pair<double, double>> zs;
    std::string side = "both";
    std::string method = "auto";
    std::string lambda_grid = "auto";
    double upper = NAN;
    std::vector<double> interval{0.0, 1.0};
    int measure_grid = 4001;
    std::string which = "green";
    double cutoff = NAN;
    int order = 1;
    int per_band = 40;
    std::string condition = "all";
};

// Run-config keys that mirror command-line flags; the flag wins when both are given.
struct Setting {
    const char* key;
    const char* flag;
    std::function<void(RunConfig&, const json&)> apply;
};

double positive(const json& v, const std::string& key) {
    const double d = parse_real(v, key);
    if (!(d > 0)) throw ConfigError(key, "must be positive");
    return d;
}

int positive_int(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long>() < 1) throw ConfigError(key, "must be a positive integer");
    return v.get<int>();
}

const std::vector<Setting>& settings() {
    static const std::vector<Setting> list{
        {"workers", "--workers",
         [](RunConfig& c, const json& v) {
             if (!v.is_number_integer() || v.get<long>() < 0) throw ConfigError("workers", "must be a nonnegative integer");
             c.workers = v.get<int>();
         }},
        {"rtol", "--rtol", [](RunConfig& c, const json& v) { c.rtol = positive(v, "rtol"); }},
        {"atol", "--atol", [](RunConfig& c, const json& v) { c.atol = positive(v, "atol"); }},
        {"weyl_tol", "--weyl-tol", [](RunConfig& c, const json& v) { c.weyl_tol = positive(v, "weyl_tol"); }},
        {"unit_tol", "--unit-tol", [](RunConfig& c, const json& v) { c.unit_tol = positive(v, "unit_tol"); }},
        {"edge_tol", "--edge-tol", [](RunConfig& c, const json& v) { c.edge_tol = positive(v, "edge_tol"); }},
        {"quad_tol", "--quad-tol", [](RunConfig& c, const json& v) { c.quad_tol = positive(v, "quad_tol"); }},
        {"y_schedule", "--y-schedule",
         [](RunConfig& c, const json& v) {
             if (!v.is_array() || v.empty()) throw ConfigError("y_schedule", "expected a nonempty array");
             c.y_schedule.clear();
             for (const auto& e : v) c.y_schedule.push_back(positive(e, "y_schedule"));
         }},
        {"threshold", "--threshold", [](RunConfig& c, const json& v) { c.threshold = positive(v, "threshold"); }},
        {"reconstruction_threshold", "--reconstruction-threshold",
         [](RunConfig& c, const json& v) { c.reconstruction_threshold = positive(v, "reconstruction_threshold"); }},
        {"grid", "--grid", [](RunConfig& c, const json& v) { c.grid = positive_int(v, "grid"); }},
        {"cutoff", "--cutoff", [](RunConfig& c, const json& v) { c.cutoff = parse_real(v, "cutoff"); }},
        {"x0", "--x0", [](RunConfig& c, const json& v) { c.x0 = parse_real(v, "x0"); }},
        {"per_band", "--per-band", [](RunConfig& c, const json& v) { c.per_band = positive_int(v, "per_band"); }},
        {"format", "--format",
         [](RunConfig& c, const json& v) {
             if (!v.is_string()) throw ConfigError("format", "expected \"csv\" or \"json\"");
             c.format = v.get<std::string>();
         }},
        {"out", "--out",
         [](RunConfig& c, const json& v) {
             if (!v.is_string()) throw ConfigError("out", "expected a path");
             c.out_path = v.get<std::string>();
         }},
    };
    return list;
}

void apply_run_config(RunConfig& c, const CLI::App& sub) {
    if (c.config_path.empty()) return;
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("config", "cannot open '" + c.config_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config", "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "potential") {
            if (value.is_string()) {
                if (c.potential_path.empty()) c.potential_path = value.get<std::string>();
            } else if (c.potential_path.empty()) {
                c.potential = value;
            }
            continue;
        }
        auto it = std::find_if(settings().begin(), settings().end(), [&](const Setting& s) { return key == s.key; });
        if (it == settings().end()) throw ConfigError(key, "unknown key");
        if (sub.count(it->flag) == 0) it->apply(c, value);
    }
}

void validate(RunConfig& c) {
    auto pos = [](double v, const char* key) {
        if (!(v > 0)) throw ConfigError(key, "must be positive");
    };
    pos(c.rtol, "rtol");
    pos(c.atol, "atol");
    pos(c.weyl_tol, "weyl_tol");
    pos(c.unit_tol, "unit_tol");
    pos(c.edge_tol, "edge_tol");
    pos(c.quad_tol, "quad_tol");
    pos(c.threshold, "threshold");
    pos(c.reconstruction_threshold, "reconstruction_threshold");
    for (double y : c.y_schedule) pos(y, "y_schedule");
    if (!std::is_sorted(c.y_schedule.begin(), c.y_schedule.end())) throw ConfigError("y_schedule", "must be increasing");
    if (!c.range.empty() && !(c.range.size() == 2 && c.range[0] < c.range[1]))
        throw ConfigError("range", "expected two ordered bounds");
    if (!(c.interval.size() == 2 && c.interval[0] < c.interval[1]))
        throw ConfigError("interval", "expected two ordered bounds");
    if (c.grid < 2) throw ConfigError("grid", "must be at least 2");
    if (c.workers < 0) throw ConfigError("workers", "must be nonnegative");
    if (!c.format.empty() && c.format != "csv" && c.format != "json") throw ConfigError("format", "expected csv or json");
    if (c.format.empty()) {
        const bool js = c.out_path.size() >= 5 && c.out_path.compare(c.out_path.size() - 5, 5, ".json") == 0;
        c.format = js || c.command == "borg" || c.command == "selftest" ? "json" : "csv";
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

json tolerances(const RunConfig& c) {
    return {{"rtol", c.rtol},         {"atol", c.atol},         {"weyl_tol", c.weyl_tol},
            {"unit_tol", c.unit_tol}, {"edge_tol", c.edge_tol}, {"quad_tol", c.quad_tol},
            {"y_schedule", c.y_schedule}, {"threshold", c.threshold},
            {"reconstruction_threshold", c.reconstruction_threshold}};
}

json parameters(const RunConfig& c) {
    json p{{"grid", c.grid},     {"x0", c.x0},         {"x", c.xs},
           {"side", c.side},     {"method", c.method}, {"lambda_grid", c.lambda_grid},
           {"interval", c.interval}, {"measure_grid", c.measure_grid}, {"which", c.which},
           {"order", c.order},   {"per_band", c.per_band}, {"condition", c.condition}};
    p["range"] = c.range;
    p["upper"] = std::isnan(c.upper) ? json() : json(c.upper);
    p["cutoff"] = std::isnan(c.cutoff) ? json() : json(c.cutoff);
    json z = json::array();
    for (const auto& [re, im] : c.zs) z.push_back({re, im});
    p["z"] = z;
    return p;
}

json provenance(const RunConfig& c) {
    const json hashed{{"command", c.command}, {"potential", c.potential},
                      {"tolerances", tolerances(c)}, {"parameters", parameters(c)}};
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(hashed.dump())));
    return {{"tool", "weylspec"},
            {"command", c.command},
            {"schema_version", schema_version},
            {"config_hash", std::string("fnv1a64:") + hex},
            {"tolerances", tolerances(c)},
            {"workers", worker_count()}};
}

FloquetOptions floquet_options(const RunConfig& c) {
    FloquetOptions o;
    o.integrator.rtol = c.rtol;
    o.integrator.atol = c.atol;
    o.unit_tol = c.unit_tol;
    o.edge_tol = c.edge_tol;
    return o;
}

WeylOptions weyl_options(const RunConfig& c) {
    WeylOptions o;
    o.tol = c.weyl_tol;
    o.integrator.rtol = c.rtol;
    o.integrator.atol = c.atol;
    return o;
}

TraceOptions trace_options(const RunConfig& c) {
    TraceOptions o;
    o.quad_tol = c.quad_tol;
    o.y_schedule = c.y_schedule;
    return o;
}

std::string num(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json matrix_json(const CMatrix& M) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array(), s = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            r.push_back(M(i, j).real());
            s.push_back(M(i, j).imag());
        }
        re.push_back(r);
        im.push_back(s);
    }
    return {{"re", re}, {"im", im}};
}

std::string matrix_header(const std::string& name, int m) {
    std::string h;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            const std::string e = name + "_" + std::to_string(i) + std::to_string(j);
            h += "," + e + "_re," + e + "_im";
        }
    return h;
}

std::string matrix_row(const CMatrix& M) {
    std::string r;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) r += "," + num(M(i, j).real()) + "," + num(M(i, j).imag());
    return r;
}

// Table output: CSV with a provenance comment line, or JSON with the rows as objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json summary = json::object();
};

std::vector<std::string> split_header(const std::string& h) {
    std::vector<std::string> out;
    std::stringstream ss(h);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::string> split_row(const std::string& r) {
    std::vector<std::string> out;
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

void emit(const RunConfig& c, const std::string& payload) {
    if (c.out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(c.out_path, std::ios::binary);
    if (!out) throw ConfigError("out", "cannot write '" + c.out_path + "'");
    out << payload;
}

void write_table(const RunConfig& c, const Table& t) {
    if (c.format == "json") {
        json j{{"provenance", provenance(c)}, {"columns", t.columns}};
        for (const auto& [k, v] : t.summary.items()) j[k] = v;
        json rows = json::array();
        for (const auto& r : t.rows) {
            json o = json::object();
            for (std::size_t i = 0; i < t.columns.size() && i < r.size(); ++i) {
                char* end = nullptr;
                const double d = std::strtod(r[i].c_str(), &end);
                o[t.columns[i]] = (end && *end == '\0' && !r[i].empty()) ? json(d) : json(r[i]);
            }
            rows.push_back(o);
        }
        j["rows"] = rows;
        emit(c, j.dump(2) + "\n");
        return;
    }
    std::string s = "# " + provenance(c).dump() + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    }
    emit(c, s);
}

void write_json(const RunConfig& c, json body) {
    json j{{"provenance", provenance(c)}};
    for (const auto& [k, v] : body.items()) j[k] = v;
    emit(c, j.dump(2) + "\n");
}

PotentialSpec load(RunConfig& c) {
    if (!c.potential_path.empty()) {
        std::ifstream in(c.potential_path);
        if (!in) throw ConfigError("potential", "cannot open '" + c.potential_path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ConfigError("potential", std::string("invalid JSON: ") + e.what());
        }
        c.potential = j.is_object() && j.contains("potential") ? j["potential"] : j;
    }
    if (c.potential.is_null()) throw ConfigError("potential", "missing (use --potential or the run-config key)");
    return build_potential(c.potential);
}

bool use_floquet(const RunConfig& c, const PotentialSpec& Q) {
    if (c.method == "floquet") return true;
    if (c.method == "disk") return false;
    return Q.is_periodic();
}

std::pair<double, double> default_range(const RunConfig& c, const PotentialSpec& Q) {
    if (!c.range.empty()) return {c.range[0], c.range[1]};
    const double lower = Q.min_eigenvalue_bound() - 1.0;
    return {lower, std::isnan(c.upper) ? lower + 21.0 : c.upper};
}

std::vector<cplx> z_list(const RunConfig& c) {
    if (c.zs.empty()) throw ConfigError("z", "at least one --z RE IM is required");
    std::vector<cplx> out;
    for (const auto& [re, im] : c.zs) {
        if (im == 0.0) throw ConfigError("z", "imaginary part must be nonzero");
        out.emplace_back(re, im);
    }
    return out;
}

json band_summary(const BandSpectrum& bs) {
    json bands = json::array(), gaps = json::array();
    for (const auto& b : bs.bands)
        bands.push_back({{"lower", b.lower},
                         {"upper", b.upper},
                         {"lower_truncated", b.lower_truncated},
                         {"upper_truncated", b.upper_truncated},
                         {"min_multiplicity", b.min_multiplicity},
                         {"max_multiplicity", b.max_multiplicity}});
    for (const auto& [a, b] : bs.gaps) gaps.push_back({a, b});
    return {{"E0", bs.E0 ? json(*bs.E0) : json()},
            {"bands", bands},
            {"gaps", gaps},
            {"breakpoints", bs.breakpoints},
            {"uniform_multiplicity", bs.uniform_multiplicity},
            {"warnings", bs.warnings}};
}

int cmd_bands(RunConfig& c) {
    const auto Q = load(c);
    const auto [lo, hi] = default_range(c, Q);
    const auto bs = band_spectrum(Q, lo, hi, c.grid, c.x0, floquet_options(c));
    // Scan rows plus one row per refined band edge, in increasing lambda.
    std::vector<std::tuple<double, int, int>> rows;
    for (std::size_t i = 0; i < bs.grid.size(); ++i) rows.emplace_back(bs.grid[i], bs.multiplicity[i], bs.band_id[i]);
    std::vector<std::pair<double, int>> edges;
    for (std::size_t k = 0; k < bs.bands.size(); ++k) {
        if (!bs.bands[k].lower_truncated) edges.emplace_back(bs.bands[k].lower, static_cast<int>(k));
        if (!bs.bands[k].upper_truncated) edges.emplace_back(bs.bands[k].upper, static_cast<int>(k));
    }
    const auto opts = floquet_options(c);
    const auto mu = parallel_map(edges.size(), [&](std::size_t i) {
        return unit_modulus_count(monodromy(Q, edges[i].first, c.x0, opts.integrator).multipliers, opts.unit_tol);
    });
    for (std::size_t i = 0; i < edges.size(); ++i) rows.emplace_back(edges[i].first, mu[i], edges[i].second);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    Table t;
    t.columns = {"lambda", "mu", "band_id"};
    for (const auto& [l, m, id] : rows) t.rows.push_back({num(l), std::to_string(m), std::to_string(id)});
    t.summary = band_summary(bs);
    write_table(c, t);
    for (const auto& w : bs.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_weyl(RunConfig& c) {
    const auto Q = load(c);
    const auto zs = z_list(c);
    if (c.side != "plus" && c.side != "minus" && c.side != "both") throw ConfigError("side", "expected plus, minus or both");
    const bool floquet = use_floquet(c, Q);
    const int m = Q.dimension();
    struct Row {
        cplx z;
        Side side;
        CMatrix M;
        double convergence;
    };
    const auto rows = parallel_map(zs.size(), [&](std::size_t i) {
        std::vector<Row> out;
        if (floquet) {
            const auto split = floquet_weyl(Q, zs[i], c.x0, floquet_options(c));
            if (c.side != "minus") out.push_back({zs[i], Side::plus, split.M_plus, floquet_quadratic_residual(split)});
            if (c.side != "plus") out.push_back({zs[i], Side::minus, split.M_minus, floquet_quadratic_residual(split)});
        } else {
            for (Side s : {Side::plus, Side::minus}) {
                if ((s == Side::plus && c.side == "minus") || (s == Side::minus && c.side == "plus")) continue;
                const auto w = weyl_m(Q, zs[i], c.x0, s, weyl_options(c));
                out.push_back({zs[i], s, w.value, w.convergence});
            }
        }
        return out;
    });
    Table t;
    t.columns = split_header("re_z,im_z,side,method,residual" + matrix_header("M", m));
    for (const auto& group : rows)
        for (const auto& r : group)
            t.rows.push_back(split_row(num(r.z.real()) + "," + num(r.z.imag()) + "," + (r.side == Side::plus ? "plus" : "minus") + "," +
                                       (floquet ? "floquet" : "disk") + "," + num(r.convergence) + matrix_row(r.M)));
    write_table(c, t);
    return 0;
}

int cmd_green(RunConfig& c) {
    const auto Q = load(c);
    const auto zs = z_list(c);
    const bool floquet = use_floquet(c, Q);
    const double x = c.xs.empty() ? c.x0 : c.xs.front();
    const auto values = parallel_map(zs.size(), [&](std::size_t i) {
        if (floquet) {
            const auto split = floquet_weyl(Q, zs[i], x, floquet_options(c));
            return green_from_weyl(split.M_plus, split.M_minus, zs[i], x).value;
        }
        return green_diagonal(Q, zs[i], x, weyl_options(c)).value;
    });
    Table t;
    t.columns = split_header("re_z,im_z,x" + matrix_header("G", Q.dimension()));
    for (std::size_t i = 0; i < zs.size(); ++i)
        t.rows.push_back(split_row(num(zs[i].real()) + "," + num(zs[i].imag()) + "," + num(x) + matrix_row(values[i])));
    write_table(c, t);
    return 0;
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
    std::stringstream ss(spec);
    double a = 0, b = 0;
    int n = 0;
    char c1 = 0, c2 = 0;
    if (!(ss >> a >> c1 >> b >> c2 >> n) || c1 != ',' || c2 != ',' || !(a < b) || n < 2)
        throw ConfigError("lambda_grid", "expected \"auto\" or \"min,max,count\" with min < max and count >= 2");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1.0));
    return g;
}

int cmd_xi(RunConfig& c) {
    const auto Q = load(c);
    if (!Q.is_periodic()) throw ConfigError("potential", "xi needs a periodic or constant potential");
    const double x = c.xs.empty() ? 0.0 : c.xs.front();
    std::vector<double> grid;
    double lo = 0, hi = 0;
    if (c.lambda_grid == "auto") {
        std::tie(lo, hi) = default_range(c, Q);
        for (int i = 0; i < 401; ++i) grid.push_back(lo + (hi - lo) * i / 400.0);
    } else {
        grid = parse_lambda_grid(c.lambda_grid);
        lo = std::min(grid.front(), Q.min_eigenvalue_bound() - 1.0);
        hi = grid.back();
    }
    const int n_scan = std::max(400, static_cast<int>(std::ceil(20.0 * (hi - lo))));
    const auto bs = band_spectrum(Q, lo, hi + 1.0, n_scan, 0.0, floquet_options(c));
    const auto slice = periodic_xi_field(Q, bs, floquet_options(c))(x);
    std::vector<double> kept;
    for (double l : grid) {
        const auto it = std::lower_bound(slice.breakpoints.begin(), slice.breakpoints.end(), l);
        double d = INFINITY;
        if (it != slice.breakpoints.end()) d = std::min(d, *it - l);
        if (it != slice.breakpoints.begin()) d = std::min(d, l - *std::prev(it));
        if (d > 1e-6 * std::max(1.0, std::abs(l))) kept.push_back(l);
    }
    const auto values = parallel_map(kept.size(), [&](std::size_t i) { return slice.xi(kept[i]); });
    Table t;
    t.columns = split_header("lambda,x,in_band" + matrix_header("Xi", Q.dimension()));
    for (std::size_t i = 0; i < kept.size(); ++i)
        t.rows.push_back(split_row(num(kept[i]) + "," + num(x) + "," + (bs.in_band(kept[i]) ? "1" : "0") +
                                   matrix_row(values[i])));
    t.summary = {{"breakpoints", slice.breakpoints}};
    write_table(c, t);
    return 0;
}

int cmd_measure(RunConfig& c) {
    const auto Q = load(c);
    if (c.which != "green" && c.which != "block") throw ConfigError("which", "expected green or block");
    const bool floquet = use_floquet(c, Q);
    const bool block = c.which == "block";
    const HerglotzFn H = [&](cplx z) -> CMatrix {
        CMatrix Mp, Mm;
        if (floquet) {
            const auto split = floquet_weyl(Q, z, c.x0, floquet_options(c));
            Mp = split.M_plus;
            Mm = split.M_minus;
        } else {
            Mp = weyl_m(Q, z, c.x0, Side::plus, weyl_options(c)).value;
            Mm = weyl_m(Q, z, c.x0, Side::minus, weyl_options(c)).value;
        }
        return block ? block_weyl_from(Mp, Mm).value : green_from_weyl(Mp, Mm).value;
    };
    if (c.measure_grid < 3) throw ConfigError("measure_grid", "must be at least 3");
    const auto r = stieltjes_measure(H, c.interval[0], c.interval[1], c.measure_grid, default_eps_schedule());
    if (c.format == "json") {
        write_json(c, {{"lambda1", r.lambda1},
                       {"lambda2", r.lambda2},
                       {"which", c.which},
                       {"x0", c.x0},
                       {"n_grid", r.n_grid},
                       {"eps_schedule", r.eps_schedule},
                       {"residual", r.residual},
                       {"value", matrix_json(r.value)}});
        return 0;
    }
    Table t;
    t.columns = {"row", "col", "re", "im"};
    for (Eigen::Index i = 0; i < r.value.rows(); ++i)
        for (Eigen::Index j = 0; j < r.value.cols(); ++j)
            t.rows.push_back({std::to_string(i + 1), std::to_string(j + 1), num(r.value(i, j).real()),
                              num(r.value(i, j).imag())});
    write_table(c, t);
    return 0;
}

int cmd_trace(RunConfig& c) {
    const auto Q = load(c);
    if (!Q.is_periodic()) throw ConfigError("potential", "trace needs a periodic or constant potential");
    if (std::isnan(c.cutoff)) throw ConfigError("cutoff", "missing");
    if (c.order < 1) throw ConfigError("order", "must be a positive integer");
    const double lower = Q.min_eigenvalue_bound() - 1.0;
    if (!(c.cutoff > lower + 1.0)) throw ConfigError("cutoff", "must lie above the bottom of the spectrum");
    const auto bs = band_spectrum(Q, lower, c.cutoff, std::max(400, static_cast<int>(std::ceil(20.0 * (c.cutoff - lower)))),
                                  0.0, floquet_options(c));
    if (!bs.E0) throw ComputationError("bottom of the spectrum not resolved by the band scan");
    const auto field = periodic_xi_field(Q, bs, floquet_options(c));
    const std::vector<double> xs = c.xs.empty() ? std::vector<double>{0.0} : c.xs;
    Table t;
    t.columns = split_header("x,order,E0,cutoff,residual,tail_defect,tail_violation,evaluations" +
                             matrix_header(c.order == 1 ? "Q" : "R", Q.dimension()));
    for (double x : xs) {
        const auto r = c.order == 1 ? reconstruct_potential(field, *bs.E0, x, c.cutoff, trace_options(c))
                                    : higher_trace_invariant(field, *bs.E0, x, c.order, c.cutoff, trace_options(c));
        if (r.tail_violation) std::cerr << "warning: tail check failed at x = " << num(x) << "\n";
        t.rows.push_back(split_row(num(x) + "," + std::to_string(c.order) + "," + num(r.E0) + "," + num(r.cutoff) + "," +
                                   num(r.residual) + "," + num(r.tail_defect) + "," + (r.tail_violation ? "1" : "0") +
                                   "," + std::to_string(r.evaluations) + matrix_row(r.value)));
    }
    write_table(c, t);
    return 0;
}

ReflectionlessCondition parse_condition(const std::string& s) {
    if (s == "i") return ReflectionlessCondition::xi;
    if (s == "ii") return ReflectionlessCondition::green;
    if (s == "iii") return ReflectionlessCondition::weyl;
    if (s == "all") return ReflectionlessCondition::all;
    throw ConfigError("condition", "expected i, ii, iii or all");
}

json reflectionless_summary(const ReflectionlessReport& r) {
    return {{"condition", to_string(r.which)}, {"threshold", r.threshold},   {"passed", r.passed},
            {"pass_i", r.pass_i},              {"pass_ii", r.pass_ii},       {"pass_iii", r.pass_iii},
            {"max_i", r.max_i},                {"max_ii", r.max_ii},         {"max_iii", r.max_iii},
            {"split_outcomes", r.split_outcomes}, {"valid_points", r.valid_points},
            {"max_re_defect", r.max_re_defect}, {"max_im_defect", r.max_im_defect}};
}

int cmd_reflectionless(RunConfig& c) {
    const auto Q = load(c);
    if (!Q.is_periodic()) throw ConfigError("potential", "reflectionless needs a periodic or constant potential");
    const auto [lo, hi] = default_range(c, Q);
    const auto bs = band_spectrum(Q, lo, hi, std::max(c.grid, 100), 0.0, floquet_options(c));
    const auto grid = reflectionless_grid(bs, c.per_band);
    const auto r = check_reflectionless(Q, c.x0, grid, bs, parse_condition(c.condition), c.threshold, floquet_options(c));
    Table t;
    t.columns = {"lambda", "mu", "valid", "dev_i", "dev_ii", "dev_iii", "pass_i", "pass_ii", "pass_iii",
                 "re_defect", "im_defect"};
    for (const auto& p : r.points)
        t.rows.push_back({num(p.lambda), std::to_string(p.mu), p.valid ? "1" : "0", num(p.dev_i), num(p.dev_ii),
                          num(p.dev_iii), p.pass_i ? "1" : "0", p.pass_ii ? "1" : "0", p.pass_iii ? "1" : "0",
                          num(p.re_defect), num(p.im_defect)});
    t.summary = reflectionless_summary(r);
    write_table(c, t);
    if (r.split_outcomes > 0) std::cerr << "warning: " << r.split_outcomes << " split outcomes\n";
    return 0;
}

int cmd_borg(RunConfig& c) {
    const auto Q = load(c);
    if (std::isnan(c.cutoff)) throw ConfigError("cutoff", "missing");
    std::vector<double> xs = c.xs;
    if (xs.empty()) {
        const double w = Q.is_periodic() ? Q.floquet_period() : 1.0;
        xs = {0.0, 0.25 * w, 0.5 * w, 0.75 * w};
    }
    BorgOptions o;
    o.thresholds = {c.threshold, c.reconstruction_threshold};
    o.per_band = c.per_band;
    o.floquet = floquet_options(c);
    o.trace = trace_options(c);
    const auto v = borg_verify(Q, c.cutoff, xs, o);
    json recon = json::array();
    for (const auto& r : v.reconstruction)
        recon.push_back({{"x", r.x},
                         {"value", matrix_json(r.value)},
                         {"residual", r.residual},
                         {"tail_violation", r.tail_violation},
                         {"tail_defect", r.tail_defect}});
    json gaps = json::array();
    for (const auto& [a, b] : v.gaps) gaps.push_back({a, b});
    write_json(c, {{"verdict", to_string(v.verdict)},
                   {"reason", v.reason},
                   {"E0", v.E0},
                   {"cutoff", v.cutoff},
                   {"gaps", gaps},
                   {"uniform_multiplicity", v.uniform_multiplicity},
                   {"potential_deviation", v.potential_deviation},
                   {"reconstruction_deviation", v.reconstruction_deviation},
                   {"thresholds", {{"condition", c.threshold}, {"reconstruction", c.reconstruction_threshold}}},
                   {"reflectionless", reflectionless_summary(v.reflectionless)},
                   {"reconstruction", recon},
                   {"spectrum", band_summary(v.spectrum)}});
    return 0;
}

int cmd_selftest(RunConfig& c) {
    namespace acc = weylspec::acceptance;
    json results = json::array();
    int passed = 0;
    acc::run_all([&](const acc::CriterionResult& r) {
        std::cout << acc::format_line(r) << std::endl;
        passed += r.passed;
        results.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    });
    const bool ok = passed == acc::criterion_count();
    if (!c.out_path.empty()) write_json(c, {{"passed", ok}, {"criteria", results}});
    std::cout << passed << "/" << acc::criterion_count() << " acceptance criteria passed" << std::endl;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weyl-Titchmarsh spectral toolkit for matrix Schrodinger operators"};
    app.require_subcommand(1);
    RunConfig c;

    auto common = [&](CLI::App* sub, bool needs_potential = true) {
        if (needs_potential) sub->add_option("--potential", c.potential_path, "Potential config (JSON)");
        sub->add_option("--config", c.config_path, "Run config (JSON); command-line flags take precedence");
        sub->add_option("--out", c.out_path, "Output path (stdout if omitted)");
        sub->add_option("--format", c.format, "csv or json (default from the output extension)");
        sub->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
        sub->add_option("--rtol", c.rtol, "Integrator relative tolerance");
        sub->add_option("--atol", c.atol, "Integrator absolute tolerance");
        sub->add_option("--unit-tol", c.unit_tol, "|ln|rho|| threshold for unit-modulus multipliers");
        sub->add_option("--edge-tol", c.edge_tol, "Band-edge bisection tolerance");
    };

    auto* bands = app.add_subcommand("bands", "Floquet band scan: lambda, mu(lambda), band_id");
    common(bands);
    bands->add_option("--range", c.range, "lambda_min lambda_max")->expected(2);
    bands->add_option("--grid", c.grid, "Number of scan points");
    bands->add_option("--x0", c.x0, "Base point of the monodromy");

    auto* weyl = app.add_subcommand("weyl", "Half-line Weyl matrices M_+-(z, x0)");
    common(weyl);
    weyl->add_option("--z", c.zs, "Spectral parameter RE IM (repeatable)")->expected(1, -1);
    weyl->add_option("--x0", c.x0, "Reference point");
    weyl->add_option("--side", c.side, "plus, minus or both");
    weyl->add_option("--method", c.method, "auto, disk or floquet");
    weyl->add_option("--weyl-tol", c.weyl_tol, "Weyl disk Cauchy tolerance");

    auto* green = app.add_subcommand("green", "Diagonal Green's matrix G(z, x, x)");
    common(green);
    green->add_option("--z", c.zs, "Spectral parameter RE IM (repeatable)")->expected(1, -1);
    green->add_option("--x", c.xs, "Position x");
    green->add_option("--method", c.method, "auto, disk or floquet");
    green->add_option("--weyl-tol", c.weyl_tol, "Weyl disk Cauchy tolerance");

    auto* xi = app.add_subcommand("xi", "Xi(lambda, x) on a lambda grid");
    common(xi);
    xi->add_option("--x", c.xs, "Position x");
    xi->add_option("--lambda-grid", c.lambda_grid, "auto or min,max,count");
    xi->add_option("--range", c.range, "lambda range for --lambda-grid auto")->expected(2);

    auto* measure = app.add_subcommand("measure", "Spectral measure of an interval by Stieltjes inversion");
    common(measure);
    measure->add_option("--interval", c.interval, "lambda1 lambda2 (half-open (lambda1, lambda2])")->expected(2);
    measure->add_option("--grid", c.measure_grid, "Quadrature points");
    measure->add_option("--which", c.which, "green (m x m) or block (2m x 2m)");
    measure->add_option("--x0", c.x0, "Reference point");
    measure->add_option("--method", c.method, "auto, disk or floquet");

    auto* trace = app.add_subcommand("trace", "Trace-formula reconstruction of Q(x) or higher invariants");
    common(trace);
    trace->add_option("--x", c.xs, "Positions x")->expected(1, -1);
    trace->add_option("--cutoff", c.cutoff, "Upper energy of the lambda integral");
    trace->add_option("--order", c.order, "1 reconstructs Q, k > 1 gives R_k");
    trace->add_option("--quad-tol", c.quad_tol, "Absolute tolerance of the lambda quadrature");
    trace->add_option("--y-schedule", c.y_schedule, "Increasing y values for extrapolation")->expected(1, -1);

    auto* refl = app.add_subcommand("reflectionless", "Reflectionless conditions on a band-interior grid");
    common(refl);
    refl->add_option("--range", c.range, "Band scan range")->expected(2);
    refl->add_option("--grid", c.grid, "Band scan points");
    refl->add_option("--x0", c.x0, "Reference point");
    refl->add_option("--per-band", c.per_band, "Grid points per band");
    refl->add_option("--threshold", c.threshold, "Pass threshold for each deviation");
    refl->add_option("--condition", c.condition, "i, ii, iii or all");

    auto* borg = app.add_subcommand("borg", "Borg-type verdict: spectrum, reflectionless test, reconstruction");
    common(borg);
    borg->add_option("--cutoff", c.cutoff, "Scan and integration cutoff");
    borg->add_option("--x", c.xs, "Reconstruction points")->expected(1, -1);
    borg->add_option("--per-band", c.per_band, "Reflectionless grid points per band");
    borg->add_option("--threshold", c.threshold, "Reflectionless pass threshold");
    borg->add_option("--reconstruction-threshold", c.reconstruction_threshold, "Reconstruction pass threshold");
    borg->add_option("--quad-tol", c.quad_tol, "Absolute tolerance of the lambda quadrature");

    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
    common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    c.command = sub->get_name();
    try {
        apply_run_config(c, *sub);
        validate(c);
        set_worker_count(c.workers);
        if (c.command == "bands") return cmd_bands(c);
        if (c.command == "weyl") return cmd_weyl(c);
        if (c.command == "green") return cmd_green(c);
        if (c.command == "xi") return cmd_xi(c);
        if (c.command == "measure") return cmd_measure(c);
        if (c.command == "trace") return cmd_trace(c);
        if (c.command == "reflectionless") return cmd_reflectionless(c);
        if (c.command == "borg") return cmd_borg(c);
        return cmd_selftest(c);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: computation failed: " << e.what() << "\n";
        return 1;
    }
}
