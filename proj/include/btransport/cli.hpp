#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "cantor.hpp"
#include "lattice.hpp"
#include "montecarlo.hpp"
#include "pipeline.hpp"
#include "solver.hpp"

namespace btransport::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kBadInput = 2 };

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> params;
    int verbosity = 0;
};

/// Keys each command accepts. Anything else is rejected before work starts.
inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"solve", {"mu0", "mu1", "n", "out_dir", "max_steps"}},
        {"pipeline", {"t0", "r", "depth", "R", "n", "out_dir", "svg"}},
        {"verify", {"seed", "paths", "lattice_paths", "threads", "instances"}},
        {"cantor", {"t0", "r", "depth", "seed", "samples", "out_dir"}},
        {"convergence", {"t0", "r", "depth", "R", "n", "levels", "seed", "paths", "threads", "out_dir"}},
    };
    return keys;
}

/// Splits "key=value"; throws on a missing '=' or an empty key.
inline std::pair<std::string, std::string> split_kv(const std::string& token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw PreconditionError("expected key=value, got '" + token + "'");
    return {token.substr(0, eq), token.substr(eq + 1)};
}

/// Reads key=value lines; blank lines and lines starting with '#' are skipped.
inline std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw PreconditionError("cannot read config file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(is, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        auto [k, v] = split_kv(line.substr(first, last - first + 1));
        out[k] = v;
    }
    return out;
}

/// Builds a RunConfig: file values first, command-line tokens override them.
inline RunConfig make_config(const std::string& command, const std::vector<std::string>& tokens,
                             const std::string& config_file = {}, int verbosity = 0) {
    RunConfig cfg;
    cfg.command = command;
    cfg.verbosity = verbosity;
    if (!allowed_keys().count(command)) throw PreconditionError("unknown command '" + command + "'");
    if (!config_file.empty()) cfg.params = read_config_file(config_file);
    for (const auto& t : tokens) {
        auto [k, v] = split_kv(t);
        cfg.params[k] = v;
    }
    const auto& allowed = allowed_keys().at(command);
    for (const auto& [k, v] : cfg.params) {
        if (!allowed.count(k)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw PreconditionError("unknown key '" + k + "' for " + command + " (accepted: " + list + ")");
        }
    }
    return cfg;
}

namespace detail {

inline double get_double(const RunConfig& c, const std::string& key, double fallback) {
    const auto it = c.params.find(key);
    if (it == c.params.end()) return fallback;
    const std::string& s = it->second;
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw PreconditionError(key + " = '" + s + "' is not a finite number");
    return v;
}

inline long long get_int(const RunConfig& c, const std::string& key, long long fallback, long long lo, long long hi) {
    const auto it = c.params.find(key);
    if (it == c.params.end()) return fallback;
    const std::string& s = it->second;
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw PreconditionError(key + " = '" + s + "' is not an integer");
    if (v < lo || v > hi) {
        std::ostringstream msg;
        msg << key << " = " << v << " must lie in [" << lo << ", " << hi << "]";
        throw PreconditionError(msg.str());
    }
    return v;
}

inline bool get_bool(const RunConfig& c, const std::string& key, bool fallback) {
    const auto it = c.params.find(key);
    if (it == c.params.end()) return fallback;
    if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
    if (it->second == "0" || it->second == "false" || it->second == "no") return false;
    throw PreconditionError(key + " = '" + it->second + "' is not a boolean");
}

/// out_dir key, else $BTRANSPORT_OUT_DIR, else ./out.
inline std::filesystem::path out_dir(const RunConfig& c) {
    if (const auto it = c.params.find("out_dir"); it != c.params.end()) return it->second;
    if (const char* env = std::getenv("BTRANSPORT_OUT_DIR"); env && *env) return env;
    return "out";
}

inline CantelliConfig cantelli_config(const RunConfig& c) {
    CantelliConfig cfg;
    cfg.t0 = get_double(c, "t0", cfg.t0);
    if (c.params.count("r")) cfg.cantor_radius = get_double(c, "r", 0.0);
    cfg.cantor_depth = static_cast<int>(get_int(c, "depth", cfg.cantor_depth, 0, 24));
    cfg.truncation_R = get_double(c, "R", cfg.truncation_R);
    cfg.mesh_n = static_cast<int>(get_int(c, "n", cfg.mesh_n, 16, 1 << 14));
    cfg.validate();
    return cfg;
}

inline LatticeMeasure load_lattice(const std::string& path, int mesh) {
    std::ifstream is(path);
    if (!is) throw PreconditionError("cannot read " + path);
    return read_lattice_csv(is, mesh);
}

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw PreconditionError("cannot write " + (dir / name).string());
    os.precision(17);
    return os;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
    if (!c.params.count("mu0") || !c.params.count("mu1")) throw PreconditionError("solve needs mu0=<csv> and mu1=<csv>");
    const int mesh = static_cast<int>(get_int(c, "n", 0, 0, 1 << 20));
    const auto a = load_lattice(c.params.at("mu0"), mesh);
    const auto b = load_lattice(c.params.at("mu1"), mesh);
    SolveOptions opt;
    opt.max_steps = get_int(c, "max_steps", 0, 0, std::numeric_limits<long>::max());
    const auto dir = out_dir(c);
    const auto sol = solve(a, b, opt);
    {
        auto os = open_out(dir, "solution.csv");
        write_solution_csv(os, sol);
    }
    const auto et = expected_time_check(sol, a, b);
    const auto& d = sol.diagnostics;
    out.precision(17);
    out << "steps=" << d.steps << '\n'
        << "E_T=" << et.expected_time << '\n'
        << "variance_gap=" << et.variance_gap << '\n'
        << "E_T_error=" << et.error << '\n'
        << "max_target_error=" << d.max_target_error << '\n'
        << "coincidence_violations=" << d.coincidence_violations << '\n'
        << "output=" << (dir / "solution.csv").string() << '\n';
    const bool ok = et.pass(1e-8) && d.max_target_error <= 1e-9 && d.coincidence_violations == 0;
    out << "status=" << (ok ? "pass" : "fail") << '\n';
    return ok ? kOk : kCheckFailed;
}

inline int cmd_pipeline(const RunConfig& c, std::ostream& out) {
    const auto cfg = cantelli_config(c);
    const bool svg = get_bool(c, "svg", true);
    const auto dir = out_dir(c);
    const auto res = run_pipeline(cfg);
    write_bundle(res, dir, svg);
    const auto& d = res.solution.diagnostics;
    const auto& et = res.diagnostics.expected_time;
    out.precision(17);
    out << "t0=" << cfg.t0 << '\n'
        << "r=" << cfg.radius() << '\n'
        << "c=" << res.c << '\n'
        << "C=" << res.C << '\n'
        << "steps=" << d.steps << '\n'
        << "E_T=" << et.expected_time << '\n'
        << "E_T_error=" << et.error << '\n'
        << "max_target_error=" << d.max_target_error << '\n'
        << "coincidence_violations=" << d.coincidence_violations << '\n'
        << "out_dir=" << dir.string() << '\n';
    const bool ok = et.pass(1e-8) && d.max_target_error <= 1e-9 && d.coincidence_violations == 0;
    out << "status=" << (ok ? "pass" : "fail") << '\n';
    return ok ? kOk : kCheckFailed;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
    acceptance::Options o;
    o.seed = static_cast<std::uint64_t>(get_int(c, "seed", 42, 0, std::numeric_limits<long long>::max()));
    o.paths = static_cast<std::size_t>(get_int(c, "paths", 1000000, 1000, 1LL << 32));
    o.lattice_paths = static_cast<std::size_t>(get_int(c, "lattice_paths", static_cast<long long>(o.paths), 1000, 1LL << 32));
    o.threads = static_cast<unsigned>(get_int(c, "threads", 0, 0, 1024));
    o.random_instances = static_cast<int>(get_int(c, "instances", 100, 1, 100000));
    o.supplementary = c.verbosity > 0;
    const auto s = acceptance::run(o, out);
    return s.all_pass() ? kOk : kCheckFailed;
}

inline int cmd_cantor(const RunConfig& c, std::ostream& out) {
    CantelliConfig cfg;
    cfg.t0 = get_double(c, "t0", cfg.t0);
    if (c.params.count("r")) cfg.cantor_radius = get_double(c, "r", 0.0);
    cfg.cantor_depth = static_cast<int>(get_int(c, "depth", cfg.cantor_depth, 0, 24));
    cfg.validate();
    const auto seed = static_cast<std::uint64_t>(get_int(c, "seed", 42, 0, std::numeric_limits<long long>::max()));
    const int samples = static_cast<int>(get_int(c, "samples", 10000, 1, 100000000));
    const auto K = build_cantor({-cfg.radius(), cfg.radius()}, cfg.cantor_depth);
    const auto dir = out_dir(c);
    {
        auto os = open_out(dir, "cantor.csv");
        write_cantor_csv(os, K);
    }
    const auto g = cantor_gap_constants(K, samples, seed);
    out.precision(17);
    out << "depth=" << cfg.cantor_depth << '\n'
        << "r=" << cfg.radius() << '\n'
        << "intervals=" << K.unit_intervals().size() << '\n'
        << "unit_length=" << K.unit_length().str() << '\n'
        << "length=" << K.total_length() << '\n'
        << "alpha_quadratic=" << g.alpha_quadratic << '\n'
        << "alpha_exp=" << g.alpha_exp << '\n'
        << "min_sample_length=" << g.min_length << '\n'
        << "output=" << (dir / "cantor.csv").string() << '\n';
    return g.alpha_quadratic > 0.0 ? kOk : kCheckFailed;
}

/// n, 2n, 4n, ...: f1 differences on shared nodes, E T, and the KS distance of
/// X + phi(X) Y to N(0, C).
inline int cmd_convergence(const RunConfig& c, std::ostream& out) {
    const auto base = cantelli_config(c);
    const int levels = static_cast<int>(get_int(c, "levels", 3, 2, 6));
    if (static_cast<long long>(base.mesh_n) << (levels - 1) > (1 << 14))
        throw PreconditionError("n * 2^(levels-1) must not exceed 16384");
    PathSimConfig pc;
    pc.num_paths = static_cast<std::size_t>(get_int(c, "paths", 100000, 1000, 1LL << 32));
    pc.seed = static_cast<std::uint64_t>(get_int(c, "seed", 42, 0, std::numeric_limits<long long>::max()));
    pc.threads = static_cast<unsigned>(get_int(c, "threads", 0, 0, 1024));
    const auto dir = out_dir(c);

    std::vector<CantelliResult> runs;
    auto os = open_out(dir, "convergence.csv");
    os << "n,steps,E_T,C,ks,f1_sup_diff_to_previous\n";
    out.precision(10);
    bool ok = true;
    for (int l = 0; l < levels; ++l) {
        CantelliConfig cfg = base;
        cfg.mesh_n = base.mesh_n << l;
        runs.push_back(run_pipeline(cfg));
        const auto& r = runs.back();
        const double ks = simulate_counterexample(r, pc).ks();
        const double diff = l > 0 ? sup_distance_on_nodes(runs[runs.size() - 2].f1_grid, r.f1_grid)
                                  : std::numeric_limits<double>::quiet_NaN();
        ok = ok && r.diagnostics.expected_time.pass(1e-8);
        os << cfg.mesh_n << ',' << r.solution.diagnostics.steps << ',' << r.solution.expected_time << ',' << r.C << ','
           << ks << ',' << diff << '\n';
        out << "n=" << cfg.mesh_n << " steps=" << r.solution.diagnostics.steps << " E_T=" << r.solution.expected_time
            << " ks=" << ks;
        if (l > 0) out << " f1_sup_diff=" << diff;
        out << '\n';
    }
    out << "output=" << (dir / "convergence.csv").string() << '\n';
    return ok ? kOk : kCheckFailed;
}

}  // namespace detail

/// Dispatches a parsed config. Library errors map to exit code 2 for bad
/// input and 1 for failed checks; diagnostics go to err.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (cfg.command == "solve") return detail::cmd_solve(cfg, out);
        if (cfg.command == "pipeline") return detail::cmd_pipeline(cfg, out);
        if (cfg.command == "verify") return detail::cmd_verify(cfg, out);
        if (cfg.command == "cantor") return detail::cmd_cantor(cfg, out);
        if (cfg.command == "convergence") return detail::cmd_convergence(cfg, out);
        err << "error: unknown command '" << cfg.command << "'\n";
        return kBadInput;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::exception& e) {
        err << "check failed: " << e.what() << '\n';
        return kCheckFailed;
    }
}

}  // namespace btransport::cli
