// polymag: moments of time-inhomogeneous polynomial processes from the command line.
//
// Exit codes: 0 success, 1 internal error, 2 spec or usage error,
// 3 numerical failure (including DegreeOverflow), 4 validate verdict failure.

#include "polymag/builtins.hpp"
#include "polymag/errors.hpp"
#include "polymag/expression.hpp"
#include "polymag/generator.hpp"
#include "polymag/linalg.hpp"
#include "polymag/magnus.hpp"
#include "polymag/mc.hpp"
#include "polymag/spec_document.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace {

using json = nlohmann::ordered_json;
using namespace polymag;

constexpr int kExitInternal = 1;
constexpr int kExitSpec = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerdict = 4;

struct Source {
    std::string spec_file;
    std::string builtin_name;
    std::vector<std::string> params;
    std::string format = "json";
};

struct Loaded {
    ProcessSpec spec;
    std::string label;
    BuiltinParams params;
    bool is_builtin = false;
};

struct TimeArgs {
    double s = 0.0;
    std::optional<double> t;
};

struct SolverArgs {
    std::string method = "auto";
    double tol = 1e-10;
    int min_subintervals = 1;
    bool no_residual = false;
};

Loaded load(const Source& src) {
    if (src.spec_file.empty() == src.builtin_name.empty()) throw SpecError("give exactly one of --spec or --builtin");
    Loaded out;
    for (const auto& kv : src.params) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw SpecError("--param expects key=value, got '" + kv + "'");
        out.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!src.builtin_name.empty()) {
        out.spec = builtin(src.builtin_name, out.params);
        out.label = src.builtin_name;
        out.is_builtin = true;
    } else {
        if (!out.params.empty()) throw SpecError("--param only applies to --builtin");
        out.spec = load_spec_file(src.spec_file);
        out.label = src.spec_file;
    }
    return out;
}

std::vector<double> parse_state(const std::string& text, const Loaded& l) {
    if (text.empty()) {
        return l.is_builtin ? builtin_initial_state(l.label, l.params) : std::vector<double>(l.spec.d, 0.0);
    }
    std::vector<double> x;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) x.push_back(parse_constant(item));
    if (x.size() != l.spec.d) {
        throw SpecError("--x needs " + std::to_string(l.spec.d) + " comma-separated values, got " + std::to_string(x.size()));
    }
    return x;
}

MultiIndex parse_k(const std::string& text, std::size_t d) {
    MultiIndex k;
    try {
        k = MultiIndex::parse(text);
    } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("--k: ") + e.what());
    }
    if (k.size() != d) throw SpecError("--k needs " + std::to_string(d) + " comma-separated exponents");
    return k;
}

TransitionOptions options(const SolverArgs& a) {
    TransitionOptions o;
    o.method = parse_method(a.method);
    o.quadrature.rtol = a.tol;
    o.min_subintervals = a.min_subintervals;
    o.compute_residual = !a.no_residual;
    return o;
}

double end_time(const TimeArgs& ta, const ProcessSpec& spec) { return ta.t.value_or(spec.horizon); }

json matrix_json(const Eigen::MatrixXd& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        // + 0.0 turns -0.0 into 0.0
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j) + 0.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

json basis_json(const MonomialBasis& b) {
    json out = json::array();
    for (const auto& k : b.order()) out.push_back(k.to_string());
    return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json source_json(const Loaded& l) {
    json j;
    j[l.is_builtin ? "builtin" : "spec"] = l.label;
    if (!l.params.empty()) j["params"] = l.params;
    return j;
}

json transition_diagnostics(const TransitionResult& r) {
    json d;
    d["method"] = to_string(r.method);
    d["subintervals"] = r.subintervals;
    d["norm_integral"] = r.norm_integral;
    d["residual"] = number_or_null(r.residual);
    if (r.error_estimate) d["error_estimate"] = *r.error_estimate;
    return d;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

void emit(json record, const std::string& format, std::chrono::steady_clock::time_point start) {
    record["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (format == "csv") {
        std::vector<std::pair<std::string, std::string>> cells;
        flatten(record, "", cells);
        std::string header;
        std::string row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            header += (i ? "," : "") + csv_field(cells[i].first);
            row += (i ? "," : "") + csv_field(cells[i].second);
        }
        std::cout << header << "\n" << row << "\n";
    } else {
        std::cout << record.dump() << "\n";
    }
}

json record(const std::string& command, json inputs) {
    json r;
    r["command"] = command;
    r["inputs"] = std::move(inputs);
    r["result"] = json::object();
    r["diagnostics"] = json::object();
    return r;
}

void add_source_options(CLI::App* cmd, Source& src) {
    cmd->add_option("--spec", src.spec_file, "process document file");
    cmd->add_option("--builtin", src.builtin_name, "built-in process name (see `polymag list`)");
    cmd->add_option("--param", src.params, "builtin parameter key=value (repeatable)");
    cmd->add_option("--format", src.format, "output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_time_options(CLI::App* cmd, TimeArgs& ta) {
    cmd->add_option("--s", ta.s, "start time (default 0)");
    cmd->add_option("--t", ta.t, "end time (default T)");
}

void add_solver_options(CLI::App* cmd, SolverArgs& sa) {
    cmd->add_option("--method", sa.method, "auto, exact, magnus3 or ode")->check(CLI::IsMember({"auto", "exact", "magnus3", "ode"}));
    cmd->add_option("--tol", sa.tol, "relative tolerance of the iterated-integral quadrature");
    cmd->add_option("--min-subintervals", sa.min_subintervals, "lower bound on Magnus subintervals");
    cmd->add_flag("--no-residual", sa.no_residual, "skip the forward-equation residual");
}

struct ValidateArgs {
    std::string x;
    int kmax = 2;
    std::size_t paths = 100000;
    int steps = 500;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

int run_validate(const Source& src, const TimeArgs& ta, const ValidateArgs& va, std::chrono::steady_clock::time_point start) {
    const Loaded l = load(src);
    const ProcessSpec& spec = l.spec;
    const double s = ta.s;
    const double t = end_time(ta, spec);
    const std::vector<double> x = parse_state(va.x, l);
    if (va.kmax < 1 || va.kmax > spec.m) throw SpecError("--kmax must lie in [1, m]");
    if (!(s < t)) throw SpecError("validate needs s < t");

    json inputs = source_json(l);
    inputs["s"] = s;
    inputs["t"] = t;
    inputs["x"] = x;
    inputs["kmax"] = va.kmax;
    inputs["paths"] = va.paths;
    inputs["steps"] = va.steps;
    inputs["seed"] = va.seed;
    json rec = record("validate", inputs);
    bool all_pass = true;

    SimConfig cfg;
    cfg.n_paths = va.paths;
    cfg.n_steps = va.steps;
    cfg.seed = va.seed;
    cfg.threads = va.threads;
    cfg.scheme = spec.state_space.bounded() ? Scheme::EulerProjected : Scheme::Euler;
    const SampleSet samples = simulate_paths(spec, s, t, x, cfg);

    TransitionOptions base;
    base.compute_residual = false;
    json moments = json::array();
    for (std::size_t idx = 1; idx < enumerate_basis(spec.d, va.kmax)->size(); ++idx) {
        const MultiIndex k = (*enumerate_basis(spec.d, va.kmax))[idx];
        TransitionOptions o = base;
        const double matrix = moment(spec, s, t, x, k, o);
        o.method = Method::Magnus3;
        const double magnus = moment(spec, s, t, x, k, o);
        o.method = Method::Ode;
        const double ode = moment(spec, s, t, x, k, o);
        const MomentEstimate mc = moment_from_samples(samples, k);
        const bool solvers_agree = std::abs(magnus - ode) <= 1e-5 * std::max(1.0, std::abs(ode));
        const bool mc_agrees = std::abs(matrix - mc.mean) <= 4.0 * mc.std_error + 0.01;
        all_pass = all_pass && solvers_agree && mc_agrees;
        moments.push_back({{"k", k.to_string()},
                           {"matrix", matrix},
                           {"magnus3", magnus},
                           {"ode", ode},
                           {"mc_mean", mc.mean},
                           {"mc_std_error", mc.std_error},
                           {"magnus3_vs_ode", solvers_agree ? "pass" : "fail"},
                           {"matrix_vs_mc", mc_agrees ? "pass" : "fail"}});
    }
    rec["result"]["moments"] = moments;

    // Invariant suite on (s, midpoint, t) and on the whole horizon.
    const GeneratorFamily family(spec, va.kmax);
    json invariants = json::array();
    for (const auto& [r0, r1, r2] : {std::tuple{s, 0.5 * (s + t), t}, std::tuple{0.0, 0.25 * spec.horizon, spec.horizon}}) {
        const EvolutionCheck c = check_evolution(family, r0, r1, r2, base);
        all_pass = all_pass && c.pass();
        invariants.push_back({{"r", r0},
                              {"s", r1},
                              {"t", r2},
                              {"identity", c.identity},
                              {"composition", c.composition},
                              {"constant", c.constant},
                              {"block", c.block},
                              {"forward_defect", c.defects.forward},
                              {"backward_defect", c.defects.backward},
                              {"verdict", c.pass() ? "pass" : "fail"}});
    }
    rec["result"]["invariants"] = invariants;

    if (spec.state_space.bounded()) {
        bool inside = true;
        for (std::size_t p = 0; p < samples.size(); ++p) inside = inside && spec.state_space.contains(samples.path(p));
        all_pass = all_pass && inside;
        rec["result"]["state_space_preserved"] = inside ? "pass" : "fail";
    }
    if (spec.jump_sampler) {
        // The starting point alone can be degenerate (x = 0 kills the
        // log-uniform kernels), so interior states are probed as well.
        std::vector<std::vector<double>> states{x};
        const StateSpace& ss = spec.state_space;
        for (int i = 0; i < 4; ++i) {
            std::vector<double> y(spec.d);
            for (double& v : y) v = ss.bounded() ? ss.lower + (i + 0.5) / 4.0 * (ss.upper - ss.lower) : x[0] + 0.5 * (i - 1.5);
            if (ss.contains(y)) states.push_back(y);
        }
        bool consistent = true;
        for (const auto& y : states) {
            consistent = consistent && kernel_consistency_check(spec.jump_sampler.get(), spec, s, y, 100000, va.seed).consistent;
        }
        all_pass = all_pass && consistent;
        rec["result"]["kernel_consistency"] = consistent ? "pass" : "fail";
    }
    rec["result"]["verdict"] = all_pass ? "pass" : "fail";
    rec["diagnostics"]["scheme"] = to_string(cfg.scheme);
    rec["diagnostics"]["threads"] = resolve_threads(cfg.threads);
    rec["diagnostics"]["mc_seconds"] = samples.seconds;
    emit(rec, src.format, start);
    return all_pass ? 0 : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
    const auto start = std::chrono::steady_clock::now();
    CLI::App app{"Moments of time-inhomogeneous polynomial processes"};
    app.require_subcommand(1);

    Source src;
    TimeArgs ta;
    SolverArgs sa;
    std::string x_text;
    std::string k_text;
    int degree = 2;

    auto* moment_cmd = app.add_subcommand("moment", "E[X_t^k | X_s = x]");
    add_source_options(moment_cmd, src);
    add_time_options(moment_cmd, ta);
    add_solver_options(moment_cmd, sa);
    moment_cmd->add_option("--x", x_text, "starting state, comma separated");
    moment_cmd->add_option("--k", k_text, "moment multi-index, comma separated")->required();

    double matrix_t = 0.0;
    auto* matrix_cmd = app.add_subcommand("matrix", "generator matrix H_t on the degree-<= k basis");
    add_source_options(matrix_cmd, src);
    matrix_cmd->add_option("--t", matrix_t, "time (default 0)");
    matrix_cmd->add_option("--k", degree, "basis degree (default 2)");

    auto* transition_cmd = app.add_subcommand("transition", "transition matrix P_{s,t}");
    add_source_options(transition_cmd, src);
    add_time_options(transition_cmd, ta);
    add_solver_options(transition_cmd, sa);
    transition_cmd->add_option("--k", degree, "basis degree (default 2)");

    auto* magnus_cmd = app.add_subcommand("magnus", "Magnus terms Omega_1..Omega_3 on [s, t]");
    add_source_options(magnus_cmd, src);
    add_time_options(magnus_cmd, ta);
    magnus_cmd->add_option("--k", degree, "basis degree (default 2)");
    magnus_cmd->add_option("--tol", sa.tol, "relative quadrature tolerance");

    auto* norm_cmd = app.add_subcommand("normcheck", "int_s^t ||H_u||_2 du and the pi gate");
    add_source_options(norm_cmd, src);
    add_time_options(norm_cmd, ta);
    norm_cmd->add_option("--k", degree, "basis degree (default 2)");

    std::vector<std::string> k_list;
    SimConfig sim;
    std::string scheme;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo moment estimates");
    add_source_options(sim_cmd, src);
    add_time_options(sim_cmd, ta);
    sim_cmd->add_option("--x", x_text, "starting state, comma separated");
    sim_cmd->add_option("--k", k_list, "moment multi-index (repeatable; default: each coordinate)");
    sim_cmd->add_option("--paths", sim.n_paths, "number of paths (default 100000)");
    sim_cmd->add_option("--steps", sim.n_steps, "Euler steps (default 500)");
    sim_cmd->add_option("--seed", sim.seed, "random seed (default 0)");
    sim_cmd->add_option("--threads", sim.threads, "worker threads (default POLYMAG_THREADS or all cores)");
    sim_cmd->add_option("--scheme", scheme, "euler or euler-projected (default: projected on bounded state spaces)")
        ->check(CLI::IsMember({"euler", "euler-projected"}));

    ValidateArgs va;
    auto* validate_cmd = app.add_subcommand("validate", "cross-check matrix, ODE and Monte Carlo moments and invariants");
    add_source_options(validate_cmd, src);
    add_time_options(validate_cmd, ta);
    validate_cmd->add_option("--x", va.x, "starting state, comma separated");
    validate_cmd->add_option("--kmax", va.kmax, "largest moment degree (default 2)");
    validate_cmd->add_option("--paths", va.paths, "Monte Carlo paths (default 100000)");
    validate_cmd->add_option("--steps", va.steps, "Euler steps (default 500)");
    validate_cmd->add_option("--seed", va.seed, "random seed (default 0)");
    validate_cmd->add_option("--threads", va.threads, "worker threads");

    std::string list_format = "json";
    auto* list_cmd = app.add_subcommand("list", "built-in processes and their parameters");
    list_cmd->add_option("--format", list_format)->check(CLI::IsMember({"json", "csv"}));

    auto* show_cmd = app.add_subcommand("show", "print a process in the document format");
    add_source_options(show_cmd, src);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitSpec;
    }

    try {
        if (*moment_cmd) {
            const Loaded l = load(src);
            const double t = end_time(ta, l.spec);
            const std::vector<double> x = parse_state(x_text, l);
            const MultiIndex k = parse_k(k_text, l.spec.d);
            const MomentResult r = moment_detailed(l.spec, ta.s, t, x, k, options(sa));
            json inputs = source_json(l);
            inputs.update({{"s", ta.s}, {"t", t}, {"x", x}, {"k", k.to_string()}, {"method", sa.method}});
            json rec = record("moment", inputs);
            rec["result"]["value"] = r.value;
            rec["result"]["inside_state_space"] = r.inside_state_space;
            rec["diagnostics"] = transition_diagnostics(r.transition);
            if (!r.inside_state_space) std::cerr << "polymag: warning: x lies outside the declared state space\n";
            emit(rec, src.format, start);
        } else if (*matrix_cmd) {
            const Loaded l = load(src);
            const GeneratorMatrix h = generator_matrix(l.spec, matrix_t, degree);
            json inputs = source_json(l);
            inputs.update({{"t", matrix_t}, {"k", degree}});
            json rec = record("matrix", inputs);
            rec["result"]["basis"] = basis_json(*h.basis);
            rec["result"]["matrix"] = matrix_json(h.entries);
            rec["diagnostics"]["spectral_norm"] = spectral_norm(h.entries);
            emit(rec, src.format, start);
        } else if (*transition_cmd) {
            const Loaded l = load(src);
            const double t = end_time(ta, l.spec);
            const TransitionResult r = transition_matrix(l.spec, ta.s, t, degree, options(sa));
            json inputs = source_json(l);
            inputs.update({{"s", ta.s}, {"t", t}, {"k", degree}, {"method", sa.method}});
            json rec = record("transition", inputs);
            rec["result"]["basis"] = basis_json(*r.basis);
            rec["result"]["matrix"] = matrix_json(r.matrix);
            rec["diagnostics"] = transition_diagnostics(r);
            emit(rec, src.format, start);
        } else if (*magnus_cmd) {
            const Loaded l = load(src);
            const double t = end_time(ta, l.spec);
            QuadratureConfig q;
            q.rtol = sa.tol;
            const GeneratorFamily family(l.spec, degree);
            const MagnusTerms m = magnus_terms(family, ta.s, t, q);
            const double integral = norm_integral(family, ta.s, t, q);
            json inputs = source_json(l);
            inputs.update({{"s", ta.s}, {"t", t}, {"k", degree}});
            json rec = record("magnus", inputs);
            rec["result"]["basis"] = basis_json(*family.basis());
            rec["result"]["omega1"] = matrix_json(m.omega1);
            rec["result"]["omega2"] = matrix_json(m.omega2);
            rec["result"]["omega3"] = matrix_json(m.omega3);
            rec["diagnostics"]["norm_integral"] = integral;
            rec["diagnostics"]["pi_gate"] = integral < std::numbers::pi ? "pass" : "fail";
            emit(rec, src.format, start);
        } else if (*norm_cmd) {
            const Loaded l = load(src);
            const double t = end_time(ta, l.spec);
            const double integral = norm_integral(l.spec, ta.s, t, degree);
            const TransitionOptions defaults;
            json inputs = source_json(l);
            inputs.update({{"s", ta.s}, {"t", t}, {"k", degree}});
            json rec = record("normcheck", inputs);
            rec["result"]["norm_integral"] = integral;
            rec["result"]["pi_gate"] = integral < std::numbers::pi ? "pass" : "fail";
            rec["result"]["recommended_subintervals"] =
                std::max(1, static_cast<int>(std::ceil(integral / (defaults.safety * std::numbers::pi))));
            rec["diagnostics"]["safety"] = defaults.safety;
            emit(rec, src.format, start);
        } else if (*sim_cmd) {
            const Loaded l = load(src);
            const double t = end_time(ta, l.spec);
            const std::vector<double> x = parse_state(x_text, l);
            std::vector<MultiIndex> ks;
            for (const auto& text : k_list) ks.push_back(parse_k(text, l.spec.d));
            if (ks.empty()) {
                for (std::size_t i = 0; i < l.spec.d; ++i) {
                    MultiIndex k(l.spec.d);
                    k[i] = 1;
                    ks.push_back(k);
                }
            }
            sim.scheme = scheme.empty() ? (l.spec.state_space.bounded() ? Scheme::EulerProjected : Scheme::Euler)
                                        : parse_scheme(scheme);
            const SampleSet samples = simulate_paths(l.spec, ta.s, t, x, sim);
            json inputs = source_json(l);
            inputs.update({{"s", ta.s}, {"t", t}, {"x", x}, {"paths", sim.n_paths}, {"steps", sim.n_steps}, {"seed", sim.seed}});
            json rec = record("simulate", inputs);
            json moments = json::array();
            for (const auto& k : ks) {
                const MomentEstimate e = moment_from_samples(samples, k);
                moments.push_back({{"k", k.to_string()}, {"mean", e.mean}, {"std_error", e.std_error}});
            }
            rec["result"]["moments"] = moments;
            rec["diagnostics"]["scheme"] = to_string(sim.scheme);
            rec["diagnostics"]["threads"] = resolve_threads(sim.threads);
            rec["diagnostics"]["mc_seconds"] = samples.seconds;
            emit(rec, src.format, start);
        } else if (*validate_cmd) {
            return run_validate(src, ta, va, start);
        } else if (*list_cmd) {
            json rec = record("list", json::object());
            json items = json::array();
            for (const auto& info : builtin_catalog()) {
                json params = json::object();
                for (const auto& p : info.params) params[p.name] = {{"default", p.default_value}, {"meaning", p.meaning}};
                items.push_back({{"name", info.name}, {"summary", info.summary}, {"params", params}});
            }
            rec["result"]["builtins"] = items;
            emit(rec, list_format, start);
        } else if (*show_cmd) {
            std::cout << serialize_spec(load(src).spec);
        }
    } catch (const SpecError& e) {
        std::cerr << "polymag: spec error: " << e.what() << "\n";
        return kExitSpec;
    } catch (const MissingSampler& e) {
        std::cerr << "polymag: spec error: " << e.what() << "\n";
        return kExitSpec;
    } catch (const DegreeOverflow& e) {
        std::cerr << "polymag: DegreeOverflow: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "polymag: numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "polymag: invalid input: " << e.what() << "\n";
        return kExitSpec;
    } catch (const std::exception& e) {
        std::cerr << "polymag: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
