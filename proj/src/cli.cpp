#include "latmove/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "latmove/errors.hpp"
#include "latmove/heuristic_analysis.hpp"
#include "latmove/io.hpp"
#include "latmove/ltv_core.hpp"
#include "latmove/mc_sim.hpp"

namespace latmove {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "network",   "policy",        "costs",         "auth_log",   "output",  "format",        "weights",
    "cor_weighting", "delta_k",   "epsilon",       "max_iter",   "variant", "trials",        "seed",
    "level",     "threads",       "trace_trial",   "trace_output", "bounds_only", "threshold", "initial_node",
    "honeypot_node", "window_seconds", "span"};

[[noreturn]] void bad_field(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ParseError, "config field '" + key + "': " + what);
}

double get_number(const Json& j, const std::string& key) {
    if (!j.is_number()) bad_field(key, "expected a number");
    return j.get<double>();
}

std::uint64_t get_count(const Json& j, const std::string& key) {
    if (!j.is_number_unsigned()) bad_field(key, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string get_string(const Json& j, const std::string& key) {
    if (!j.is_string()) bad_field(key, "expected a string");
    return j.get<std::string>();
}

std::string node_ref(const Json& j, const std::string& key) {
    if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
    return get_string(j, key);
}

OutputFormat parse_format(const std::string& s, const std::string& key) {
    if (s == "json") return OutputFormat::Json;
    if (s == "csv") return OutputFormat::Csv;
    bad_field(key, "expected \"json\" or \"csv\"");
}

VariantSelection parse_variant(const std::string& s, const std::string& key) {
    if (s == "risky") return VariantSelection::Risky;
    if (s == "conservative") return VariantSelection::Conservative;
    if (s == "both") return VariantSelection::Both;
    bad_field(key, "expected \"risky\", \"conservative\" or \"both\"");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    const Json j = parse_json(text, "config");
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    RunConfig c;
    auto path = [&](const Json& v, const std::string& key) { return base_dir / fs::path(get_string(v, key)); };

    for (const auto& [key, v] : j.items()) {
        if (!kConfigKeys.contains(key)) bad_field(key, "unknown field");
        if (key == "network") {
            c.network = path(v, key);
        } else if (key == "policy") {
            c.policy = path(v, key);
        } else if (key == "costs") {
            c.costs = path(v, key);
        } else if (key == "auth_log") {
            c.auth_log = path(v, key);
        } else if (key == "output") {
            c.output = path(v, key);
        } else if (key == "trace_output") {
            c.trace_output = path(v, key);
        } else if (key == "format") {
            c.format = parse_format(get_string(v, key), key);
        } else if (key == "weights") {
            if (!v.is_object()) bad_field(key, "expected an object with poi, sl, cor");
            for (const auto& [wk, wv] : v.items()) {
                const std::string name = "weights." + wk;
                if (wk == "poi") {
                    c.weights.alpha_poi = get_number(wv, name);
                } else if (wk == "sl") {
                    c.weights.alpha_sl = get_number(wv, name);
                } else if (wk == "cor") {
                    c.weights.alpha_cor = get_number(wv, name);
                } else {
                    bad_field(name, "unknown field");
                }
            }
            for (const auto& [wk, wv] : v.items()) {
                const double a = get_number(wv, "weights." + wk);
                if (!(a >= 0.0) || !std::isfinite(a)) bad_field("weights." + wk, "must be finite and non-negative");
            }
        } else if (key == "cor_weighting") {
            const std::string s = get_string(v, key);
            if (s == "paper") {
                c.cor_weighting = CorWeighting::Paper;
            } else if (s == "plain") {
                c.cor_weighting = CorWeighting::Plain;
            } else {
                bad_field(key, "expected \"paper\" or \"plain\"");
            }
        } else if (key == "delta_k") {
            c.delta_k = get_count(v, key);
        } else if (key == "epsilon") {
            c.epsilon = get_number(v, key);
            if (!(c.epsilon > 0.0)) bad_field(key, "must be > 0");
        } else if (key == "max_iter") {
            c.max_iter = get_count(v, key);
            if (c.max_iter == 0) bad_field(key, "must be >= 1");
        } else if (key == "variant") {
            c.variant = parse_variant(get_string(v, key), key);
        } else if (key == "trials") {
            c.trials = get_count(v, key);
            if (c.trials == 0) bad_field(key, "must be >= 1");
        } else if (key == "seed") {
            c.seed = get_count(v, key);
        } else if (key == "level") {
            c.level = get_number(v, key);
            if (!(c.level > 0.0 && c.level < 1.0)) bad_field(key, "must lie in (0, 1)");
        } else if (key == "threads") {
            c.threads = get_count(v, key);
        } else if (key == "trace_trial") {
            c.trace_trial = get_count(v, key);
        } else if (key == "bounds_only") {
            if (!v.is_boolean()) bad_field(key, "expected true or false");
            c.bounds_only = v.get<bool>();
        } else if (key == "threshold") {
            c.threshold = get_number(v, key);
            if (!(*c.threshold >= 0.0 && *c.threshold <= 1.0)) bad_field(key, "must lie in [0, 1]");
        } else if (key == "initial_node") {
            c.initial_node = node_ref(v, key);
        } else if (key == "honeypot_node") {
            c.honeypot_node = node_ref(v, key);
        } else if (key == "window_seconds") {
            c.window_seconds = get_number(v, key);
            if (!(c.window_seconds > 0.0)) bad_field(key, "must be > 0");
        } else if (key == "span") {
            if (!v.is_object() || !v.contains("start") || !v.contains("end")) {
                bad_field(key, "expected {\"start\": s, \"end\": s}");
            }
            c.span = TimeSpan{get_number(v["start"], "span.start"), get_number(v["end"], "span.end")};
        }
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    return parse_run_config(read_text_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

namespace {

enum class Stage { Loading, Running };

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void emit(const std::optional<fs::path>& target, const std::string& text, std::ostream& out) {
    if (target) {
        write_text_file(*target, text);
    } else {
        out << text;
    }
}

/// out.csv -> out.<tag>.csv
fs::path tagged(const fs::path& p, const std::string& tag, const std::string& ext) {
    fs::path r = p;
    r.replace_filename(p.stem().string() + "." + tag + ext);
    return r;
}

NetworkSpec require_network(const RunConfig& c, std::ostream& err) {
    if (!c.network) throw Error(ErrorCode::ParseError, "config field 'network': required");
    std::vector<std::string> warnings;
    NetworkSpec spec = load_network(*c.network, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return spec;
}

PolicyMatrix policy_or_uniform(const RunConfig& c, const NetworkSpec& spec) {
    return c.policy ? load_policy(*c.policy, spec) : PolicyMatrix::uniform(spec);
}

CostTable load_costs(const RunConfig& c, const NetworkSpec& spec) {
    if (!c.costs) return CostTable{};
    return cost_table_from_json(parse_json(read_text_file(*c.costs), c.costs->string()), spec);
}

NodeIndex initial_node(const RunConfig& c, const NetworkSpec& spec) {
    if (c.initial_node) {
        const NodeIndex i = resolve_node(spec, *c.initial_node);
        if (!spec.dmz().contains(i)) {
            throw Error(ErrorCode::InitialNodeNotInDmz, "config field 'initial_node': '" + *c.initial_node + "'");
        }
        return i;
    }
    if (spec.dmz().size() != 1) {
        throw Error(ErrorCode::InvalidArgument, "config field 'initial_node': required when the dmz has several nodes");
    }
    return spec.dmz().members().front();
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const NetworkSpec spec = require_network(c, err);
    Json j;
    j["valid"] = true;
    j["nodes"] = spec.node_count();
    j["dmz"] = spec.dmz().size();
    j["feasible_honey_links"] = feasible_mask(spec).count();
    if (c.policy) {
        load_policy(*c.policy, spec);
        j["policy"] = "ok";
    }
    if (c.costs) {
        load_costs(c, spec);
        j["costs"] = "ok";
    }
    if (c.auth_log) {
        std::ifstream in(*c.auth_log, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "config field 'auth_log': cannot open '" + c.auth_log->string() + "'");
        j["auth_events"] = read_auth_log(in).size();
    }
    emit(c.output, dump(j), out);
    return kExitOk;
}

int cmd_ltv(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    const NetworkSpec spec = require_network(c, err);
    const PolicyMatrix policy = policy_or_uniform(c, spec);
    stage = Stage::Running;

    ReportOptions options;
    options.bounds_only = c.bounds_only;
    if (!c.bounds_only && spec.node_count() > options.exact_cap) {
        err << "warning: network has " << spec.node_count() << " nodes, above the exact-evaluation cap of "
            << options.exact_cap << "; emitting bounds only\n";
        options.bounds_only = true;
    }
    const VulnerabilityReport report = vulnerability_report(spec, policy, c.delta_k, options);
    if (c.format == OutputFormat::Csv) {
        emit(c.output, report_to_csv(report, spec), out);
        return kExitOk;
    }
    Json j = report_to_json(report, spec);
    if (c.threshold) {
        const SecurityCheck s = check_security_level(report, *c.threshold);
        j["security"] = {{"threshold", *c.threshold},
                         {"secure", s.secure},
                         {"compared_figure", s.compared_figure},
                         {"compared_value", s.compared_value}};
    }
    emit(c.output, dump(j), out);
    return kExitOk;
}

Json variant_json(PolicyVariant v, const OptimizationResult& r) {
    Json j;
    j["variant"] = to_string(v);
    j["gamma"] = policy_to_json(r.policy)["gamma"];
    j["trace"] = trace_to_json(r.trace);
    return j;
}

int cmd_optimize(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    const NetworkSpec spec = require_network(c, err);
    const CostTable costs = load_costs(c, spec);
    std::optional<PolicyMatrix> start;
    if (c.policy) start = load_policy(*c.policy, spec);
    std::vector<PolicyVariant> variants;
    if (c.variant != VariantSelection::Conservative) variants.push_back(PolicyVariant::Risky);
    if (c.variant != VariantSelection::Risky) variants.push_back(PolicyVariant::Conservative);
    if (c.format == OutputFormat::Csv && variants.size() > 1 && !c.output) {
        throw Error(ErrorCode::InvalidArgument, "--out is required for csv output of both variants");
    }
    stage = Stage::Running;

    OptimizeOptions options;
    options.epsilon = c.epsilon;
    options.max_iter = c.max_iter;
    options.initial = start;
    options.context.costs = &costs;
    options.context.cor_weighting = c.cor_weighting;

    std::vector<std::pair<PolicyVariant, OptimizationResult>> results;
    for (PolicyVariant v : variants) {
        OptimizationResult r = optimize(spec, c.weights, c.delta_k, v, options);
        if (!r.trace.converged) {
            err << "warning: " << to_string(v) << " optimization did not converge in " << r.trace.iterations_used
                << " iterations (last step " << format_double(r.trace.step_norms.back()) << ")\n";
        }
        results.emplace_back(v, std::move(r));
    }

    if (c.format == OutputFormat::Json) {
        if (results.size() == 1) {
            emit(c.output, dump(variant_json(results[0].first, results[0].second)), out);
        } else {
            Json j;
            for (const auto& [v, r] : results) j[to_string(v)] = variant_json(v, r);
            emit(c.output, dump(j), out);
        }
        return kExitOk;
    }
    for (const auto& [v, r] : results) {
        if (!c.output) {
            out << trace_to_csv(r.trace);
            continue;
        }
        const fs::path trace_path = results.size() > 1 ? tagged(*c.output, to_string(v), c.output->extension().string())
                                                       : *c.output;
        write_text_file(trace_path, trace_to_csv(r.trace));
        write_text_file(tagged(trace_path, "policy", ".json"), dump(policy_to_json(r.policy)));
    }
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    const NetworkSpec spec = require_network(c, err);
    const PolicyMatrix policy = policy_or_uniform(c, spec);
    if (c.trace_trial && !c.trace_output) {
        throw Error(ErrorCode::ParseError, "config field 'trace_output': required with 'trace_trial'");
    }
    stage = Stage::Running;

    EstimateOptions options;
    options.threads = c.threads;
    const LtvEstimate est = estimate_ltv(spec, policy, c.delta_k, c.trials, c.seed, c.level, options);
    emit(c.output, c.format == OutputFormat::Csv ? estimate_to_csv(est, spec) : dump(estimate_to_json(est, spec)), out);

    if (c.trace_trial) {
        const NodeIndex initial = draw_initial_node(spec, c.seed, *c.trace_trial);
        const EpisodeTrace trace = trace_episode(spec, policy, c.delta_k, initial, {c.seed, *c.trace_trial});
        write_text_file(*c.trace_output, episode_trace_to_csv(trace, spec));
    }
    return kExitOk;
}

Json residue_json(const ResidueReport& r) {
    Json devs = Json::array();
    for (const auto& d : r.deviations) {
        devs.push_back({{"delta_k", d.delta_k}, {"kind", d.kind}, {"exact", d.exact}, {"bound", d.bound}});
    }
    return Json{{"sandwich_holds", r.sandwich_holds},
                {"recurrence_lower_holds", r.recurrence_lower_holds},
                {"strict_increase_holds", r.strict_increase_holds},
                {"residue_gap", r.residue_gap},
                {"deviations", std::move(devs)}};
}

int cmd_analyze_direct(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    const NetworkSpec spec = require_network(c, err);
    const NodeIndex i = initial_node(c, spec);
    if (!c.honeypot_node) throw Error(ErrorCode::ParseError, "config field 'honeypot_node': required");
    const NodeIndex w0 = resolve_node(spec, *c.honeypot_node);
    const DirectAnalysis analysis = direct_analysis(spec, i, spec.target(), w0);
    stage = Stage::Running;

    const std::vector<SweepRow> rows = direct_sweep(spec, i, w0, c.delta_k);
    if (c.format == OutputFormat::Csv) {
        emit(c.output, sweep_to_csv(rows), out);
        return kExitOk;
    }
    Json j;
    j["analysis"] = direct_analysis_to_json(analysis, spec);
    if (spec.node_count() <= kDefaultExactCap) {
        j["verification"] = residue_json(verify_residue(spec, i, spec.target(), w0, c.delta_k));
    }
    j["rows"] = sweep_to_json(rows);
    emit(c.output, dump(j), out);
    return kExitOk;
}

int cmd_analyze_indirect(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    const NetworkSpec spec = require_network(c, err);
    const NodeIndex i = initial_node(c, spec);
    PolicyMatrix policy;
    if (c.policy) {
        policy = load_policy(*c.policy, spec);
    } else {
        LinkMask mask = feasible_mask(spec);
        for (NodeIndex w = 0; w < spec.node_count(); ++w) mask.set(i, w, false);
        policy = PolicyMatrix::uniform_over(mask);
    }
    stage = Stage::Running;

    const std::vector<SweepRow> rows = indirect_sweep(spec, policy, i, c.delta_k);
    if (c.format == OutputFormat::Csv) {
        emit(c.output, sweep_to_csv(rows), out);
        return kExitOk;
    }
    Json j;
    j["initial"] = spec.nodes()[i].id;
    j["pomd"] = pomd(spec, i, spec.target());
    j["beta_lambda"] = spec.hit(i, spec.target());
    j["rows"] = sweep_to_json(rows);
    emit(c.output, dump(j), out);
    return kExitOk;
}

int cmd_estimate_beta(const RunConfig& c, std::ostream& out, std::ostream& err, Stage& stage) {
    if (!c.auth_log) throw Error(ErrorCode::ParseError, "config field 'auth_log': required");
    std::ifstream in(*c.auth_log, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "config field 'auth_log': cannot open '" + c.auth_log->string() + "'");
    const std::vector<AuthEvent> events = read_auth_log(in);

    std::vector<std::string> ids;
    if (c.network) {
        const NetworkSpec spec = require_network(c, err);
        for (const auto& node : spec.nodes()) ids.push_back(node.id);
    } else {
        std::set<std::string> seen;
        for (const auto& e : events) {
            seen.insert(e.source);
            seen.insert(e.destination);
        }
        ids.assign(seen.begin(), seen.end());
    }
    std::map<std::string, NodeIndex> node_map;
    for (std::size_t k = 0; k < ids.size(); ++k) node_map.emplace(ids[k], k);
    stage = Stage::Running;

    const BetaEstimate est = estimate_beta(events, c.window_seconds, node_map, c.span);
    if (est.skipped_unknown > 0) {
        err << "warning: skipped " << est.skipped_unknown << " events with unknown entities\n";
    }
    if (est.skipped_self > 0) err << "warning: skipped " << est.skipped_self << " self events\n";

    if (c.format == OutputFormat::Csv) {
        std::string csv = "source,destination,windows_with_event,windows,beta\n";
        for (std::size_t a = 0; a < ids.size(); ++a) {
            for (std::size_t b = 0; b < ids.size(); ++b) {
                if (a == b) continue;
                csv += ids[a] + "," + ids[b] + "," + format_double(est.windows_with_event(a, b)) + "," +
                       std::to_string(est.windows) + "," + format_double(est.beta(a, b)) + "\n";
            }
        }
        emit(c.output, csv, out);
        return kExitOk;
    }
    Json matrix = Json::array();
    Json counts = Json::array();
    for (std::size_t a = 0; a < ids.size(); ++a) {
        Json row = Json::array();
        Json crow = Json::array();
        for (std::size_t b = 0; b < ids.size(); ++b) {
            row.push_back(est.beta(a, b));
            crow.push_back(static_cast<std::uint64_t>(est.windows_with_event(a, b)));
        }
        matrix.push_back(std::move(row));
        counts.push_back(std::move(crow));
    }
    Json j;
    j["nodes"] = ids;
    j["window_seconds"] = est.window_seconds;
    j["origin"] = est.origin;
    j["windows"] = est.windows;
    j["beta"] = std::move(matrix);
    j["windows_with_event"] = std::move(counts);
    j["events_used"] = est.events_used;
    j["skipped_unknown"] = est.skipped_unknown;
    j["skipped_self"] = est.skipped_self;
    j["skipped_out_of_span"] = est.skipped_out_of_span;
    j["unknown_ids"] = est.unknown_ids;
    emit(c.output, dump(j), out);
    return kExitOk;
}

}  // namespace

int dispatch(const std::string& subcommand, const RunConfig& config, std::ostream& out, std::ostream& err) {
    Stage stage = Stage::Loading;
    try {
        if (subcommand == "validate") return cmd_validate(config, out, err);
        if (subcommand == "ltv") return cmd_ltv(config, out, err, stage);
        if (subcommand == "optimize") return cmd_optimize(config, out, err, stage);
        if (subcommand == "simulate") return cmd_simulate(config, out, err, stage);
        if (subcommand == "analyze-direct") return cmd_analyze_direct(config, out, err, stage);
        if (subcommand == "analyze-indirect") return cmd_analyze_indirect(config, out, err, stage);
        if (subcommand == "estimate-beta") return cmd_estimate_beta(config, out, err, stage);
        err << "error: unknown subcommand '" << subcommand << "'\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "error: validation failed\n";
        for (const auto& v : e.violations()) err << "  " << to_string(v.code) << ": " << v.message << "\n";
        return stage == Stage::Loading ? kExitValidation : kExitRuntime;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return stage == Stage::Loading ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lateral-movement vulnerability analysis and honeypot policy synthesis", "latmove"};
    std::string subcommand;
    std::string config_path;
    std::optional<std::string> policy, out_path, format, variant;
    std::optional<std::size_t> delta_k;
    std::optional<std::uint64_t> trials, seed;
    std::optional<double> window_seconds;
    bool bounds_only = false;

    app.add_option("subcommand", subcommand, "Subcommand")->required()->check(CLI::IsMember(kSubcommands));
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--policy", policy, "Policy file (JSON), overrides the config");
    app.add_option("--delta-k", delta_k, "Horizon in stages");
    app.add_option("--trials", trials, "Monte-Carlo trials");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--variant", variant, "Optimizer variant")->check(CLI::IsMember({"risky", "conservative", "both"}));
    app.add_option("--out", out_path, "Output path (default: stdout)");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--window-seconds", window_seconds, "Window width for beta estimation");
    app.add_flag("--bounds-only", bounds_only, "Skip exact evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    RunConfig config;
    try {
        config = load_run_config(config_path);
        if (policy) config.policy = fs::path(*policy);
        if (out_path) config.output = fs::path(*out_path);
        if (format) config.format = parse_format(*format, "--format");
        if (variant) config.variant = parse_variant(*variant, "--variant");
        if (delta_k) config.delta_k = *delta_k;
        if (trials) {
            if (*trials == 0) throw Error(ErrorCode::ParseError, "--trials must be >= 1");
            config.trials = *trials;
        }
        if (seed) config.seed = *seed;
        if (window_seconds) config.window_seconds = *window_seconds;
        if (bounds_only) config.bounds_only = true;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return dispatch(subcommand, config, out, err);
}

}  // namespace latmove
