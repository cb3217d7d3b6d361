#include "latmove/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "latmove/errors.hpp"

namespace latmove {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
}

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
    return *it;
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorCode::ParseError, where + " must be a number");
    return j.get<double>();
}

std::vector<std::vector<double>> rows_of(const Json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, where + " must be an array of arrays");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Json& row = j[r];
        if (!row.is_array()) throw Error(ErrorCode::ParseError, where + "[" + std::to_string(r) + "] must be an array");
        std::vector<double> values;
        for (std::size_t c = 0; c < row.size(); ++c) {
            values.push_back(number(row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
        }
        rows.push_back(std::move(values));
    }
    return rows;
}

Matrix square_matrix(const Json& j, std::size_t n, const std::string& where) {
    const auto rows = rows_of(j, where);
    bool square = rows.size() == n;
    for (const auto& r : rows) square = square && r.size() == n;
    if (!square) {
        throw Error(ErrorCode::NonSquareMatrix, where + " must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    Matrix m(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = rows[r][c];
    return m;
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string kind_name(NodeKind k) { return k == NodeKind::User ? "user" : "host"; }

struct RefResolver {
    std::map<std::string, NodeIndex> by_id;
    std::size_t n = 0;
    std::vector<Violation>* violations;

    NodeIndex operator()(const Json& ref, const std::string& where) const {
        if (ref.is_number_integer()) {
            const auto idx = ref.get<std::int64_t>();
            if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
                violations->push_back({ErrorCode::IndexOutOfRange, where + ": index " + std::to_string(idx)});
                return n;
            }
            return static_cast<NodeIndex>(idx);
        }
        if (ref.is_string()) {
            const auto it = by_id.find(ref.get<std::string>());
            if (it != by_id.end()) return it->second;
            violations->push_back({ErrorCode::UnknownNode, where + ": unknown node '" + ref.get<std::string>() + "'"});
            return 0;
        }
        throw Error(ErrorCode::ParseError, where + " must be a node id or index");
    }
};

std::string csv_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

RawNetwork network_from_json(const Json& j) {
    const Json& nodes = field(j, "nodes", "network");
    if (!nodes.is_array()) throw Error(ErrorCode::ParseError, "network.nodes must be an array");

    RawNetwork raw;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Json& node = nodes[k];
        const std::string where = "network.nodes[" + std::to_string(k) + "]";
        NodeInfo info;
        if (node.is_string()) {
            info.id = node.get<std::string>();
        } else {
            const Json& id = field(node, "id", where);
            if (!id.is_string()) throw Error(ErrorCode::ParseError, where + ".id must be a string");
            info.id = id.get<std::string>();
            if (const auto it = node.find("kind"); it != node.end()) {
                const std::string kind = it->is_string() ? it->get<std::string>() : "";
                if (kind == "user") {
                    info.kind = NodeKind::User;
                } else if (kind == "host") {
                    info.kind = NodeKind::Host;
                } else {
                    throw Error(ErrorCode::ParseError, where + ".kind must be \"user\" or \"host\"");
                }
            }
        }
        raw.nodes.push_back(std::move(info));
    }
    const std::size_t n = raw.nodes.size();

    std::vector<Violation> violations;
    RefResolver resolve{{}, n, &violations};
    for (std::size_t k = 0; k < n; ++k) resolve.by_id.emplace(raw.nodes[k].id, k);

    auto node_list = [&](const char* key) {
        const Json& arr = field(j, key, "network");
        if (!arr.is_array()) throw Error(ErrorCode::ParseError, std::string("network.") + key + " must be an array");
        std::vector<NodeIndex> out;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            out.push_back(resolve(arr[k], std::string("network.") + key + "[" + std::to_string(k) + "]"));
        }
        return out;
    };
    raw.dmz = node_list("dmz");
    raw.reconfigurable = node_list("reconfigurable");
    raw.target = resolve(field(j, "target", "network"), "network.target");

    raw.beta = rows_of(field(j, "beta", "network"), "network.beta");
    raw.lambda = rows_of(field(j, "lambda", "network"), "network.lambda");
    if (const auto it = j.find("q"); it != j.end()) {
        raw.q = rows_of(*it, "network.q");
    } else {
        raw.q.assign(n, std::vector<double>(n, 0.0));
    }

    raw.rho.assign(n, 0.0);
    if (const auto it = j.find("rho"); it != j.end()) {
        if (it->is_object()) {
            for (const auto& [id, p] : it->items()) {
                const NodeIndex idx = resolve(Json(id), "network.rho");
                if (idx < n) raw.rho[idx] = number(p, "network.rho." + id);
            }
        } else if (it->is_array()) {
            if (it->size() != n) {
                throw Error(ErrorCode::ParseError, "network.rho array must have one entry per node");
            }
            for (std::size_t k = 0; k < n; ++k) raw.rho[k] = number((*it)[k], "network.rho[" + std::to_string(k) + "]");
        } else {
            throw Error(ErrorCode::ParseError, "network.rho must be an object or an array");
        }
    } else if (!raw.dmz.empty()) {
        for (NodeIndex i : raw.dmz)
            if (i < n) raw.rho[i] = 1.0 / static_cast<double>(raw.dmz.size());
    }

    if (!violations.empty()) throw ValidationError(std::move(violations));
    return raw;
}

Json network_to_json(const NetworkSpec& spec) {
    Json j;
    Json nodes = Json::array();
    for (const auto& node : spec.nodes()) nodes.push_back({{"id", node.id}, {"kind", kind_name(node.kind)}});
    j["nodes"] = std::move(nodes);
    auto ids = [&](NodeSet s) {
        Json arr = Json::array();
        s.for_each([&](NodeIndex i) { arr.push_back(spec.nodes()[i].id); });
        return arr;
    };
    j["dmz"] = ids(spec.dmz());
    j["reconfigurable"] = ids(spec.reconfigurable());
    j["target"] = spec.nodes()[spec.target()].id;
    j["beta"] = matrix_json(spec.beta());
    j["lambda"] = matrix_json(spec.lambda());
    j["q"] = matrix_json(spec.q());
    Json rho = Json::object();
    spec.dmz().for_each([&](NodeIndex i) { rho[spec.nodes()[i].id] = spec.rho(i); });
    j["rho"] = std::move(rho);
    return j;
}

NetworkSpec load_network(const fs::path& path, std::vector<std::string>* warnings) {
    return validate_network(network_from_json(parse_json(read_text_file(path), path.string())), warnings);
}

NodeIndex resolve_node(const NetworkSpec& spec, const std::string& ref) {
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (spec.nodes()[k].id == ref) return k;
    }
    std::size_t idx = 0;
    const auto res = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
    if (res.ec == std::errc() && res.ptr == ref.data() + ref.size() && idx < spec.node_count()) return idx;
    throw Error(ErrorCode::UnknownNode, "unknown node '" + ref + "'");
}

PolicyMatrix policy_from_json(const Json& j, const NetworkSpec& spec) {
    return PolicyMatrix::for_network(spec, square_matrix(field(j, "gamma", "policy"), spec.node_count(), "policy.gamma"));
}

Json policy_to_json(const PolicyMatrix& policy) { return Json{{"gamma", matrix_json(policy.gamma())}}; }

PolicyMatrix load_policy(const fs::path& path, const NetworkSpec& spec) {
    return policy_from_json(parse_json(read_text_file(path), path.string()), spec);
}

CostTable cost_table_from_json(const Json& j, const NetworkSpec& spec) {
    const Json& type = field(j, "type", "costs");
    const std::string t = type.is_string() ? type.get<std::string>() : "";
    if (t == "zero") return CostTable{};
    if (t == "location") return CostTable::location(square_matrix(field(j, "D", "costs"), spec.node_count(), "costs.D"));
    throw Error(ErrorCode::ParseError, "costs.type must be \"location\" or \"zero\"");
}

Json cost_table_to_json(const CostTable& costs) {
    if (costs.location_matrix()) return Json{{"type", "location"}, {"D", matrix_json(*costs.location_matrix())}};
    if (costs.is_zero()) return Json{{"type", "zero"}};
    throw Error(ErrorCode::InvalidArgument, "general cost tables have no JSON form");
}

namespace {

Json point_json(std::size_t d, const VulnerabilityPoint& p) {
    Json j;
    j["delta_k"] = d;
    j["exact"] = p.exact ? Json(*p.exact) : Json(nullptr);
    j["lower"] = p.lower;
    j["upper"] = p.upper;
    return j;
}

}  // namespace

Json report_to_json(const VulnerabilityReport& report, const NetworkSpec& spec) {
    Json j;
    j["delta_k"] = report.delta_k;
    j["exact_available"] = report.has_exact();
    Json agg = Json::array();
    for (std::size_t d = 0; d < report.aggregate.size(); ++d) agg.push_back(point_json(d, report.aggregate[d]));
    j["aggregate"] = std::move(agg);
    Json per = Json::object();
    for (const auto& [i, points] : report.per_initial) {
        Json arr = Json::array();
        for (std::size_t d = 0; d < points.size(); ++d) arr.push_back(point_json(d, points[d]));
        per[spec.nodes()[i].id] = std::move(arr);
    }
    j["per_initial"] = std::move(per);
    if (report.has_exact()) {
        const SandwichDiagnostics diag = sandwich_diagnostics(report);
        j["sandwich"] = {{"points_checked", diag.points_checked},
                         {"violations", diag.violations.size()},
                         {"violation_rate", diag.violation_rate()}};
    }
    return j;
}

std::string report_to_csv(const VulnerabilityReport& report, const NetworkSpec& spec) {
    std::string out = "delta_k,initial_node,exact,lower,upper\n";
    auto row = [&](std::size_t d, const std::string& who, const VulnerabilityPoint& p) {
        out += std::to_string(d) + "," + who + "," + csv_opt(p.exact) + "," + format_double(p.lower) + "," +
               format_double(p.upper) + "\n";
    };
    for (std::size_t d = 0; d < report.aggregate.size(); ++d) row(d, "aggregate", report.aggregate[d]);
    for (const auto& [i, points] : report.per_initial) {
        for (std::size_t d = 0; d < points.size(); ++d) row(d, spec.nodes()[i].id, points[d]);
    }
    return out;
}

Json trace_to_json(const OptimizationTrace& trace) {
    Json j;
    j["converged"] = trace.converged;
    j["iterations_used"] = trace.iterations_used;
    j["objective_values"] = trace.objective_values;
    j["step_norms"] = trace.step_norms;
    return j;
}

std::string trace_to_csv(const OptimizationTrace& trace) {
    std::string out = "iter,objective,step_norm\n";
    for (std::size_t t = 0; t < trace.objective_values.size(); ++t) {
        out += std::to_string(t) + "," + format_double(trace.objective_values[t]) + ",";
        if (t > 0) out += format_double(trace.step_norms[t - 1]);
        out += "\n";
    }
    return out;
}

namespace {

Json proportion_json(const Proportion& p) {
    return Json{{"trials", p.trials},
                {"successes", p.successes},
                {"estimate", p.estimate},
                {"ci_lower", p.ci.lower},
                {"ci_upper", p.ci.upper}};
}

std::string proportion_csv(const std::string& scope, std::size_t d, const Proportion& p) {
    return scope + "," + std::to_string(d) + "," + std::to_string(p.trials) + "," + std::to_string(p.successes) + "," +
           format_double(p.estimate) + "," + format_double(p.ci.lower) + "," + format_double(p.ci.upper) + "\n";
}

}  // namespace

Json estimate_to_json(const LtvEstimate& estimate, const NetworkSpec& spec) {
    Json j;
    j["delta_k"] = estimate.delta_k;
    j["level"] = estimate.level;
    j["seed"] = estimate.seed;
    j["overall"] = proportion_json(estimate.overall);
    Json horizon = Json::array();
    for (std::size_t d = 0; d < estimate.horizon.size(); ++d) {
        Json p = proportion_json(estimate.horizon[d]);
        p["delta_k"] = d;
        horizon.push_back(std::move(p));
    }
    j["horizon"] = std::move(horizon);
    Json per = Json::object();
    for (const auto& [i, p] : estimate.per_initial) per[spec.nodes()[i].id] = proportion_json(p);
    j["per_initial"] = std::move(per);
    j["detection_rate"] = estimate.detection_rate;
    j["mean_detection_stage"] =
        estimate.mean_detection_stage ? Json(*estimate.mean_detection_stage) : Json(nullptr);
    return j;
}

std::string estimate_to_csv(const LtvEstimate& estimate, const NetworkSpec& spec) {
    std::string out = "scope,delta_k,trials,successes,estimate,ci_lower,ci_upper\n";
    for (std::size_t d = 0; d < estimate.horizon.size(); ++d) out += proportion_csv("overall", d, estimate.horizon[d]);
    for (const auto& [i, p] : estimate.per_initial) out += proportion_csv(spec.nodes()[i].id, estimate.delta_k, p);
    return out;
}

std::string episode_trace_to_csv(const EpisodeTrace& trace, const NetworkSpec& spec) {
    const auto& ids = spec.nodes();
    std::string out = "stage,links,honey_link,new_compromises,detected\n";
    for (const StageRecord& rec : trace.stages) {
        std::string links;
        for (NodeIndex i = 0; i < rec.realization.node_count(); ++i) {
            rec.realization.out_links[i].for_each([&](NodeIndex j) {
                if (!links.empty()) links += ";";
                links += ids[i].id + ">" + ids[j].id;
            });
        }
        std::string honey;
        if (rec.realization.honey_link) {
            honey = ids[rec.realization.honey_link->source].id + ">" + ids[rec.realization.honey_link->sink].id;
        }
        std::string fresh;
        for (NodeIndex h : rec.new_compromises) {
            if (!fresh.empty()) fresh += ";";
            fresh += ids[h].id;
        }
        out += std::to_string(rec.realization.stage) + "," + links + "," + honey + "," + fresh + "," +
               (rec.detected ? "1" : "0") + "\n";
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "delta_k,exact,eq9_bound,t2_lower1,t2_upper,t2_lower2\n";
    for (const SweepRow& r : rows) {
        out += std::to_string(r.delta_k) + "," + csv_opt(r.exact) + "," + csv_opt(r.eq9_bound) + "," +
               csv_opt(r.t2_lower1) + "," + csv_opt(r.t2_upper) + "," + csv_opt(r.t2_lower2) + "\n";
    }
    return out;
}

Json sweep_to_json(const std::vector<SweepRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    Json arr = Json::array();
    for (const SweepRow& r : rows) {
        arr.push_back({{"delta_k", r.delta_k},
                       {"exact", opt(r.exact)},
                       {"eq9_bound", opt(r.eq9_bound)},
                       {"t2_lower1", opt(r.t2_lower1)},
                       {"t2_upper", opt(r.t2_upper)},
                       {"t2_lower2", opt(r.t2_lower2)}});
    }
    return arr;
}

Json direct_analysis_to_json(const DirectAnalysis& a, const NetworkSpec& spec) {
    return Json{{"initial", spec.nodes()[a.initial].id},
                {"target", spec.nodes()[a.target].id},
                {"honeypot", spec.nodes()[a.honeypot].id},
                {"beta_lambda", a.beta_lambda},
                {"k1", a.k1},
                {"k2", a.k2},
                {"r2", a.r2},
                {"recurrence_rate", a.recurrence_rate},
                {"t2_upper", a.t2_upper},
                {"t2_lower2", a.t2_lower2},
                {"t2_lower1_limit", a.t2_lower1_limit()},
                {"residue", a.residue()}};
}

}  // namespace latmove
