#include "latmove/net_model.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "latmove/errors.hpp"

namespace latmove {

namespace {

constexpr double kClampSlack = 1e-12;
constexpr double kSimplexTol = 1e-9;

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Validates one probability; returns the (possibly clamped) value.
double check_probability(double v, const std::string& where, std::vector<Violation>& violations,
                         std::vector<std::string>* warnings) {
    if (std::isnan(v) || v < -kClampSlack || v > 1.0 + kClampSlack) {
        violations.push_back({ErrorCode::ProbabilityOutOfRange, where + " = " + fmt_double(v)});
        return v;
    }
    if (v < 0.0 || v > 1.0) {
        const double clamped = v < 0.0 ? 0.0 : 1.0;
        if (warnings) warnings->push_back("clamped " + where + " from " + fmt_double(v));
        return clamped;
    }
    return v;
}

Matrix check_matrix(const std::vector<std::vector<double>>& rows, const char* name, std::size_t n,
                    bool zero_diagonal, std::vector<Violation>& violations,
                    std::vector<std::string>* warnings) {
    Matrix m(n);
    bool square = rows.size() == n;
    for (const auto& row : rows) square = square && row.size() == n;
    if (!square) {
        std::string shape = std::to_string(rows.size()) + " rows";
        violations.push_back({ErrorCode::NonSquareMatrix,
                              std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n) +
                                  ", got " + shape});
        return m;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::string where = std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
            m(i, j) = check_probability(rows[i][j], where, violations, warnings);
        }
        if (zero_diagonal && m(i, i) != 0.0) {
            violations.push_back({ErrorCode::NonZeroDiagonal,
                                  std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(i) +
                                      "] must be 0"});
        }
    }
    return m;
}

NodeSet check_index_set(const std::vector<NodeIndex>& idx, const char* name, std::size_t n,
                        std::vector<Violation>& violations) {
    NodeSet s;
    for (NodeIndex k : idx) {
        if (k >= n) {
            violations.push_back({ErrorCode::IndexOutOfRange,
                                  std::string(name) + " references node " + std::to_string(k) + " (N = " +
                                      std::to_string(n) + ")"});
            continue;
        }
        s.insert(k);
    }
    return s;
}

}  // namespace

RawNetwork RawNetwork::blank(std::size_t n) {
    RawNetwork raw;
    for (std::size_t i = 0; i < n; ++i) raw.nodes.push_back({"n" + std::to_string(i), NodeKind::Host});
    const std::vector<std::vector<double>> zeros(n, std::vector<double>(n, 0.0));
    raw.beta = raw.lambda = raw.q = zeros;
    raw.rho.assign(n, 0.0);
    return raw;
}

RawNetwork NetworkSpec::to_raw() const {
    RawNetwork raw;
    raw.nodes = nodes_;
    raw.dmz = dmz_.members();
    raw.reconfigurable = reconfigurable_.members();
    raw.target = target_;
    const std::size_t n = node_count();
    auto rows = [n](const Matrix& m) {
        std::vector<std::vector<double>> out(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i][j] = m(i, j);
        return out;
    };
    raw.beta = rows(beta_);
    raw.lambda = rows(lambda_);
    raw.q = rows(q_);
    raw.rho = rho_;
    return raw;
}

NetworkSpec validate_network(const RawNetwork& raw, std::vector<std::string>* warnings) {
    std::vector<Violation> violations;
    const std::size_t n = raw.nodes.size();
    if (n == 0) {
        throw ValidationError({{ErrorCode::InvalidArgument, "network has no nodes"}});
    }
    if (n > kMaxNodes) {
        throw ValidationError({{ErrorCode::TooManyNodes,
                                "N = " + std::to_string(n) + " exceeds " + std::to_string(kMaxNodes)}});
    }

    std::set<std::string> ids;
    for (const auto& node : raw.nodes) {
        if (!ids.insert(node.id).second) {
            violations.push_back({ErrorCode::DuplicateNode, "node id '" + node.id + "' appears twice"});
        }
    }

    NetworkSpec spec;
    spec.nodes_ = raw.nodes;
    spec.beta_ = check_matrix(raw.beta, "beta", n, true, violations, warnings);
    spec.lambda_ = check_matrix(raw.lambda, "lambda", n, true, violations, warnings);
    spec.q_ = check_matrix(raw.q, "q", n, false, violations, warnings);
    for (std::size_t i = 0; i < n; ++i) spec.q_(i, i) = 0.0;

    spec.dmz_ = check_index_set(raw.dmz, "dmz", n, violations);
    spec.reconfigurable_ = check_index_set(raw.reconfigurable, "reconfigurable", n, violations);
    if (spec.dmz_.empty()) {
        violations.push_back({ErrorCode::EmptyDmz, "dmz must contain at least one node"});
    }
    if (raw.target >= n) {
        violations.push_back({ErrorCode::IndexOutOfRange, "target " + std::to_string(raw.target) + " out of range"});
    } else if (spec.dmz_.contains(raw.target)) {
        violations.push_back({ErrorCode::TargetInDmz, "target node " + std::to_string(raw.target) + " is in the dmz"});
    }
    spec.target_ = raw.target;

    spec.rho_.assign(n, 0.0);
    if (raw.rho.size() != n) {
        violations.push_back({ErrorCode::InvalidArgument,
                              "rho must have one entry per node, got " + std::to_string(raw.rho.size())});
    } else {
        CompensatedSum total;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = check_probability(raw.rho[i], "rho[" + std::to_string(i) + "]", violations, warnings);
            if (!spec.dmz_.contains(i)) {
                if (v != 0.0) {
                    violations.push_back({ErrorCode::RhoOutsideDmz,
                                          "rho[" + std::to_string(i) + "] = " + fmt_double(v) +
                                              " but node is not in the dmz"});
                }
                continue;
            }
            spec.rho_[i] = v;
            total += v;
        }
        if (std::abs(total.value() - 1.0) > kSimplexTol) {
            violations.push_back({ErrorCode::RhoNotNormalized, "rho sums to " + fmt_double(total.value())});
        }
    }

    if (!violations.empty()) throw ValidationError(std::move(violations));
    return spec;
}

std::size_t LinkMask::count() const {
    std::size_t c = 0;
    for (unsigned char b : bits_) c += b;
    return c;
}

std::vector<Link> LinkMask::links() const {
    std::vector<Link> out;
    for (std::size_t l = 0; l < n_; ++l)
        for (std::size_t w = 0; w < n_; ++w)
            if ((*this)(l, w)) out.push_back({l, w});
    return out;
}

LinkMask feasible_mask(const NetworkSpec& spec) {
    const std::size_t n = spec.node_count();
    LinkMask mask(n);
    for (std::size_t l = 0; l < n; ++l) {
        if (l == spec.target()) continue;
        for (std::size_t w = 0; w < n; ++w) {
            if (w != l && spec.reconfigurable().contains(w)) mask.set(l, w, true);
        }
    }
    return mask;
}

PolicyMatrix PolicyMatrix::from_distribution(Matrix gamma) {
    std::vector<Violation> violations;
    const std::size_t n = gamma.size();
    CompensatedSum total;
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t w = 0; w < n; ++w) {
            double& g = gamma(l, w);
            const std::string where = "gamma[" + std::to_string(l) + "][" + std::to_string(w) + "]";
            g = check_probability(g, where, violations, nullptr);
            if (l == w && g != 0.0) violations.push_back({ErrorCode::NonZeroDiagonal, where + " must be 0"});
            total += g;
        }
    }
    if (std::abs(total.value() - 1.0) > kSimplexTol) {
        violations.push_back({ErrorCode::PolicyNotNormalized, "gamma sums to " + fmt_double(total.value())});
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return PolicyMatrix(std::move(gamma));
}

PolicyMatrix PolicyMatrix::for_network(const NetworkSpec& spec, Matrix gamma) {
    if (gamma.size() != spec.node_count()) {
        throw ValidationError({{ErrorCode::NonSquareMatrix, "gamma must be " + std::to_string(spec.node_count()) +
                                                                "x" + std::to_string(spec.node_count())}});
    }
    PolicyMatrix p = from_distribution(std::move(gamma));
    validate_policy(spec, p);
    return p;
}

PolicyMatrix PolicyMatrix::uniform_over(const LinkMask& mask) {
    const std::size_t m = mask.count();
    if (m == 0) throw Error(ErrorCode::EmptyFeasibleSet, "no feasible honey link");
    Matrix g(mask.size());
    for (const Link& link : mask.links()) g(link) = 1.0 / static_cast<double>(m);
    return PolicyMatrix(std::move(g));
}

PolicyMatrix PolicyMatrix::uniform(const NetworkSpec& spec) { return uniform_over(feasible_mask(spec)); }

PolicyMatrix PolicyMatrix::deterministic(const NetworkSpec& spec, Link link) {
    Matrix g(spec.node_count());
    if (link.source >= g.size() || link.sink >= g.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "honey link out of range");
    }
    g(link) = 1.0;
    return for_network(spec, std::move(g));
}

void validate_policy(const NetworkSpec& spec, const PolicyMatrix& policy) {
    std::vector<Violation> violations;
    const std::size_t n = spec.node_count();
    if (policy.size() != n) {
        throw ValidationError({{ErrorCode::NonSquareMatrix, "policy size does not match network"}});
    }
    const LinkMask mask = feasible_mask(spec);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t w = 0; w < n; ++w) {
            if (policy(l, w) != 0.0 && !mask(l, w)) {
                std::string why = l == spec.target() ? "source is the target"
                                  : l == w           ? "self link"
                                                     : "sink is not reconfigurable";
                violations.push_back({ErrorCode::InfeasibleHoneyLink, "gamma[" + std::to_string(l) + "][" +
                                                                          std::to_string(w) + "] > 0 but " + why});
            }
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

StageRealization StageRealization::empty(std::size_t n, std::size_t stage) {
    StageRealization r;
    r.out_links.assign(n, NodeSet{});
    r.stage = stage;
    return r;
}

StageRealization sample_stage(const NetworkSpec& spec, const PolicyMatrix& policy, RandomStream& stream,
                              std::size_t stage) {
    const std::size_t n = spec.node_count();
    StageRealization r = StageRealization::empty(n, stage);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double b = spec.beta(i, j);
            if (b <= 0.0) continue;
            if (stream.bernoulli(b)) r.add_link(i, j);
        }
    }
    const auto& g = policy.gamma().values();
    const std::size_t k = stream.categorical(g);
    if (g[k] > 0.0) r.honey_link = Link{k / n, k % n};
    return r;
}

bool is_idle(const StageRealization& realization, NodeIndex w) {
    const std::size_t n = realization.node_count();
    if (w >= n) throw Error(ErrorCode::IndexOutOfRange, "node " + std::to_string(w) + " out of range");
    if (!realization.out_links[w].empty()) return false;
    for (std::size_t j = 0; j < n; ++j) {
        if (realization.out_links[j].contains(w)) return false;
    }
    return true;
}

double no_interference_prob(const NetworkSpec& spec, NodeSet sources, NodeIndex w, NodeSet sinks) {
    if (w >= spec.node_count()) throw Error(ErrorCode::IndexOutOfRange, "node " + std::to_string(w));
    if (sources.contains(w) || sinks.contains(w)) {
        throw Error(ErrorCode::HoneypotInSourceOrSinkSet, "node " + std::to_string(w) + " is in the source or sink set");
    }
    double p = 1.0;
    sources.for_each([&](NodeIndex l) { p *= 1.0 - spec.beta(l, w); });
    sinks.for_each([&](NodeIndex l) { p *= 1.0 - spec.beta(w, l); });
    return p;
}

double idle_prob(const NetworkSpec& spec, NodeIndex w) {
    const NodeSet others = spec.all_nodes().without(w);
    return no_interference_prob(spec, others, w, others);
}

}  // namespace latmove
