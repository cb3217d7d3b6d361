#pragma once

// Network description, honeypot policies and per-stage random primitives.

#include <optional>
#include <string>
#include <vector>

#include "latmove/core.hpp"
#include "latmove/rng.hpp"

namespace latmove {

enum class NodeKind { User, Host };

struct NodeInfo {
    std::string id;
    NodeKind kind = NodeKind::Host;

    friend bool operator==(const NodeInfo&, const NodeInfo&) = default;
};

/// Unvalidated network description as read from a config file.
struct RawNetwork {
    std::vector<NodeInfo> nodes;
    std::vector<NodeIndex> dmz;
    std::vector<NodeIndex> reconfigurable;
    NodeIndex target = 0;
    std::vector<std::vector<double>> beta;
    std::vector<std::vector<double>> lambda;
    std::vector<std::vector<double>> q;
    /// Indexed by node; entries outside the DMZ must be zero.
    std::vector<double> rho;

    /// n host nodes named "n0".."n{n-1}" with all-zero matrices and rho.
    static RawNetwork blank(std::size_t n);
};

/// Validated, immutable network. Obtain one through validate_network().
class NetworkSpec {
public:
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    NodeSet all_nodes() const { return NodeSet::all(nodes_.size()); }
    NodeSet dmz() const { return dmz_; }
    NodeSet reconfigurable() const { return reconfigurable_; }
    NodeIndex target() const { return target_; }

    const Matrix& beta() const { return beta_; }
    const Matrix& lambda() const { return lambda_; }
    const Matrix& q() const { return q_; }
    const std::vector<double>& rho() const { return rho_; }

    double beta(NodeIndex i, NodeIndex j) const { return beta_(i, j); }
    double lambda(NodeIndex i, NodeIndex j) const { return lambda_(i, j); }
    double q(NodeIndex i, NodeIndex j) const { return q_(i, j); }
    double rho(NodeIndex i) const { return rho_[i]; }

    /// Per-stage probability that i reaches and compromises j through a service link.
    double hit(NodeIndex i, NodeIndex j) const { return beta_(i, j) * lambda_(i, j); }

    /// Back to the raw form (inverse of validate_network).
    RawNetwork to_raw() const;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

private:
    friend NetworkSpec validate_network(const RawNetwork& raw, std::vector<std::string>* warnings);

    std::vector<NodeInfo> nodes_;
    NodeSet dmz_;
    NodeSet reconfigurable_;
    NodeIndex target_ = 0;
    Matrix beta_;
    Matrix lambda_;
    Matrix q_;
    std::vector<double> rho_;
};

/// Validates every invariant and throws ValidationError listing all violations.
/// Probabilities within 1e-12 outside [0,1] are clamped and reported in `warnings`.
NetworkSpec validate_network(const RawNetwork& raw, std::vector<std::string>* warnings = nullptr);

/// Row-major boolean mask over (source, sink) pairs.
class LinkMask {
public:
    LinkMask() = default;
    explicit LinkMask(std::size_t n, bool fill = false) : n_(n), bits_(n * n, fill ? 1 : 0) {}

    std::size_t size() const { return n_; }
    bool operator()(NodeIndex l, NodeIndex w) const { return bits_[l * n_ + w] != 0; }
    void set(NodeIndex l, NodeIndex w, bool on) { bits_[l * n_ + w] = on ? 1 : 0; }
    std::size_t count() const;
    std::vector<Link> links() const;

private:
    std::size_t n_ = 0;
    std::vector<unsigned char> bits_;
};

/// Honey links a policy may use: sink reconfigurable, no self-link, never sourced at the target.
LinkMask feasible_mask(const NetworkSpec& spec);

/// Time-independent honeypot policy: a distribution over honey links.
class PolicyMatrix {
public:
    PolicyMatrix() = default;

    /// Checks the simplex and zero-diagonal invariants only.
    static PolicyMatrix from_distribution(Matrix gamma);
    /// Additionally checks feasibility against `spec`.
    static PolicyMatrix for_network(const NetworkSpec& spec, Matrix gamma);
    static PolicyMatrix uniform(const NetworkSpec& spec);
    static PolicyMatrix uniform_over(const LinkMask& mask);
    static PolicyMatrix deterministic(const NetworkSpec& spec, Link link);

    std::size_t size() const { return gamma_.size(); }
    const Matrix& gamma() const { return gamma_; }
    double operator()(NodeIndex l, NodeIndex w) const { return gamma_(l, w); }

    friend bool operator==(const PolicyMatrix&, const PolicyMatrix&) = default;

private:
    explicit PolicyMatrix(Matrix gamma) : gamma_(std::move(gamma)) {}
    Matrix gamma_;
};

/// Throws ValidationError when `policy` violates a feasibility constraint of `spec`.
void validate_policy(const NetworkSpec& spec, const PolicyMatrix& policy);

struct StageRealization {
    /// out_links[i] holds every j with e(i, j) = 1.
    std::vector<NodeSet> out_links;
    std::optional<Link> honey_link;
    std::size_t stage = 0;

    static StageRealization empty(std::size_t n, std::size_t stage = 0);
    std::size_t node_count() const { return out_links.size(); }
    bool has_link(NodeIndex i, NodeIndex j) const { return out_links[i].contains(j); }
    void add_link(NodeIndex i, NodeIndex j) { out_links[i].insert(j); }
};

/// Draws every service link i->j as an independent Bernoulli(beta_ij) in row-major
/// order, then the honey link from gamma. Both come from `stream`.
StageRealization sample_stage(const NetworkSpec& spec, const PolicyMatrix& policy, RandomStream& stream,
                              std::size_t stage = 0);

/// Neither the source nor the sink of any realized service link.
bool is_idle(const StageRealization& realization, NodeIndex w);

/// Probability that w has no service link from any node in `sources` and none to any node in `sinks`.
double no_interference_prob(const NetworkSpec& spec, NodeSet sources, NodeIndex w, NodeSet sinks);

/// Probability that w is idle in a stage: no_interference_prob(V\{w}, w, V\{w}).
double idle_prob(const NetworkSpec& spec, NodeIndex w);

}  // namespace latmove
