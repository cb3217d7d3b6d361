#pragma once

// Basic value types shared by every module: node indices, node sets,
// dense probability matrices and compensated summation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace latmove {

using NodeIndex = std::size_t;

/// Hard upper bound on the node count; node sets are 64-bit masks.
inline constexpr std::size_t kMaxNodes = 64;

/// Directed pair (source, sink). Used for service links and honey links.
struct Link {
    NodeIndex source = 0;
    NodeIndex sink = 0;

    friend bool operator==(const Link&, const Link&) = default;
    friend auto operator<=>(const Link&, const Link&) = default;
};

/// Set of node indices < 64 stored as a bit mask.
class NodeSet {
public:
    constexpr NodeSet() = default;
    constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits) {}
    NodeSet(std::initializer_list<NodeIndex> nodes) {
        for (NodeIndex n : nodes) insert(n);
    }

    static constexpr NodeSet all(std::size_t n) {
        return NodeSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
    }
    static constexpr NodeSet single(NodeIndex n) { return NodeSet(std::uint64_t{1} << n); }

    constexpr bool contains(NodeIndex n) const { return n < 64 && ((bits_ >> n) & 1u) != 0; }
    constexpr void insert(NodeIndex n) { bits_ |= std::uint64_t{1} << n; }
    constexpr void erase(NodeIndex n) { bits_ &= ~(std::uint64_t{1} << n); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr std::uint64_t bits() const { return bits_; }

    constexpr NodeSet with(NodeIndex n) const { return NodeSet(bits_ | (std::uint64_t{1} << n)); }
    constexpr NodeSet without(NodeIndex n) const { return NodeSet(bits_ & ~(std::uint64_t{1} << n)); }
    constexpr bool intersects(NodeSet o) const { return (bits_ & o.bits_) != 0; }
    constexpr bool is_subset_of(NodeSet o) const { return (bits_ & ~o.bits_) == 0; }

    constexpr NodeSet operator|(NodeSet o) const { return NodeSet(bits_ | o.bits_); }
    constexpr NodeSet operator&(NodeSet o) const { return NodeSet(bits_ & o.bits_); }
    constexpr NodeSet operator-(NodeSet o) const { return NodeSet(bits_ & ~o.bits_); }
    friend constexpr bool operator==(NodeSet, NodeSet) = default;

    /// Members in increasing index order.
    std::vector<NodeIndex> members() const {
        std::vector<NodeIndex> out;
        out.reserve(size());
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
            out.push_back(static_cast<NodeIndex>(std::countr_zero(b)));
        }
        return out;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
            f(static_cast<NodeIndex>(std::countr_zero(b)));
        }
    }

private:
    std::uint64_t bits_ = 0;
};

/// Dense row-major square matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    double& operator()(Link l) { return (*this)(l.source, l.sink); }
    double operator()(Link l) const { return (*this)(l.source, l.sink); }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    double sum() const;
    /// max |a - b| over all entries; matrices must have equal size.
    static double max_abs_diff(const Matrix& a, const Matrix& b);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double Matrix::sum() const {
    CompensatedSum s;
    for (double v : data_) s += v;
    return s.value();
}

inline double Matrix::max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.data_.size(); ++k) {
        m = std::max(m, std::abs(a.data_[k] - b.data_[k]));
    }
    return m;
}

}  // namespace latmove
