#pragma once

/**
 * @file kd_trie.hpp
 * @brief p-adic kd-trie: a p-ary trie over interleaved digit strings.
 *
 * Two points of Z_p^D agree on their first e*D interleaved digits exactly when
 * every coordinate difference is divisible by p^e. The longest prefix of a
 * query that can be walked in the trie therefore gives the largest
 * l-infinity valuation between the query and any indexed point, with no
 * backtracking.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "padic_core.hpp"

namespace padic_ml {

class KdTrie {
public:
    explicit KdTrie(LearningParams params) : params_(std::move(params)) {
        children_.assign(params_.prime(), no_child);
    }

    KdTrie(LearningParams params, std::span<const Point> points) : KdTrie(std::move(params)) {
        for (const auto& x : points) insert(x);
    }

    const LearningParams& params() const noexcept { return params_; }

    /// Number of nodes including the root.
    std::size_t node_count() const noexcept { return children_.size() / params_.prime(); }

    bool empty() const noexcept { return node_count() == 1; }

    /// Adds the full E*D digit path of x. Re-inserting a point is a no-op.
    void insert(const Point& x) {
        const DigitString digits = expand(params_, x);
        std::uint32_t node = 0;
        for (const auto digit : digits) {
            std::uint32_t next = child(node, digit);
            if (next == no_child) {
                if (node_count() >= max_nodes) {
                    throw std::length_error("kd-trie node capacity exhausted");
                }
                next = static_cast<std::uint32_t>(node_count());
                children_.resize(children_.size() + params_.prime(), no_child);
                children_[slot(node, digit)] = next;
            }
            node = next;
        }
    }

    /// Length of the longest prefix of expand(x) present in the trie.
    std::size_t matched_prefix(const Point& x) const {
        const DigitString digits = expand(params_, x);
        std::uint32_t node = 0;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            node = child(node, digits[i]);
            if (node == no_child) return i;
        }
        return digits.size();
    }

    /**
     * Maximum over indexed s of the l-infinity valuation of x - s, in [0, E].
     *
     * E encodes an infinite valuation, i.e. x agrees with some indexed point
     * mod p^E. An empty trie answers 0.
     */
    std::uint32_t nns_valuation(const Point& x) const {
        return static_cast<std::uint32_t>(matched_prefix(x) / params_.dimension());
    }

    /// Child of `node` along `digit`, or no_child. Node 0 is the root.
    std::uint32_t child(std::uint32_t node, std::uint32_t digit) const noexcept {
        return children_[slot(node, digit)];
    }

    static constexpr std::uint32_t no_child = 0;  // the root is never a child
    static constexpr std::size_t max_nodes = std::size_t{1} << 32;

private:
    std::size_t slot(std::uint32_t node, std::uint32_t digit) const noexcept {
        return std::size_t{node} * params_.prime() + digit;
    }

    LearningParams params_;
    // p slots per node, flattened.
    std::vector<std::uint32_t> children_;
};

}  // namespace padic_ml
