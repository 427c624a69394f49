#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wgsv/common.hpp"

namespace wgsv {

/// Undirected weighted graph on vertices 1..n. Edge keys are normalized to
/// (j, k) with j < k; a non-edge has weight 0 by convention. Weights are
/// stored as raw radians and reduced mod 2*pi only where a phase is applied.
class WeightedGraph {
  public:
    explicit WeightedGraph(int n) : n_(n) {
        if (n <= 0) throw input_error("vertex count must be positive");
    }

    int num_vertices() const { return n_; }
    std::size_t num_edges() const { return weights_.size(); }

    void add_edge(int j, int k, double theta) {
        check_vertex(j);
        check_vertex(k);
        if (j == k) throw input_error("self-loop on vertex " + std::to_string(j));
        if (theta == 0.0) throw input_error("zero-weight edge is not an edge");
        auto key = std::minmax(j, k);
        if (weights_.count(key))
            throw input_error("duplicate edge (" + std::to_string(key.first) + "," +
                              std::to_string(key.second) + ")");
        weights_[key] = theta;
        adjacency_.resize(static_cast<std::size_t>(n_) + 1);
        adjacency_[key.first].push_back(key.second);
        adjacency_[key.second].push_back(key.first);
        std::sort(adjacency_[key.first].begin(), adjacency_[key.first].end());
        std::sort(adjacency_[key.second].begin(), adjacency_[key.second].end());
    }

    bool has_edge(int j, int k) const {
        if (j == k) return false;
        return weights_.count(std::minmax(j, k)) != 0;
    }

    /// Weight theta_jk; 0 for a non-edge.
    double weight(int j, int k) const {
        check_vertex(j);
        check_vertex(k);
        auto it = weights_.find(std::minmax(j, k));
        return it == weights_.end() ? 0.0 : it->second;
    }

    /// C_k: the set of vertices connected to vertex k.
    const std::vector<int>& neighbors(int k) const {
        check_vertex(k);
        if (adjacency_.size() <= static_cast<std::size_t>(n_)) {
            adjacency_.resize(static_cast<std::size_t>(n_) + 1);
        }
        return adjacency_[k];
    }

    int degree(int k) const { return static_cast<int>(neighbors(k).size()); }

    int max_degree() const {
        int d = 0;
        for (int k = 1; k <= n_; ++k) d = std::max(d, degree(k));
        return d;
    }

    const std::map<std::pair<int, int>, double>& edges() const { return weights_; }

    void check_vertex(int k) const {
        if (k < 1 || k > n_)
            throw input_error("vertex " + std::to_string(k) + " out of range [1," +
                              std::to_string(n_) + "]");
    }

  private:
    int n_;
    std::map<std::pair<int, int>, double> weights_;
    mutable std::vector<std::vector<int>> adjacency_;
};

/// Partition of V into independent sets A_1..A_m (a proper m-coloring).
struct IndependenceCover {
    std::vector<std::vector<int>> parts;

    int num_parts() const { return static_cast<int>(parts.size()); }

    int part_size(int l) const { return static_cast<int>(parts.at(l - 1).size()); }

    int max_part_size() const {
        int s = 0;
        for (const auto& p : parts) s = std::max(s, static_cast<int>(p.size()));
        return s;
    }

    /// 1-based part list A_l.
    const std::vector<int>& part(int l) const {
        if (l < 1 || l > num_parts()) throw input_error("part index out of range");
        return parts[l - 1];
    }

    /// Complement A_l^c within 1..n.
    std::vector<int> complement(int l, int n) const {
        std::set<int> in(part(l).begin(), part(l).end());
        std::vector<int> out;
        for (int v = 1; v <= n; ++v)
            if (!in.count(v)) out.push_back(v);
        return out;
    }
};

struct CoverViolation {
    enum Kind { edge_inside_part, parts_overlap, vertex_uncovered, part_empty, vertex_out_of_range };
    Kind kind;
    int a = 0;  // edge endpoint / overlapping vertex / uncovered vertex
    int b = 0;  // second endpoint or second part index
    int part = 0;

    std::string message() const {
        std::ostringstream os;
        switch (kind) {
            case edge_inside_part:
                os << "edge (" << a << "," << b << ") inside A_" << part;
                break;
            case parts_overlap:
                os << "vertex " << a << " appears in A_" << part << " and A_" << b;
                break;
            case vertex_uncovered:
                os << "vertex " << a << " uncovered";
                break;
            case part_empty:
                os << "A_" << part << " is empty";
                break;
            case vertex_out_of_range:
                os << "vertex " << a << " in A_" << part << " out of range";
                break;
        }
        return os.str();
    }
};

/// Checks every IndependenceCover invariant, reporting all violations rather
/// than stopping at the first.
inline std::vector<CoverViolation> validate_cover(const WeightedGraph& g,
                                                  const IndependenceCover& a) {
    std::vector<CoverViolation> out;
    const int n = g.num_vertices();
    std::vector<int> owner(static_cast<std::size_t>(n) + 1, 0);
    for (int l = 1; l <= a.num_parts(); ++l) {
        const auto& part = a.parts[l - 1];
        if (part.empty()) out.push_back({CoverViolation::part_empty, 0, 0, l});
        for (int v : part) {
            if (v < 1 || v > n) {
                out.push_back({CoverViolation::vertex_out_of_range, v, 0, l});
                continue;
            }
            if (owner[v] != 0)
                out.push_back({CoverViolation::parts_overlap, v, l, owner[v]});
            else
                owner[v] = l;
        }
        for (std::size_t i = 0; i < part.size(); ++i)
            for (std::size_t j = i + 1; j < part.size(); ++j) {
                int u = part[i], v = part[j];
                if (u >= 1 && u <= n && v >= 1 && v <= n && g.has_edge(u, v))
                    out.push_back({CoverViolation::edge_inside_part, std::min(u, v),
                                   std::max(u, v), l});
            }
    }
    for (int v = 1; v <= n; ++v)
        if (owner[v] == 0) out.push_back({CoverViolation::vertex_uncovered, v, 0, 0});
    return out;
}

inline bool cover_ok(const WeightedGraph& g, const IndependenceCover& a) {
    return validate_cover(g, a).empty();
}

/// Greedy coloring along the given vertex order; m <= max_degree + 1.
inline IndependenceCover greedy_cover(const WeightedGraph& g, const std::vector<int>& order) {
    const int n = g.num_vertices();
    if (static_cast<int>(order.size()) != n) throw input_error("order must list every vertex once");
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int v : order) {
        g.check_vertex(v);
        if (seen[v]) throw input_error("order repeats vertex " + std::to_string(v));
        seen[v] = true;
    }
    std::vector<int> color(static_cast<std::size_t>(n) + 1, 0);
    int m = 0;
    for (int v : order) {
        std::set<int> used;
        for (int u : g.neighbors(v))
            if (color[u] != 0) used.insert(color[u]);
        int c = 1;
        while (used.count(c)) ++c;
        color[v] = c;
        m = std::max(m, c);
    }
    IndependenceCover cover;
    cover.parts.assign(m, {});
    for (int v = 1; v <= n; ++v) cover.parts[color[v] - 1].push_back(v);
    return cover;
}

inline IndependenceCover greedy_cover(const WeightedGraph& g) {
    std::vector<int> order(g.num_vertices());
    for (int i = 0; i < g.num_vertices(); ++i) order[i] = i + 1;
    return greedy_cover(g, order);
}

namespace detail {
inline bool colorable_with(const WeightedGraph& g, int m, int v, std::vector<int>& color) {
    if (v > g.num_vertices()) return true;
    // Symmetry break: vertex v may open at most one new color.
    int max_used = 0;
    for (int u = 1; u < v; ++u) max_used = std::max(max_used, color[u]);
    for (int c = 1; c <= std::min(m, max_used + 1); ++c) {
        bool ok = true;
        for (int u : g.neighbors(v))
            if (u < v && color[u] == c) { ok = false; break; }
        if (!ok) continue;
        color[v] = c;
        if (colorable_with(g, m, v + 1, color)) return true;
        color[v] = 0;
    }
    return false;
}
}  // namespace detail

/// Chromatic number by iterative deepening on the color count.
inline int chromatic_number_exact(const WeightedGraph& g) {
    const int n = g.num_vertices();
    if (n > kChromaticLimit)
        throw capability_error("exhaustive chromatic search capped at n = " +
                               std::to_string(kChromaticLimit));
    for (int m = 1; m <= n; ++m) {
        std::vector<int> color(static_cast<std::size_t>(n) + 1, 0);
        if (detail::colorable_with(g, m, 1, color)) return m;
    }
    return n;  // unreachable: n colors always suffice
}

}  // namespace wgsv
