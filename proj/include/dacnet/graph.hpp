#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacnet/rng.hpp"
#include "dacnet/sparse.hpp"

namespace dacnet {

namespace detail {

inline bool adjacency_connected(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        queue.push_back(v);
      }
  }
  return count == n;
}

}  // namespace detail

// Simple undirected connected graph, vertices 0..n-1. Geodesic distances are
// cached eagerly (all-pairs BFS) up to kDistanceCacheLimit vertices, so
// queries never mutate state and concurrent reads are safe.
class Graph {
 public:
  static constexpr int kDistanceCacheLimit = 4096;
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  Graph(int n, const std::vector<std::pair<int, int>>& edges) : n_(n) {
    if (n <= 0) throw std::invalid_argument("Graph: vertex count must be positive");
    adj_.assign(static_cast<std::size_t>(n), {});
    for (auto [u, v] : edges) {
      check_vertex(u);
      check_vertex(v);
      if (u == v) throw std::invalid_argument("Graph: self-loop");
      adj_[static_cast<std::size_t>(u)].push_back(v);
      adj_[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& nbrs : adj_) {
      std::sort(nbrs.begin(), nbrs.end());
      if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
        throw std::invalid_argument("Graph: duplicate edge");
    }
    if (!detail::adjacency_connected(n_, adj_))
      throw std::invalid_argument("Graph: not connected");
    if (n_ <= kDistanceCacheLimit) build_distance_cache();
  }

  int n() const { return n_; }
  const std::vector<int>& neighbors(int i) const {
    check_vertex(i);
    return adj_[static_cast<std::size_t>(i)];
  }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n_; ++u)
      for (int v : adj_[static_cast<std::size_t>(u)])
        if (u < v) e.emplace_back(u, v);
    return e;
  }

  int distance(int i, int j) const {
    check_vertex(i);
    check_vertex(j);
    if (!dist_.empty()) return dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
    return bfs_from(i)[static_cast<std::size_t>(j)];
  }

  // All distances from one source (BFS edge counts).
  std::vector<int> distances_from(int i) const {
    check_vertex(i);
    if (!dist_.empty()) {
      std::vector<int> d(static_cast<std::size_t>(n_));
      for (int j = 0; j < n_; ++j) d[static_cast<std::size_t>(j)] = dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
      return d;
    }
    return bfs_from(i);
  }

  // B(i, R) = { j : rho(i, j) <= R }, sorted.
  std::vector<int> ball(int i, int R) const {
    if (R < 0) throw std::invalid_argument("Graph::ball: negative radius");
    const auto d = distances_from(i);
    std::vector<int> out;
    for (int j = 0; j < n_; ++j)
      if (d[static_cast<std::size_t>(j)] <= R) out.push_back(j);
    return out;
  }

  // B(S, R) = { j : rho(j, S) <= R }, sorted. Multi-source BFS.
  std::vector<int> ball_of_set(std::span<const int> sources, int R) const {
    if (R < 0) throw std::invalid_argument("Graph::ball_of_set: negative radius");
    std::vector<int> d(static_cast<std::size_t>(n_), kUnreachable);
    std::deque<int> queue;
    for (int s : sources) {
      check_vertex(s);
      if (d[static_cast<std::size_t>(s)] != 0) {
        d[static_cast<std::size_t>(s)] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      if (d[static_cast<std::size_t>(u)] == R) continue;
      for (int v : adj_[static_cast<std::size_t>(u)])
        if (d[static_cast<std::size_t>(v)] == kUnreachable) {
          d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
    }
    std::vector<int> out;
    for (int j = 0; j < n_; ++j)
      if (d[static_cast<std::size_t>(j)] <= R) out.push_back(j);
    return out;
  }

  int diameter() const {
    int diam = 0;
    for (int i = 0; i < n_; ++i) {
      const auto d = distances_from(i);
      for (int j = 0; j < n_; ++j) diam = std::max(diam, d[static_cast<std::size_t>(j)]);
    }
    return diam;
  }

 private:
  void check_vertex(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("Graph: vertex index out of range");
  }

  std::vector<int> bfs_from(int src) const {
    std::vector<int> d(static_cast<std::size_t>(n_), kUnreachable);
    std::deque<int> queue{src};
    d[static_cast<std::size_t>(src)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj_[static_cast<std::size_t>(u)])
        if (d[static_cast<std::size_t>(v)] == kUnreachable) {
          d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
    }
    return d;
  }

  void build_distance_cache() {
    dist_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
    for (int i = 0; i < n_; ++i) {
      const auto d = bfs_from(i);
      for (int j = 0; j < n_; ++j)
        dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] = static_cast<std::uint16_t>(d[static_cast<std::size_t>(j)]);
    }
  }

  int n_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::uint16_t> dist_;  // all-pairs cache, row-major; empty above the size limit
};

// --- small graph factories -------------------------------------------------

inline Graph make_path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

inline Graph make_cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n > 2) e.emplace_back(0, n - 1);
  return Graph(n, e);
}

inline Graph make_complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

inline Graph make_star(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph(leaves + 1, e);
}

// --- polynomial growth -----------------------------------------------------

struct GrowthEstimate {
  double dimension = 0.0;  // d
  double density = 0.0;    // minimal D1 with |B(i,R)| <= D1 (R+1)^d
};

// Minimal D1 such that |B(i, R)| <= D1 (R+1)^d for all vertices i and all
// integer radii 0 <= R <= diameter, by exhaustive scan.
inline GrowthEstimate estimate_growth(const Graph& g, double d) {
  if (d <= 0.0) throw std::invalid_argument("estimate_growth: dimension must be positive");
  double density = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    const auto dist = g.distances_from(i);
    const int maxd = *std::max_element(dist.begin(), dist.end());
    std::vector<int> count(static_cast<std::size_t>(maxd) + 1, 0);
    for (int j = 0; j < g.n(); ++j) ++count[static_cast<std::size_t>(dist[static_cast<std::size_t>(j)])];
    int ball_size = 0;
    for (int R = 0; R <= maxd; ++R) {
      ball_size += count[static_cast<std::size_t>(R)];
      density = std::max(density, ball_size / std::pow(R + 1.0, d));
    }
  }
  return {d, density};
}

// --- geodesic width ----------------------------------------------------------

// Max geodesic distance between the embedded row and column vertices of the
// nonzero entries; 0 for empty or diagonal-only matrices. Default embedding
// treats labels as vertices.
inline int geodesic_width(const Graph& g, const SparseMatrix& m,
                          const std::function<int(int)>& row_embed = {},
                          const std::function<int(int)>& col_embed = {}) {
  int w = 0;
  for (const Triplet& t : m.entries()) {
    const int ri = row_embed ? row_embed(t.row) : t.row;
    const int cj = col_embed ? col_embed(t.col) : t.col;
    w = std::max(w, g.distance(ri, cj));
  }
  return w;
}

// --- Laplacian ----------------------------------------------------------------

inline SparseMatrix laplacian(const Graph& g) {
  std::vector<int> labels(static_cast<std::size_t>(g.n()));
  std::iota(labels.begin(), labels.end(), 0);
  std::vector<Triplet> e;
  for (int i = 0; i < g.n(); ++i) {
    e.push_back({i, i, static_cast<double>(g.degree(i))});
    for (int j : g.neighbors(i)) e.push_back({i, j, -1.0});
  }
  return SparseMatrix::from_triplets(labels, labels, std::move(e));
}

// --- random geometric graph -----------------------------------------------

struct Rgg {
  Graph graph;
  std::vector<std::array<double, 2>> positions;
};

// Connectivity threshold from the experiment setup.
inline double rgg_threshold(int n) { return std::sqrt(3.0 * std::log(static_cast<double>(n)) / n); }

// n points uniform in [0,1]^2 (x then y per vertex, in vertex order); edge
// iff Euclidean distance < threshold. Redraws positions from the same stream
// until the graph is connected, at most 100 times.
inline Rgg random_geometric_graph(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_geometric_graph: need n >= 2");
  const double tau = rgg_threshold(n);
  const double tau2 = tau * tau;
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<std::array<double, 2>> pos(static_cast<std::size_t>(n));
    for (auto& p : pos) {
      p[0] = rng.uniform01();
      p[1] = rng.uniform01();
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        const double dx = pos[static_cast<std::size_t>(u)][0] - pos[static_cast<std::size_t>(v)][0];
        const double dy = pos[static_cast<std::size_t>(u)][1] - pos[static_cast<std::size_t>(v)][1];
        if (dx * dx + dy * dy < tau2) {
          adj[static_cast<std::size_t>(u)].push_back(v);
          adj[static_cast<std::size_t>(v)].push_back(u);
          edges.emplace_back(u, v);
        }
      }
    if (detail::adjacency_connected(n, adj)) return {Graph(n, edges), std::move(pos)};
  }
  throw std::runtime_error("random_geometric_graph: no connected draw in 100 attempts");
}

// --- edge-list text format ---------------------------------------------------
// First line: n. Then one "u v" edge per line, 0-based with u < v, LF-ended.
// Positions sidecar: one "i x y" line per vertex.

inline void write_edge_list(const Graph& g, std::ostream& os) {
  os << g.n() << "\n";
  for (auto [u, v] : g.edges()) os << u << " " << v << "\n";
}

inline Graph read_edge_list(std::istream& is) {
  int n = 0;
  if (!(is >> n)) throw std::invalid_argument("read_edge_list: missing vertex count");
  std::vector<std::pair<int, int>> edges;
  int u = 0, v = 0;
  while (is >> u >> v) edges.emplace_back(u, v);
  return Graph(n, edges);
}

inline void write_positions(const std::vector<std::array<double, 2>>& pos, std::ostream& os) {
  os.precision(17);
  for (std::size_t i = 0; i < pos.size(); ++i) os << i << " " << pos[i][0] << " " << pos[i][1] << "\n";
}

inline std::vector<std::array<double, 2>> read_positions(std::istream& is) {
  std::vector<std::array<double, 2>> pos;
  int i = 0;
  double x = 0.0, y = 0.0;
  while (is >> i >> x >> y) {
    if (static_cast<std::size_t>(i) != pos.size()) throw std::invalid_argument("read_positions: indices must be sequential");
    pos.push_back({x, y});
  }
  return pos;
}

}  // namespace dacnet
