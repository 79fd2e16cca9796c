#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacnet/graph.hpp"
#include "dacnet/rng.hpp"
#include "dacnet/sparse.hpp"

namespace dacnet {

// Greedy maximal packing: pick a uniformly random remaining vertex, keep it
// as a center, delete its 2R-ball from the pool, repeat until the pool is
// empty. Returned sorted. Any two centers end up more than 2R apart.
inline std::vector<int> select_fusion_centers(const Graph& g, int R, std::uint64_t seed) {
  if (R < 1) throw std::invalid_argument("select_fusion_centers: R must be positive");
  Rng rng(seed);
  std::vector<int> pool(static_cast<std::size_t>(g.n()));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> centers;
  while (!pool.empty()) {
    const auto pick = pool[static_cast<std::size_t>(rng.uniform_below(pool.size()))];
    centers.push_back(pick);
    const auto removed = g.ball(pick, 2 * R);
    std::vector<int> next;
    std::set_difference(pool.begin(), pool.end(), removed.begin(), removed.end(), std::back_inserter(next));
    pool = std::move(next);
  }
  std::sort(centers.begin(), centers.end());
  return centers;
}

// Nearest-center assignment by geodesic distance; ties go to the smallest
// center label. Regions cover V and are pairwise disjoint.
inline std::map<int, std::vector<int>> voronoi_regions(const Graph& g, const std::vector<int>& centers) {
  if (centers.empty()) throw std::invalid_argument("voronoi_regions: no centers");
  std::map<int, std::vector<int>> regions;
  for (int c : centers) regions[c] = {};
  for (int v = 0; v < g.n(); ++v) {
    int best = -1;
    int best_d = Graph::kUnreachable;
    for (int c : centers) {
      const int d = g.distance(c, v);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    regions[best].push_back(v);
  }
  return regions;
}

// Per-center data of a fusion-center partition: governing region D,
// extended neighborhood D_R = B(D, R), its l-neighborhoods for
// l in {m, 2m, 4m}, the local constraint row set, and the communication
// topology over centers.
struct CenterData {
  int center = -1;
  std::vector<int> region;      // D, sorted
  std::vector<int> extended;    // D_R
  std::vector<int> nb_m;        // D_{R,m}
  std::vector<int> nb_2m;       // D_{R,2m}
  std::vector<int> nb_4m;       // D_{R,4m}
  std::vector<int> w_rows;      // rows k of A with a(k,j) != 0 for some j in D_R
  std::vector<int> out_nbrs;    // center labels lambda' with D inter D'_{R,4m} nonempty
  std::vector<int> in_nbrs;     // center labels lambda' with D' inter D_{R,4m} nonempty
};

struct Partition {
  int R = 0;
  int m = 0;
  std::vector<CenterData> centers;  // sorted by center label
  std::vector<int> owner;           // vertex -> index into centers

  const CenterData& by_center(int label) const {
    for (const auto& c : centers)
      if (c.center == label) return c;
    throw std::invalid_argument("Partition: unknown center " + std::to_string(label));
  }
};

inline Partition build_partition(const Graph& g, const std::vector<int>& centers,
                                 const std::map<int, std::vector<int>>& regions, int R, int m,
                                 const SparseMatrix& A) {
  if (R < 1 || m < 1) throw std::invalid_argument("build_partition: R and m must be positive");
  Partition part;
  part.R = R;
  part.m = m;
  part.owner.assign(static_cast<std::size_t>(g.n()), -1);

  std::vector<int> sorted_centers = centers;
  std::sort(sorted_centers.begin(), sorted_centers.end());
  for (int label : sorted_centers) {
    const auto it = regions.find(label);
    if (it == regions.end() || it->second.empty())
      throw std::invalid_argument("build_partition: empty region for center " + std::to_string(label));
    CenterData c;
    c.center = label;
    c.region = it->second;
    std::sort(c.region.begin(), c.region.end());
    c.extended = g.ball_of_set(c.region, R);
    c.nb_m = g.ball_of_set(c.extended, m);
    c.nb_2m = g.ball_of_set(c.extended, 2 * m);
    c.nb_4m = g.ball_of_set(c.extended, 4 * m);
    for (int k : A.row_set()) {
      bool touches = false;
      A.for_each_in_row(k, [&](int j, double) {
        touches = touches || std::binary_search(c.extended.begin(), c.extended.end(), j);
      });
      if (touches) c.w_rows.push_back(k);
    }
    part.centers.push_back(std::move(c));
  }

  for (std::size_t ci = 0; ci < part.centers.size(); ++ci)
    for (int v : part.centers[ci].region) {
      if (part.owner[static_cast<std::size_t>(v)] != -1)
        throw std::invalid_argument("build_partition: overlapping regions");
      part.owner[static_cast<std::size_t>(v)] = static_cast<int>(ci);
    }
  for (int v = 0; v < g.n(); ++v)
    if (part.owner[static_cast<std::size_t>(v)] == -1)
      throw std::invalid_argument("build_partition: regions do not cover the graph");

  for (auto& c : part.centers) {
    for (const auto& other : part.centers) {
      const bool overlaps_out = std::ranges::any_of(
          c.region, [&](int v) { return std::binary_search(other.nb_4m.begin(), other.nb_4m.end(), v); });
      if (overlaps_out) c.out_nbrs.push_back(other.center);
      const bool overlaps_in = std::ranges::any_of(
          other.region, [&](int v) { return std::binary_search(c.nb_4m.begin(), c.nb_4m.end(), v); });
      if (overlaps_in) c.in_nbrs.push_back(other.center);
    }
  }
  return part;
}

// Debug/test dump: one line per center,
// "center L : D ... | D_R ... | W_R ...".
inline std::string partition_dump(const Partition& part) {
  std::ostringstream os;
  for (const auto& c : part.centers) {
    os << "center " << c.center << " :";
    for (int v : c.region) os << " " << v;
    os << " |";
    for (int v : c.extended) os << " " << v;
    os << " |";
    for (int k : c.w_rows) os << " " << k;
    os << "\n";
  }
  return os.str();
}

}  // namespace dacnet
