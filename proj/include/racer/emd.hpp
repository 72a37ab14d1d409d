#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "racer/errors.hpp"
#include "racer/geometry.hpp"
#include "racer/image.hpp"

namespace racer {

/// Image whose total absolute mass sits on a single pixel.
struct DeltaImage {
  Extent extent;
  PixelCoord location;
  double mass = 0.0;

  ImageGrid to_image() const {
    ImageGrid out(extent.height, extent.width, 0.0);
    out[location] = mass;
    return out;
  }
};

inline DeltaImage delta_image(const ImageGrid& image, const PixelCoord& p) {
  if (!image.extent().contains(p)) throw DomainError("delta location " + to_string(p) + " outside image");
  double mass = 0.0;
  for (double v : image.values()) mass += std::abs(v);
  return {image.extent(), p, mass};
}

/// Closed-form EMD between a non-negative image and its delta-image at p:
/// sum_s I(s) d(s, p) / E with E the total mass.
inline double emd_to_delta(const ImageGrid& image, const PixelCoord& p, Metric metric = Metric::composed) {
  if (!image.extent().contains(p)) throw DomainError("delta location " + to_string(p) + " outside image");
  double mass = 0.0;
  double moved = 0.0;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double v = image(r, c);
      mass += std::abs(v);
      if (v != 0.0) moved += v * distance({r, c}, p, metric);
    }
  }
  if (!(mass > 0.0)) throw NoMassError();
  return moved / mass;
}

/// Largest extent (per axis) accepted by emd_exact.
inline constexpr int kEmdOracleMaxSide = 8;

namespace detail {

/// Successive-shortest-path min-cost flow on a small dense graph.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : adj_(nodes) {}

  void add_edge(int from, int to, double cap, double cost) {
    adj_[from].push_back({to, static_cast<int>(adj_[to].size()), cap, cost});
    adj_[to].push_back({from, static_cast<int>(adj_[from].size()) - 1, 0.0, -cost});
  }

  /// Sends up to `amount` from s to t; returns {flow, cost}.
  std::pair<double, double> run(int s, int t, double amount) {
    const int n = static_cast<int>(adj_.size());
    const double inf = std::numeric_limits<double>::infinity();
    const double eps = 1e-12 * std::max(1.0, amount);
    std::vector<double> potential(n, 0.0);
    double flow = 0.0;
    double cost = 0.0;
    while (amount - flow > eps) {
      // Dijkstra with reduced costs (dense O(V^2)).
      std::vector<double> dist(n, inf);
      std::vector<int> prev_node(n, -1);
      std::vector<int> prev_edge(n, -1);
      std::vector<char> done(n, 0);
      dist[s] = 0.0;
      for (int iter = 0; iter < n; ++iter) {
        int u = -1;
        for (int v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < inf && (u < 0 || dist[v] < dist[u])) u = v;
        }
        if (u < 0) break;
        done[u] = 1;
        for (int e = 0; e < static_cast<int>(adj_[u].size()); ++e) {
          const Edge& edge = adj_[u][e];
          if (edge.cap <= eps) continue;
          const double reduced = edge.cost + potential[u] - potential[edge.to];
          const double nd = dist[u] + std::max(0.0, reduced);
          if (nd < dist[edge.to]) {
            dist[edge.to] = nd;
            prev_node[edge.to] = u;
            prev_edge[edge.to] = e;
          }
        }
      }
      if (dist[t] == inf) break;
      for (int v = 0; v < n; ++v) {
        if (dist[v] < inf) potential[v] += dist[v];
      }
      double push = amount - flow;
      for (int v = t; v != s; v = prev_node[v]) {
        push = std::min(push, adj_[prev_node[v]][prev_edge[v]].cap);
      }
      for (int v = t; v != s; v = prev_node[v]) {
        Edge& edge = adj_[prev_node[v]][prev_edge[v]];
        edge.cap -= push;
        adj_[v][edge.rev].cap += push;
        cost += push * edge.cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

 private:
  struct Edge {
    int to;
    int rev;
    double cap;
    double cost;
  };
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace detail

/// Exact EMD between two non-negative images on the same grid, solved as a
/// transportation problem. Oracle use only: extents are capped at 8x8.
inline double emd_exact(const ImageGrid& a, const ImageGrid& b, Metric metric = Metric::composed) {
  if (a.extent() != b.extent()) throw DomainError("emd_exact: image extents differ");
  if (a.height() > kEmdOracleMaxSide || a.width() > kEmdOracleMaxSide) {
    throw OracleSizeError("emd_exact is limited to " + std::to_string(kEmdOracleMaxSide) + "x" +
                          std::to_string(kEmdOracleMaxSide) + " images, got " +
                          std::to_string(a.height()) + "x" + std::to_string(a.width()));
  }
  std::vector<PixelCoord> src;
  std::vector<PixelCoord> dst;
  std::vector<double> supply;
  std::vector<double> demand;
  double mass_a = 0.0;
  double mass_b = 0.0;
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      if (a(r, c) < 0.0 || b(r, c) < 0.0) throw DomainError("emd_exact: negative intensity");
      if (a(r, c) > 0.0) {
        src.push_back({r, c});
        supply.push_back(a(r, c));
        mass_a += a(r, c);
      }
      if (b(r, c) > 0.0) {
        dst.push_back({r, c});
        demand.push_back(b(r, c));
        mass_b += b(r, c);
      }
    }
  }
  if (!(mass_a > 0.0) || !(mass_b > 0.0)) throw NoMassError();

  const int ns = static_cast<int>(src.size());
  const int nd = static_cast<int>(dst.size());
  const int source = ns + nd;
  const int sink = source + 1;
  detail::MinCostFlow graph(ns + nd + 2);
  const double unbounded = mass_a + mass_b;
  for (int i = 0; i < ns; ++i) graph.add_edge(source, i, supply[i], 0.0);
  for (int j = 0; j < nd; ++j) graph.add_edge(ns + j, sink, demand[j], 0.0);
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nd; ++j) graph.add_edge(i, ns + j, unbounded, distance(src[i], dst[j], metric));
  }
  const auto [flow, cost] = graph.run(source, sink, std::min(mass_a, mass_b));
  return cost / flow;
}

}  // namespace racer
