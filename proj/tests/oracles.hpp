#pragma once

// Brute-force reference computations. They share no code with the library
// beyond the graph container, so a bug has to be made twice to go unnoticed.

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "scoregraph/graph.hpp"

namespace oracle {

// p[h][l][m] for the social ranking kernel, scalar formula with |l - m|.
inline std::vector<std::vector<std::vector<double>>> kernel(double theta, int C, int R) {
  std::vector<std::vector<std::vector<double>>> p(R, std::vector<std::vector<double>>(C, std::vector<double>(C)));
  for (int l = 0; l < C; ++l) {
    for (int m = 0; m < C; ++m) {
      // weights relative to the closest score, so tiny theta does not underflow
      double closest = 1e300;
      for (int h = 1; h <= R; ++h) closest = std::min(closest, std::abs(double(R - h) / R - std::abs(l - m) / double(C)));
      double psi = 0.0;
      std::vector<double> w(R);
      for (int h = 1; h <= R; ++h) {
        const double a = double(R - h) / R - std::abs(l - m) / double(C);
        w[h - 1] = std::exp(-(a * a - closest * closest) / (theta * theta));
        psi += w[h - 1];
      }
      for (int h = 0; h < R; ++h) p[h][l][m] = w[h] / psi;
    }
  }
  return p;
}

inline double choose(int n, int k) {
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

inline std::vector<double> prior(double gamma, int C) {
  std::vector<double> p(C);
  for (int k = 0; k < C; ++k) p[k] = choose(C - 1, k) * std::pow(gamma, k) * std::pow(1 - gamma, C - 1 - k);
  return p;
}

// Advances a base-C odometer; false once it wraps around.
inline bool next_assignment(std::vector<int>& x, int C) {
  for (auto& v : x) {
    if (++v < C) return true;
    v = 0;
  }
  return false;
}

// P(X_i | scores on edges incident to i), summing over all C^N joint states.
inline std::vector<double> ego_posterior(const scoregraph::ScoreGraph& g, const std::vector<int>& scores,
                                         double theta, double gamma, int C, int R, int node) {
  const auto p = kernel(theta, C, R);
  const auto pr = prior(gamma, C);
  std::vector<double> post(C, 0.0);
  std::vector<int> x(g.num_nodes(), 0);
  do {
    double w = 1.0;
    for (int v = 0; v < g.num_nodes(); ++v) w *= pr[x[v]];
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto& ed = g.edges()[e];
      if (ed.from != node && ed.to != node) continue;
      w *= p[scores[e]][x[ed.from]][x[ed.to]];
    }
    post[x[node]] += w;
  } while (next_assignment(x, C));
  double z = 0.0;
  for (double v : post) z += v;
  for (double& v : post) v /= z;
  return post;
}

// log P(received scores of i) with every evaluator given its own independent
// virtual state; enumerates C^(1 + in-degree) joint states.
inline double relaxed_node_log_likelihood(const std::vector<int>& received, double theta, double gamma,
                                          int C, int R) {
  const auto p = kernel(theta, C, R);
  const auto pr = prior(gamma, C);
  std::vector<int> x(received.size() + 1, 0);
  double total = 0.0;
  do {
    double w = pr[x[0]];
    for (std::size_t j = 0; j < received.size(); ++j) w *= pr[x[j + 1]] * p[received[j]][x[j + 1]][x[0]];
    total += w;
  } while (next_assignment(x, C));
  return std::log(total);
}

struct ScanStats {
  std::vector<std::vector<int>> mutual;  // [given][received]
  std::vector<int> in_only, out_only, total_in;
};

// Scans every ordered pair through the flat edge list.
inline ScanStats scan_stats(const scoregraph::ScoreGraph& g, const std::vector<int>& scores, int R, int i) {
  auto find = [&](int a, int b) {
    for (int e = 0; e < g.num_edges(); ++e) {
      if (g.edges()[e].from == a && g.edges()[e].to == b) return e;
    }
    return -1;
  };
  ScanStats s{std::vector<std::vector<int>>(R, std::vector<int>(R, 0)), std::vector<int>(R, 0),
              std::vector<int>(R, 0), std::vector<int>(R, 0)};
  for (int j = 0; j < g.num_nodes(); ++j) {
    if (j == i) continue;
    const int out = find(i, j), in = find(j, i);
    if (in >= 0) ++s.total_in[scores[in]];
    if (in >= 0 && out >= 0) ++s.mutual[scores[out]][scores[in]];
    else if (in >= 0) ++s.in_only[scores[in]];
    else if (out >= 0) ++s.out_only[scores[out]];
  }
  return s;
}

// Strong connectivity by forward and backward reachability from node 0.
inline bool strongly_connected(int n, const std::vector<scoregraph::Edge>& edges) {
  if (n <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::deque<int> q{0};
    seen[0] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const auto& e : edges) {
        const int a = forward ? e.from : e.to, b = forward ? e.to : e.from;
        if (a == u && !seen[b]) {
          seen[b] = 1;
          q.push_back(b);
        }
      }
    }
    for (char c : seen) {
      if (!c) return false;
    }
    return true;
  };
  return reach(true) && reach(false);
}

}  // namespace oracle
