#include "switchsde/transport.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "switchsde/errors.hpp"

namespace switchsde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) raise(errc::invalid_argument, "cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) raise(errc::empty_support, "empty cost matrix");

  // Shortest augmenting paths with row/column potentials (Jonker-Volgenant
  // style, O(n^3)).  Column n is a virtual slot holding the row being placed.
  std::vector<double> row_pot(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> col_pot(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, n);  // column -> row, n = free
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int row = 0; row < n; ++row) {
    match[static_cast<std::size_t>(n)] = row;
    int j0 = n;
    std::vector<double> min_slack(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 0; j < n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double slack = cost(i0, j) - row_pot[static_cast<std::size_t>(i0)] -
                             col_pot[static_cast<std::size_t>(j)];
        if (slack < min_slack[static_cast<std::size_t>(j)]) {
          min_slack[static_cast<std::size_t>(j)] = slack;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack[static_cast<std::size_t>(j)] < delta) {
          delta = min_slack[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          row_pot[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          col_pot[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_slack[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != n);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != n);
  }

  double total = 0.0;
  for (int j = 0; j < n; ++j) total += cost(match[static_cast<std::size_t>(j)], j);
  return total;
}

namespace {

// State for one successive-shortest-path round over the bipartite residual
// graph.  Potentials keep reduced costs nonnegative throughout.
struct TransportState {
  const Eigen::MatrixXd& cost;
  Eigen::VectorXd supply_left;
  Eigen::VectorXd demand_left;
  Eigen::VectorXd source_pot;
  Eigen::VectorXd sink_pot;
  Eigen::MatrixXd flow;
};

}  // namespace

double solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                       const Eigen::VectorXd& demand) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  if (cost.rows() != n || cost.cols() != m)
    raise(errc::invalid_argument, "cost matrix does not match supply/demand sizes");
  if (n == 0 || m == 0) raise(errc::empty_support, "empty marginal");
  if (supply.minCoeff() < 0.0 || demand.minCoeff() < 0.0)
    raise(errc::invalid_argument, "marginals must be nonnegative");
  if (std::abs(supply.sum() - demand.sum()) > 1e-9 * std::max(1.0, supply.sum()))
    raise(errc::invalid_argument, "supply and demand totals differ");

  TransportState st{cost,
                    supply,
                    demand,
                    Eigen::VectorXd::Zero(n),
                    Eigen::VectorXd::Zero(m),
                    Eigen::MatrixXd::Zero(n, m)};

  const double total = supply.sum();
  double shipped = 0.0;
  const long round_cap = 64L * (n + m) + 64;
  long rounds = 0;

  while (shipped < total * (1.0 - 1e-14) && total > 0.0) {
    if (++rounds > round_cap)
      raise(errc::no_convergence, "transportation solver exceeded its round budget");

    // Multi-source Dijkstra with reduced costs.  Forward arc i->j costs
    // cost(i,j) + source_pot(i) - sink_pot(j); residual arc j->i (flow > 0)
    // costs the negation.  Both are nonnegative by the potential invariant.
    std::vector<double> dist_src(static_cast<std::size_t>(n), kInf);
    std::vector<double> dist_snk(static_cast<std::size_t>(m), kInf);
    std::vector<bool> done_src(static_cast<std::size_t>(n), false);
    std::vector<bool> done_snk(static_cast<std::size_t>(m), false);
    std::vector<int> from_source(static_cast<std::size_t>(m), -1);
    std::vector<int> from_sink(static_cast<std::size_t>(n), -1);

    for (int i = 0; i < n; ++i)
      if (st.supply_left(i) > 0.0) dist_src[static_cast<std::size_t>(i)] = 0.0;

    int target = -1;
    double target_dist = kInf;
    while (target < 0) {
      double best = kInf;
      int idx = -1;
      bool is_source = true;
      for (int i = 0; i < n; ++i)
        if (!done_src[static_cast<std::size_t>(i)] &&
            dist_src[static_cast<std::size_t>(i)] < best) {
          best = dist_src[static_cast<std::size_t>(i)];
          idx = i;
          is_source = true;
        }
      for (int j = 0; j < m; ++j)
        if (!done_snk[static_cast<std::size_t>(j)] &&
            dist_snk[static_cast<std::size_t>(j)] < best) {
          best = dist_snk[static_cast<std::size_t>(j)];
          idx = j;
          is_source = false;
        }
      if (idx < 0) break;
      if (is_source) {
        done_src[static_cast<std::size_t>(idx)] = true;
        for (int j = 0; j < m; ++j) {
          if (done_snk[static_cast<std::size_t>(j)]) continue;
          const double reduced = cost(idx, j) + st.source_pot(idx) - st.sink_pot(j);
          const double candidate = best + reduced;
          if (candidate < dist_snk[static_cast<std::size_t>(j)]) {
            dist_snk[static_cast<std::size_t>(j)] = candidate;
            from_source[static_cast<std::size_t>(j)] = idx;
          }
        }
      } else {
        done_snk[static_cast<std::size_t>(idx)] = true;
        if (st.demand_left(idx) > 0.0) {
          target = idx;
          target_dist = best;
          break;
        }
        for (int i = 0; i < n; ++i) {
          if (done_src[static_cast<std::size_t>(i)] || st.flow(i, idx) <= 0.0) continue;
          const double reduced = -(cost(i, idx) + st.source_pot(i) - st.sink_pot(idx));
          const double candidate = best + reduced;
          if (candidate < dist_src[static_cast<std::size_t>(i)]) {
            dist_src[static_cast<std::size_t>(i)] = candidate;
            from_sink[static_cast<std::size_t>(i)] = idx;
          }
        }
      }
    }
    if (target < 0) raise(errc::no_convergence, "transportation network disconnected");

    // Bottleneck along the augmenting path back to an open source.
    double bottleneck = st.demand_left(target);
    int path_source = -1;
    {
      int j = target;
      while (true) {
        const int i = from_source[static_cast<std::size_t>(j)];
        if (from_sink[static_cast<std::size_t>(i)] < 0) {
          bottleneck = std::min(bottleneck, st.supply_left(i));
          path_source = i;
          break;
        }
        const int jb = from_sink[static_cast<std::size_t>(i)];
        bottleneck = std::min(bottleneck, st.flow(i, jb));
        j = jb;
      }
    }
    {
      int j = target;
      while (true) {
        const int i = from_source[static_cast<std::size_t>(j)];
        st.flow(i, j) += bottleneck;
        if (i == path_source) break;
        const int jb = from_sink[static_cast<std::size_t>(i)];
        st.flow(i, jb) -= bottleneck;
        j = jb;
      }
      st.supply_left(path_source) -= bottleneck;
      st.demand_left(target) -= bottleneck;
    }
    shipped += bottleneck;

    // Johnson update capped at the target distance keeps all reduced costs
    // nonnegative, including for nodes the search never settled.
    for (int i = 0; i < n; ++i)
      st.source_pot(i) += std::min(dist_src[static_cast<std::size_t>(i)], target_dist);
    for (int j = 0; j < m; ++j)
      st.sink_pot(j) += std::min(dist_snk[static_cast<std::size_t>(j)], target_dist);
  }

  return st.flow.cwiseProduct(cost).sum();
}

}  // namespace switchsde
