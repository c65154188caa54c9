#include "consensus/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "detail/expm.hpp"

namespace consensus {

namespace {

std::vector<std::vector<int>> adjacency(int n, const std::vector<Edge>& edges,
                                        bool reversed) {
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) {
    if (reversed) {
      adj[e.target].push_back(e.source);
    } else {
      adj[e.source].push_back(e.target);
    }
  }
  return adj;
}

bool reaches_all(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> frontier;
  frontier.push(start);
  seen[start] = 1;
  std::size_t count = 1;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == adj.size();
}

}  // namespace

WeightedDigraph::WeightedDigraph(int node_count, std::vector<Edge> edges)
    : n_(node_count), edges_(std::move(edges)) {
  if (n_ <= 0) {
    throw std::invalid_argument("graph: node count must be positive");
  }
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.source < 0 || e.source >= n_ || e.target < 0 || e.target >= n_) {
      throw std::invalid_argument("graph: edge (" + std::to_string(e.source) +
                                  "," + std::to_string(e.target) +
                                  ") out of range");
    }
    if (e.source == e.target) {
      throw std::invalid_argument("graph: self-loop at node " +
                                  std::to_string(e.source));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("graph: non-positive weight on edge (" +
                                  std::to_string(e.source) + "," +
                                  std::to_string(e.target) + ")");
    }
    if (!seen.insert({e.source, e.target}).second) {
      throw std::invalid_argument("graph: duplicate edge (" +
                                  std::to_string(e.source) + "," +
                                  std::to_string(e.target) + ")");
    }
  }
}

bool WeightedDigraph::is_symmetric() const {
  std::map<std::pair<int, int>, double> w;
  for (const Edge& e : edges_) {
    w[{e.source, e.target}] = e.weight;
  }
  for (const Edge& e : edges_) {
    auto it = w.find({e.target, e.source});
    if (it == w.end() || it->second != e.weight) {
      return false;
    }
  }
  return true;
}

PerronVector PerronVector::uniform(int n) {
  if (n <= 0) {
    throw std::invalid_argument("perron: dimension must be positive");
  }
  return PerronVector{Eigen::VectorXd::Constant(n, 1.0 / n)};
}

LaplacianMatrix build_laplacian(const WeightedDigraph& g) {
  const int n = g.node_count();
  LaplacianMatrix L;
  L.entries = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    L.entries(e.source, e.target) = -e.weight;
    L.entries(e.source, e.source) += e.weight;
  }
  L.symmetric = true;
  for (int i = 0; i < n && L.symmetric; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (L.entries(i, j) != L.entries(j, i)) {
        L.symmetric = false;
        break;
      }
    }
  }
  L.balanced = (L.entries.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  return L;
}

IncidenceMatrix incidence(const WeightedDigraph& g) {
  if (!g.is_symmetric()) {
    throw std::invalid_argument(
        "incidence: undirected incidence requested for a non-symmetric graph");
  }
  std::set<std::pair<int, int>> undirected;
  for (const Edge& e : g.edges()) {
    undirected.insert({std::min(e.source, e.target),
                       std::max(e.source, e.target)});
  }
  IncidenceMatrix M;
  M.edge_order.assign(undirected.begin(), undirected.end());
  M.entries = Eigen::MatrixXd::Zero(static_cast<int>(M.edge_order.size()),
                                    g.node_count());
  for (std::size_t r = 0; r < M.edge_order.size(); ++r) {
    M.entries(static_cast<int>(r), M.edge_order[r].first) = 1.0;
    M.entries(static_cast<int>(r), M.edge_order[r].second) = -1.0;
  }
  return M;
}

bool is_strongly_connected(const WeightedDigraph& g) {
  const auto fwd = adjacency(g.node_count(), g.edges(), false);
  const auto rev = adjacency(g.node_count(), g.edges(), true);
  return reaches_all(fwd, 0) && reaches_all(rev, 0);
}

WeightedDigraph graph_from_laplacian(const LaplacianMatrix& L) {
  const int n = L.size();
  if (L.entries.cols() != n) {
    throw std::invalid_argument("laplacian: matrix must be square");
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = L.entries(i, j);
      if (v > 0.0) {
        throw std::invalid_argument(
            "laplacian: positive off-diagonal entry at (" + std::to_string(i) +
            "," + std::to_string(j) + ")");
      }
      if (v < 0.0) {
        edges.push_back({i, j, -v});
      }
    }
  }
  return WeightedDigraph(n, std::move(edges));
}

PerronVector perron_vector(const LaplacianMatrix& L) {
  const int n = L.size();
  const double scale = L.entries.cwiseAbs().maxCoeff();
  if (!is_strongly_connected(graph_from_laplacian(L))) {
    throw std::domain_error(
        "perron: Perron vector not unique/positive (system is reducible)");
  }
  if (n == 1) {
    return PerronVector{Eigen::VectorXd::Ones(1)};
  }

  // q^T L = 0 with the last equation replaced by sum(q) = 1.
  Eigen::MatrixXd A = L.entries.transpose();
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd q = A.partialPivLu().solve(b);

  const double norm_L = L.entries.cwiseAbs().rowwise().sum().maxCoeff();
  double residual = (q.transpose() * L.entries).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-12 * std::max(1.0, norm_L)) || q.minCoeff() <= 0.0) {
    // Power iteration on the transition matrix of one flow step.
    const double dt = 1.0 / std::max(norm_L, 1e-300);
    Eigen::MatrixXd P = detail::expm(-dt * L.entries);
    q = Eigen::VectorXd::Constant(n, 1.0 / n);
    for (int iter = 0; iter < 200000; ++iter) {
      Eigen::VectorXd next = P.transpose() * q;
      next /= next.lpNorm<1>();
      const double delta = (next - q).cwiseAbs().maxCoeff();
      q = next;
      if (delta < 1e-15) break;
    }
    residual = (q.transpose() * L.entries).cwiseAbs().maxCoeff();
  }
  if (!(residual <= 1e-10 * std::max(scale, 1e-300)) || q.minCoeff() <= 0.0) {
    throw std::runtime_error("perron: failed to compute a positive left null "
                             "vector (residual " +
                             std::to_string(residual) + ")");
  }
  q /= q.lpNorm<1>();
  return PerronVector{q};
}

WeightedDigraph read_edge_list(std::istream& in) {
  std::string line;
  int n = -1;
  std::vector<Edge> edges;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      ls >> tag >> n;
      if (tag != "n" || ls.fail() || n <= 0) {
        throw std::invalid_argument(
            "edge list: expected header \"n <count>\" at line " +
            std::to_string(lineno));
      }
      continue;
    }
    Edge e;
    ls >> e.source >> e.target >> e.weight;
    if (ls.fail()) {
      throw std::invalid_argument("edge list: malformed edge at line " +
                                  std::to_string(lineno));
    }
    edges.push_back(e);
  }
  if (n < 0) {
    throw std::invalid_argument("edge list: missing header \"n <count>\"");
  }
  return WeightedDigraph(n, std::move(edges));
}

WeightedDigraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("edge list: cannot open " + path);
  }
  return read_edge_list(in);
}

void write_edge_list(const WeightedDigraph& g, std::ostream& out) {
  out << "n " << g.node_count() << "\n";
  char buf[64];
  for (const Edge& e : g.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    out << e.source << " " << e.target << " " << buf << "\n";
  }
}

}  // namespace consensus
