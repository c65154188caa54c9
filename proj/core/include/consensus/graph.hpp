#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace consensus {

/// One directed edge i -> j carrying a strictly positive coupling weight.
struct Edge {
  int source = 0;
  int target = 0;
  double weight = 1.0;
};

/// Weighted directed graph on nodes 0..n-1.
///
/// Construction validates: positive finite weights, no self-loops, node
/// indices in range, at most one edge per ordered pair (duplicates are an
/// error, not merged). Immutable afterwards.
class WeightedDigraph {
 public:
  WeightedDigraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// True iff every directed edge (i,j,w) has the mirror (j,i,w) with the
  /// exact same weight.
  bool is_symmetric() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

/// Graph Laplacian per the standard convention: off-diagonal -w_ij for edges,
/// diagonal the sum of outgoing weights, so rows sum to zero and -Lx gives
/// the componentwise coupling sum w_ij (x_j - x_i).
struct LaplacianMatrix {
  Eigen::MatrixXd entries;
  bool symmetric = false;  ///< entries(i,j) == entries(j,i) exactly
  bool balanced = false;   ///< column sums vanish too (|.| <= 1e-12)

  int size() const { return static_cast<int>(entries.rows()); }
};

/// Signed node-to-edge incidence matrix over unordered edges: the row for
/// edge {i,j} with i < j has +1 at i and -1 at j. Rows follow `edge_order`.
struct IncidenceMatrix {
  Eigen::MatrixXd entries;
  std::vector<std::pair<int, int>> edge_order;
};

/// Positive left null vector of L with unit 1-norm.
struct PerronVector {
  Eigen::VectorXd q;

  static PerronVector uniform(int n);
};

LaplacianMatrix build_laplacian(const WeightedDigraph& g);

/// Undirected incidence matrix. Errors if the graph is not symmetric.
IncidenceMatrix incidence(const WeightedDigraph& g);

bool is_strongly_connected(const WeightedDigraph& g);

/// Solves q^T L = 0, q > 0, ||q||_1 = 1. Errors on reducible systems
/// ("Perron vector not unique/positive").
PerronVector perron_vector(const LaplacianMatrix& L);

/// Recovers the digraph encoded by the strictly negative off-diagonal
/// entries of a Laplacian.
WeightedDigraph graph_from_laplacian(const LaplacianMatrix& L);

/// Edge-list text format: header line "n <count>", then one "i j w" line per
/// edge (0-based indices). Lines starting with '#' are ignored.
WeightedDigraph read_edge_list(std::istream& in);
WeightedDigraph read_edge_list_file(const std::string& path);
void write_edge_list(const WeightedDigraph& g, std::ostream& out);

}  // namespace consensus
