#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gridquant {

/// Undirected, unweighted, connected graph on nodes 0..N-1.
class GraphSpec {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Validates the edge set: no self-loops, no duplicates, indices in range, connected.
  GraphSpec(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return node_count_; }
  /// Edges with first < second, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::vector<std::size_t>>& adjacency() const noexcept { return adjacency_; }
  std::size_t degree(std::size_t node) const { return adjacency_.at(node).size(); }

  /// Number of directed sender/receiver pairs, 2|E|.
  std::size_t directed_link_count() const noexcept { return 2 * edges_.size(); }

  static GraphSpec path(std::size_t n);
  static GraphSpec complete(std::size_t n);

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

bool is_connected(std::size_t node_count, const std::vector<GraphSpec::Edge>& edges);

/// W_ij = -1 on edges, W_ii = degree(i).
Eigen::MatrixXd laplacian(const GraphSpec& g);

/// Nodes uniform in the unit square, edge iff distance < radius. Resamples until the
/// graph is connected; throws Errc::ConnectivityTimeout after max_attempts draws.
GraphSpec random_geometric_graph(std::size_t n, double radius, std::uint64_t seed,
                                 std::size_t max_attempts = 1000);

/// Edge-list text format: first line N, then one "i j" pair per line, 0-indexed.
GraphSpec read_edge_list(std::istream& in);
GraphSpec load_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const GraphSpec& g);

}  // namespace gridquant
