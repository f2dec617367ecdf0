#include "gridquant/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "gridquant/error.hpp"

namespace gridquant {

bool is_connected(std::size_t node_count, const std::vector<GraphSpec::Edge>& edges) {
  if (node_count == 0) return false;
  std::vector<std::size_t> parent(node_count);
  for (std::size_t i = 0; i < node_count; ++i) parent[i] = i;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = node_count;
  for (auto [a, b] : edges) {
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

GraphSpec::GraphSpec(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), adjacency_(node_count) {
  if (node_count_ < 1) raise(Errc::InvalidGraph, "graph needs at least one node");
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a >= node_count_ || b >= node_count_) {
      std::ostringstream msg;
      msg << "edge (" << a << ", " << b << ") references a node outside [0, " << node_count_ << ")";
      raise(Errc::InvalidGraph, msg.str());
    }
    if (a == b) raise(Errc::InvalidGraph, "self-loop on node " + std::to_string(a));
    const Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert(e).second) {
      std::ostringstream msg;
      msg << "duplicate edge (" << e.first << ", " << e.second << ")";
      raise(Errc::InvalidGraph, msg.str());
    }
  }
  edges_.assign(seen.begin(), seen.end());
  if (!is_connected(node_count_, edges_)) raise(Errc::Disconnected, "graph is not connected");
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

GraphSpec GraphSpec::path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return GraphSpec(n, std::move(edges));
}

GraphSpec GraphSpec::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return GraphSpec(n, std::move(edges));
}

Eigen::MatrixXd laplacian(const GraphSpec& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    const auto i = static_cast<Eigen::Index>(a);
    const auto j = static_cast<Eigen::Index>(b);
    w(i, j) = -1.0;
    w(j, i) = -1.0;
    w(i, i) += 1.0;
    w(j, j) += 1.0;
  }
  return w;
}

GraphSpec random_geometric_graph(std::size_t n, double radius, std::uint64_t seed,
                                 std::size_t max_attempts) {
  if (n < 2) raise(Errc::InvalidArgument, "geometric graph needs at least two nodes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> px(n), py(n);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = unit(rng);
      py[i] = unit(rng);
    }
    std::vector<GraphSpec::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = px[i] - px[j];
        const double dy = py[i] - py[j];
        if (std::hypot(dx, dy) < radius) edges.emplace_back(i, j);
      }
    }
    if (is_connected(n, edges)) return GraphSpec(n, std::move(edges));
  }
  std::ostringstream msg;
  msg << "no connected geometric graph with N = " << n << ", radius = " << radius << " after "
      << max_attempts << " draws";
  raise(Errc::ConnectivityTimeout, msg.str());
}

GraphSpec read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> n;
  std::vector<GraphSpec::Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!n) {
      std::size_t count = 0;
      if (!(ls >> count) || !(ls >> std::ws).eof()) {
        raise(Errc::ParseError, "line " + std::to_string(line_no) + ": expected node count");
      }
      n = count;
      continue;
    }
    std::size_t a = 0, b = 0;
    if (!(ls >> a >> b) || !(ls >> std::ws).eof()) {
      raise(Errc::ParseError, "line " + std::to_string(line_no) + ": expected \"i j\"");
    }
    edges.emplace_back(a, b);
  }
  if (!n) raise(Errc::ParseError, "empty edge list");
  return GraphSpec(*n, std::move(edges));
}

GraphSpec load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open " + path.string());
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const GraphSpec& g) {
  out << g.node_count() << '\n';
  for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

}  // namespace gridquant
