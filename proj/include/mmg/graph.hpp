#ifndef MMG_GRAPH_HPP_
#define MMG_GRAPH_HPP_

#include <filesystem>
#include <utility>
#include <vector>

#include "mmg/pattern.hpp"

namespace mmg {

// Undirected graph over d study variables (1-based vertex indices).
// Immutable after construction; all queries are pure.
class UndirectedGraph {
 public:
  UndirectedGraph(int d, std::vector<std::pair<int, int>> edges);

  int vertex_count() const { return d_; }
  // Edges normalized to u < v and sorted.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool has_edge(int u, int v) const;

  // N_G(U): union of neighbors of the marked vertices, excluding U itself.
  Pattern neighbors(const Pattern& subset) const;
  // N-bar_G(U) = U union N_G(U).
  Pattern closed_neighborhood(const Pattern& subset) const;

  // Index-set convenience overloads (1-based, ascending output).
  std::vector<int> neighbors(const std::vector<int>& subset) const;
  std::vector<int> closed_neighborhood(const std::vector<int>& subset) const;

  // Connected components of the subgraph induced by the missing variables
  // of r (the zero bits).  Components partition bar(r) and are returned in
  // ascending order of their smallest member.
  std::vector<ConnectedPattern> missing_components(
      const ResponsePattern& r) const;

  // The component of the induced subgraph on `missing` that contains
  // `target`.  Requires missing.test(target).
  ConnectedPattern psi(const ResponsePattern& missing, int target) const;

  bool is_connected_subset(const Pattern& s) const;

  // Required-observed mask for fitting the submodel of connected pattern s:
  // every variable in s and its boundary.  Requires s connected.
  ModelPattern model_pattern_of(const ConnectedPattern& s) const;

 private:
  int d_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::uint64_t> adjacency_;  // adjacency_[v-1] = neighbor mask
};

// Distinct components psi(bar(r), target) over the supplied response
// patterns with the target missing.  Ordered by (smallest member, mask
// value); patterns observing the target contribute nothing.
std::vector<ConnectedPattern> occurring_components(
    const UndirectedGraph& g, const std::vector<ResponsePattern>& patterns,
    int target);

// Edge-list file format: optional '#' comment lines, a mandatory first
// data line "d <vertex-count>", then one "u v" pair per line (1-based).
UndirectedGraph read_graph(const std::filesystem::path& path);
void write_graph(const UndirectedGraph& g, const std::filesystem::path& path);

}  // namespace mmg

#endif  // MMG_GRAPH_HPP_
