#include "mmg/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mmg/errors.hpp"

namespace mmg {

UndirectedGraph::UndirectedGraph(int d, std::vector<std::pair<int, int>> edges)
    : d_(d), adjacency_(static_cast<std::size_t>(std::max(d, 0)), 0) {
  if (d < 1 || d > kMaxVariables)
    throw std::invalid_argument("graph vertex count must be in 1.." +
                                std::to_string(kMaxVariables));
  for (auto& [u, v] : edges) {
    if (u < 1 || u > d || v < 1 || v > d)
      throw std::invalid_argument("edge (" + std::to_string(u) + "," +
                                  std::to_string(v) + ") out of range 1.." +
                                  std::to_string(d));
    if (u == v)
      throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [u, v] : edges_) {
    adjacency_[u - 1] |= 1ull << (v - 1);
    adjacency_[v - 1] |= 1ull << (u - 1);
  }
}

bool UndirectedGraph::has_edge(int u, int v) const {
  if (u < 1 || u > d_ || v < 1 || v > d_ || u == v) return false;
  return (adjacency_[u - 1] >> (v - 1)) & 1ull;
}

Pattern UndirectedGraph::neighbors(const Pattern& subset) const {
  if (subset.size() != d_)
    throw std::invalid_argument("neighbors: pattern width " +
                                std::to_string(subset.size()) +
                                " does not match graph order " +
                                std::to_string(d_));
  std::uint64_t acc = 0;
  for (int j : subset.indices()) acc |= adjacency_[j - 1];
  return Pattern(d_, acc & ~subset.bits());
}

Pattern UndirectedGraph::closed_neighborhood(const Pattern& subset) const {
  return neighbors(subset) | subset;
}

std::vector<int> UndirectedGraph::neighbors(
    const std::vector<int>& subset) const {
  return neighbors(Pattern::from_indices(d_, subset)).indices();
}

std::vector<int> UndirectedGraph::closed_neighborhood(
    const std::vector<int>& subset) const {
  return closed_neighborhood(Pattern::from_indices(d_, subset)).indices();
}

std::vector<ConnectedPattern> UndirectedGraph::missing_components(
    const ResponsePattern& r) const {
  if (r.size() != d_)
    throw std::invalid_argument("missing_components: pattern width mismatch");
  const std::uint64_t missing = r.complement().bits();
  std::vector<ConnectedPattern> out;
  std::uint64_t seen = 0;
  // Scanning from the lowest missing vertex yields components in ascending
  // order of their smallest member.
  for (int j = 1; j <= d_; ++j) {
    const std::uint64_t bit = 1ull << (j - 1);
    if (!(missing & bit) || (seen & bit)) continue;
    std::uint64_t comp = bit;
    std::uint64_t frontier = bit;
    while (frontier != 0) {
      std::uint64_t next = 0;
      for (std::uint64_t f = frontier; f != 0; f &= f - 1) {
        int v = std::countr_zero(f);
        next |= adjacency_[v] & missing & ~comp;
      }
      comp |= next;
      frontier = next;
    }
    seen |= comp;
    out.emplace_back(d_, comp);
  }
  return out;
}

ConnectedPattern UndirectedGraph::psi(const ResponsePattern& missing,
                                      int target) const {
  if (missing.size() != d_)
    throw std::invalid_argument("psi: pattern width mismatch");
  if (!missing.test(target))
    throw std::invalid_argument("psi: target variable " +
                                std::to_string(target) +
                                " is not in the missing set");
  for (const auto& comp : missing_components(missing.complement()))
    if (comp.test(target)) return comp;
  throw std::logic_error("psi: component scan failed");  // unreachable
}

bool UndirectedGraph::is_connected_subset(const Pattern& s) const {
  if (s.size() != d_)
    throw std::invalid_argument("is_connected_subset: pattern width mismatch");
  if (s.none()) return false;
  auto comps = missing_components(s.complement());
  return comps.size() == 1 && comps.front() == s;
}

ModelPattern UndirectedGraph::model_pattern_of(
    const ConnectedPattern& s) const {
  if (!is_connected_subset(s))
    throw std::invalid_argument("model_pattern_of: subset " + s.to_string() +
                                " is not connected in the graph");
  return closed_neighborhood(s);
}

std::vector<ConnectedPattern> occurring_components(
    const UndirectedGraph& g, const std::vector<ResponsePattern>& patterns,
    int target) {
  if (target < 1 || target > g.vertex_count())
    throw std::invalid_argument("occurring_components: target out of range");
  std::vector<ConnectedPattern> out;
  for (const auto& r : patterns) {
    if (r.test(target)) continue;
    ConnectedPattern c = g.psi(r.complement(), target);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Pattern& a, const Pattern& b) {
    if (a.lowest() != b.lowest()) return a.lowest() < b.lowest();
    return a.bits() < b.bits();
  });
  return out;
}

UndirectedGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file: " + path.string());
  std::string line;
  int lineno = 0;
  int d = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    if (d < 0) {
      std::string tag;
      if (!(ls >> tag >> d) || tag != "d" || d < 1)
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": expected header line \"d <vertex-count>\"");
      continue;
    }
    int u = 0, v = 0;
    if (!(ls >> u >> v))
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": expected edge line \"u v\"");
    if (u < 1 || u > d || v < 1 || v > d)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": vertex out of range 1.." + std::to_string(d));
    if (u == v)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": self-loop at vertex " + std::to_string(u));
    edges.emplace_back(u, v);
  }
  if (d < 0) throw ParseError(path.string() + ": missing \"d\" header line");
  return UndirectedGraph(d, std::move(edges));
}

void write_graph(const UndirectedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open graph file for write: " +
                             path.string());
  out << "d " << g.vertex_count() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
  if (!out) throw ParseError("failed writing graph file: " + path.string());
}

}  // namespace mmg
