#include "chanlab/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "chanlab/parallel.hpp"

namespace chanlab {

namespace {

struct GraphBuilder {
  std::vector<std::string> nodes;
  std::unordered_map<std::string, std::int32_t> index;
  std::set<std::pair<std::int32_t, std::int32_t>> edges;
  std::int64_t self_loops = 0;
  std::int64_t duplicates = 0;

  std::int32_t intern(const std::string& id) {
    auto [it, inserted] = index.try_emplace(id, static_cast<std::int32_t>(nodes.size()));
    if (inserted) nodes.push_back(id);
    return it->second;
  }

  void add(const std::string& a, const std::string& b) {
    if (a == b) {
      ++self_loops;
      return;
    }
    auto ia = intern(a);
    auto ib = intern(b);
    if (ia > ib) std::swap(ia, ib);
    if (!edges.emplace(ia, ib).second) ++duplicates;
  }

  ChannelGraph finish() && {
    ChannelGraph g;
    g.nodes = std::move(nodes);
    g.edges.assign(edges.begin(), edges.end());
    g.adjacency.assign(g.nodes.size(), {});
    for (const auto& [a, b] : g.edges) {
      g.adjacency[a].push_back(b);
      g.adjacency[b].push_back(a);
    }
    g.self_loops_dropped = self_loops;
    g.duplicates_merged = duplicates;
    return g;
  }
};

}  // namespace

std::optional<std::int32_t> ChannelGraph::node_index(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == id) return static_cast<std::int32_t>(i);
  return std::nullopt;
}

ChannelGraph load_edge_list(std::istream& is) {
  GraphBuilder builder;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected node_a,node_b");
    builder.add(line.substr(0, comma), line.substr(comma + 1));
  }
  return std::move(builder).finish();
}

ChannelGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);
  return load_edge_list(in);
}

ChannelGraph graph_from_edges(
    const std::vector<std::pair<std::string, std::string>>& edges) {
  GraphBuilder builder;
  for (const auto& [a, b] : edges) builder.add(a, b);
  return std::move(builder).finish();
}

namespace {

// BFS distance from `from` to `to` skipping the direct edge between them.
std::optional<std::int64_t> detour_distance(const ChannelGraph& g, std::int32_t from,
                                            std::int32_t to) {
  std::vector<std::int32_t> dist(g.nodes.size(), -1);
  std::deque<std::int32_t> queue;
  dist[from] = 0;
  queue.push_back(from);
  while (!queue.empty()) {
    std::int32_t u = queue.front();
    queue.pop_front();
    for (std::int32_t v : g.adjacency[u]) {
      if (u == from && v == to) continue;  // the removed edge
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      if (v == to) return dist[v];
      queue.push_back(v);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::int64_t> shortest_cycle_through_edge(const ChannelGraph& graph,
                                                        std::string_view node_a,
                                                        std::string_view node_b) {
  auto ia = graph.node_index(node_a);
  auto ib = graph.node_index(node_b);
  if (!ia || !ib) throw EdgeNotFound("edge endpoints not in graph");
  auto a = std::min(*ia, *ib);
  auto b = std::max(*ia, *ib);
  if (!std::binary_search(graph.edges.begin(), graph.edges.end(), std::make_pair(a, b)))
    throw EdgeNotFound("edge not in graph");
  auto detour = detour_distance(graph, a, b);
  if (!detour) return std::nullopt;
  return *detour + 1;
}

CycleHistogram cycle_histogram(const ChannelGraph& graph, int jobs) {
  CycleHistogram hist;
  hist.edge_count = static_cast<std::int64_t>(graph.edges.size());
  std::vector<std::int64_t> lengths(graph.edges.size(), 0);
  parallel_for(hist.edge_count, jobs, [&](std::int64_t i) {
    const auto& [a, b] = graph.edges[static_cast<std::size_t>(i)];
    auto detour = detour_distance(graph, a, b);
    lengths[static_cast<std::size_t>(i)] = detour ? *detour + 1 : 0;
  });
  std::int64_t total = 0;
  std::int64_t cycled = 0;
  for (auto len : lengths) {
    if (len == 0) {
      ++hist.not_in_cycle;
    } else {
      ++hist.counts[len];
      total += len;
      ++cycled;
    }
  }
  if (cycled > 0) hist.average = Rat(total, cycled);
  return hist;
}

void write_cycle_csv(const CycleHistogram& histogram, std::ostream& os) {
  os << "length,count\n";
  for (const auto& [length, count] : histogram.counts)
    os << length << ',' << count << '\n';
  os << "NA," << histogram.not_in_cycle << '\n';
  os << "average," << (histogram.average ? format_2dp(*histogram.average) : "NA")
     << '\n';
}

std::string format_2dp(const Rat& value) {
  Rat scaled = value * Rat(100) + Rat(1, 2);
  std::int64_t cents = scaled.floor64();
  // x.5 exactly rounds up, matching the scaled floor.
  std::string sign;
  if (cents < 0) {
    sign = "-";
    cents = -cents;
  }
  std::string frac = std::to_string(cents % 100);
  if (frac.size() < 2) frac.insert(0, 2 - frac.size(), '0');
  return sign + std::to_string(cents / 100) + "." + frac;
}

}  // namespace chanlab
