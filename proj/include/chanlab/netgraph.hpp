#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chanlab/core.hpp"

namespace chanlab {

// Undirected channel graph: duplicate edges merged, self-loops dropped.
struct ChannelGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // first < second
  std::vector<std::vector<std::int32_t>> adjacency;
  std::int64_t self_loops_dropped = 0;
  std::int64_t duplicates_merged = 0;

  std::optional<std::int32_t> node_index(std::string_view id) const;
};

// CSV lines `node_a,node_b`; `#`-prefixed comments and blank lines ignored.
ChannelGraph load_edge_list(std::istream& is);
ChannelGraph load_edge_list_file(const std::string& path);
ChannelGraph graph_from_edges(
    const std::vector<std::pair<std::string, std::string>>& edges);

// 1 + shortest path between the endpoints with the edge removed (BFS);
// nullopt when the edge is a bridge. Throws EdgeNotFound.
std::optional<std::int64_t> shortest_cycle_through_edge(const ChannelGraph& graph,
                                                        std::string_view node_a,
                                                        std::string_view node_b);

struct CycleHistogram {
  std::map<std::int64_t, std::int64_t> counts;
  std::int64_t not_in_cycle = 0;
  std::int64_t edge_count = 0;
  std::optional<Rat> average;  // over cycled edges only
};

CycleHistogram cycle_histogram(const ChannelGraph& graph, int jobs = 1);

// CSV `length,count` rows plus final `NA,<count>` and `average,<2dp>` rows.
void write_cycle_csv(const CycleHistogram& histogram, std::ostream& os);

std::string format_2dp(const Rat& value);  // round half up to two decimals

}  // namespace chanlab
