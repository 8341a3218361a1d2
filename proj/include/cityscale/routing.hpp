#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cityscale/distance_matrix.hpp"
#include "cityscale/grid.hpp"

namespace cityscale {

using NodeId = std::int64_t;

struct RoadEdge {
    NodeId a = 0;
    NodeId b = 0;
    double length_m = 0.0;
};

/// Undirected road network, immutable once built. Adjacency is stored in
/// compressed rows over dense node indices.
class RoadGraph {
public:
    RoadGraph() = default;

    /// Throws InvalidArgument on duplicate node ids, non-positive edge
    /// lengths, or edges referencing unknown nodes (UnknownNode).
    RoadGraph(std::vector<std::pair<NodeId, LatLon>> nodes, const std::vector<RoadEdge>& edges);

    std::size_t node_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    bool empty() const { return ids_.empty(); }

    NodeId id(std::size_t index) const { return ids_[index]; }
    const LatLon& location(std::size_t index) const { return locations_[index]; }
    std::optional<std::size_t> index_of(NodeId id) const;

    struct Arc {
        std::size_t target;
        double length_m;
    };
    std::span<const Arc> arcs(std::size_t index) const {
        return {arcs_.data() + offsets_[index], offsets_[index + 1] - offsets_[index]};
    }

private:
    std::vector<NodeId> ids_;
    std::vector<LatLon> locations_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::size_t> offsets_;
    std::vector<Arc> arcs_;
    std::size_t edge_count_ = 0;
};

/// Nodes CSV (ID, LAT, LON) and edges CSV (A, B [, LEN_M]). Missing or
/// empty LEN_M falls back to the haversine length between the endpoints.
RoadGraph load_road_graph(const std::filesystem::path& nodes, const std::filesystem::path& edges);

/// Node nearest to `point` by great-circle distance; ties go to the
/// smaller node id. Throws EmptyGraph.
NodeId snap(const LatLon& point, const RoadGraph& graph);

/// Single-source shortest-path lengths indexed by dense node index;
/// unreachable nodes hold +infinity.
std::vector<double> shortest_paths_from(std::size_t source_index, const RoadGraph& graph);

/// Exact shortest-path length, or nullopt when the target is unreachable.
/// Throws UnknownNode.
std::optional<double> shortest_path_distance(NodeId source, NodeId target, const RoadGraph& graph);

struct RoutePoint {
    std::string id;
    LatLon location;
};

/// Snaps every point, runs one search per distinct snapped node (spread over
/// `threads` workers), and assembles the symmetric matrix. Unreachable pairs
/// are left absent.
DistanceMatrix bulk_distances(const std::vector<RoutePoint>& points, const RoadGraph& graph,
                              unsigned threads = 1);

}  // namespace cityscale
