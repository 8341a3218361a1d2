#include "cityscale/routing.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "cityscale/error.hpp"
#include "cityscale/geodesy.hpp"
#include "csv.hpp"
#include "parallel.hpp"

namespace cityscale {

RoadGraph::RoadGraph(std::vector<std::pair<NodeId, LatLon>> nodes, const std::vector<RoadEdge>& edges) {
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    ids_.reserve(nodes.size());
    locations_.reserve(nodes.size());
    for (const auto& [id, loc] : nodes) {
        if (!index_.emplace(id, ids_.size()).second) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate node id {}", id));
        }
        ids_.push_back(id);
        locations_.push_back(loc);
    }

    std::vector<std::size_t> degree(ids_.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    ends.reserve(edges.size());
    for (const auto& e : edges) {
        auto a = index_of(e.a), b = index_of(e.b);
        if (!a || !b) {
            throw Error(ErrorCode::UnknownNode,
                        fmt::format("edge ({}, {}) references unknown node {}", e.a, e.b, a ? e.b : e.a));
        }
        if (!(e.length_m > 0)) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("edge ({}, {}) has non-positive length {}", e.a, e.b, e.length_m));
        }
        ++degree[*a];
        ++degree[*b];
        ends.emplace_back(*a, *b);
    }

    offsets_.assign(ids_.size() + 1, 0);
    for (std::size_t i = 0; i < ids_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
    arcs_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto [a, b] = ends[k];
        arcs_[fill[a]++] = {b, edges[k].length_m};
        arcs_[fill[b]++] = {a, edges[k].length_m};
    }
    edge_count_ = edges.size();
}

std::optional<std::size_t> RoadGraph::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

RoadGraph load_road_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path) {
    const auto nt = csv::Table::read(nodes_path);
    const auto c_id = nt.column("ID"), c_lat = nt.column("LAT"), c_lon = nt.column("LON");
    std::vector<std::pair<NodeId, LatLon>> nodes;
    std::unordered_map<NodeId, LatLon> where;
    nodes.reserve(nt.rows());
    for (std::size_t r = 0; r < nt.rows(); ++r) {
        LatLon p{nt.get_double(r, c_lat), nt.get_double(r, c_lon)};
        nodes.emplace_back(nt.get_int(r, c_id), p);
        where.emplace(nodes.back().first, p);
    }

    const auto et = csv::Table::read(edges_path);
    const auto c_a = et.column("A"), c_b = et.column("B");
    const auto c_len = et.find_column("LEN_M");
    std::vector<RoadEdge> edges;
    edges.reserve(et.rows());
    for (std::size_t r = 0; r < et.rows(); ++r) {
        RoadEdge e{et.get_int(r, c_a), et.get_int(r, c_b), 0.0};
        if (c_len && !et.get(r, *c_len).empty()) {
            e.length_m = et.get_double(r, *c_len);
        } else {
            auto pa = where.find(e.a), pb = where.find(e.b);
            if (pa == where.end() || pb == where.end()) {
                throw Error(ErrorCode::UnknownNode,
                            fmt::format("{}:{}: edge ({}, {}) references an unknown node", et.source(),
                                        et.line_of(r), e.a, e.b));
            }
            e.length_m = haversine_m(pa->second, pb->second);
        }
        edges.push_back(e);
    }
    return RoadGraph(std::move(nodes), edges);
}

NodeId snap(const LatLon& point, const RoadGraph& graph) {
    if (graph.empty()) throw Error(ErrorCode::EmptyGraph, "cannot snap to an empty graph");
    // Nodes are stored in ascending id order, so strict < keeps the smaller id on ties.
    std::size_t best = 0;
    double best_d = haversine_m(point, graph.location(0));
    for (std::size_t i = 1; i < graph.node_count(); ++i) {
        const double d = haversine_m(point, graph.location(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return graph.id(best);
}

std::vector<double> shortest_paths_from(std::size_t source, const RoadGraph& graph) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.node_count(), inf);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;  // stale
        for (const auto& arc : graph.arcs(u)) {
            const double nd = d + arc.length_m;
            if (nd < dist[arc.target]) {
                dist[arc.target] = nd;
                queue.emplace(nd, arc.target);
            }
        }
    }
    return dist;
}

std::optional<double> shortest_path_distance(NodeId source, NodeId target, const RoadGraph& graph) {
    auto s = graph.index_of(source);
    if (!s) throw Error(ErrorCode::UnknownNode, fmt::format("node {}", source));
    auto t = graph.index_of(target);
    if (!t) throw Error(ErrorCode::UnknownNode, fmt::format("node {}", target));
    if (*s == *t) return 0.0;
    const double d = shortest_paths_from(*s, graph)[*t];
    if (std::isinf(d)) return std::nullopt;
    return d;
}

DistanceMatrix bulk_distances(const std::vector<RoutePoint>& points, const RoadGraph& graph, unsigned threads) {
    if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");

    std::vector<std::size_t> snapped(points.size());
    detail::parallel_for(points.size(), threads, [&](std::size_t i) {
        snapped[i] = *graph.index_of(snap(points[i].location, graph));
    });

    std::vector<std::size_t> sources = snapped;
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    std::vector<std::vector<double>> from(sources.size());
    detail::parallel_for(sources.size(), threads,
                         [&](std::size_t k) { from[k] = shortest_paths_from(sources[k], graph); });

    auto row_of = [&](std::size_t node) {
        return static_cast<std::size_t>(std::lower_bound(sources.begin(), sources.end(), node) - sources.begin());
    };

    std::vector<std::string> ids;
    ids.reserve(points.size());
    for (const auto& p : points) ids.push_back(p.id);
    DistanceMatrix m(std::move(ids));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& row = from[row_of(snapped[i])];
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = row[snapped[j]];
            if (!std::isinf(d)) m.set(i, j, d);
        }
    }
    return m;
}

}  // namespace cityscale
