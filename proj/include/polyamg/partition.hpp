#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <queue>
#include <set>
#include <unordered_set>
#include <vector>

#include "polyamg/errors.hpp"
#include "polyamg/mesh.hpp"
#include "polyamg/rng.hpp"

namespace polyamg {

namespace detail {

inline std::vector<std::vector<int>> cell_graph(const PolygonalMesh& mesh) {
    std::vector<std::vector<int>> adj(mesh.n_cells());
    for (const auto& [a, b] : mesh.cell_adjacency) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

inline bool connected_without(const std::vector<std::vector<int>>& adj,
                              const std::vector<int>& labels, int part, int removed,
                              int part_size) {
    // BFS over the part's cells skipping `removed`
    int start = -1;
    for (int v : adj[removed])
        if (labels[v] == part) {
            start = v;
            break;
        }
    if (start < 0) return part_size <= 1;
    std::vector<int> stack{start};
    std::unordered_set<int> seen{start};
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (v != removed && labels[v] == part && seen.insert(v).second) stack.push_back(v);
    }
    return int(seen.size()) == part_size - 1;
}

} // namespace detail

/// Greedy BFS region growing on the cell-adjacency graph with
/// farthest-cell seeding; a METIS stand-in. Smallest region grows first,
/// then oversized parts shed connectivity-safe boundary cells until every
/// part is within 20% of the mean (or no safe move remains).
inline Partition partition(const PolygonalMesh& mesh, int n_parts, std::uint64_t rng_seed) {
    const int n = mesh.n_cells();
    if (n_parts < 1 || n_parts > n)
        throw invalid_parameter("partition: L must be in [1, N_elt]");
    Partition part;
    part.n_parts = n_parts;
    part.part_of_cell.assign(n, -1);
    if (n_parts == 1) {
        std::fill(part.part_of_cell.begin(), part.part_of_cell.end(), 0);
        return part;
    }
    if (n_parts == n) {
        for (int i = 0; i < n; ++i) part.part_of_cell[i] = i;
        return part;
    }

    const auto adj = detail::cell_graph(mesh);
    auto& labels = part.part_of_cell;

    // farthest-point seeding in graph distance
    SeededRng rng(rng_seed);
    std::vector<int> seeds{int(rng.below(std::uint64_t(n)))};
    std::vector<int> dist(n, -1);
    auto relax_from = [&](int src) {
        std::queue<int> q;
        q.push(src);
        dist[src] = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (dist[v] < 0 || dist[v] > dist[u] + 1) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
    };
    relax_from(seeds[0]);
    while (int(seeds.size()) < n_parts) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (dist[i] > dist[far]) far = i;
        seeds.push_back(far);
        relax_from(far);
    }

    // simultaneous BFS growth, smallest region first
    std::vector<std::deque<int>> frontier(n_parts);
    std::vector<int> size(n_parts, 0);
    std::set<std::pair<int, int>> active;  // (size, part)
    for (int p = 0; p < n_parts; ++p) {
        labels[seeds[p]] = p;
        size[p] = 1;
        for (int v : adj[seeds[p]]) frontier[p].push_back(v);
        active.insert({1, p});
    }
    int assigned = n_parts;
    while (assigned < n && !active.empty()) {
        const auto [sz, p] = *active.begin();
        active.erase(active.begin());
        int picked = -1;
        while (!frontier[p].empty()) {
            const int v = frontier[p].front();
            frontier[p].pop_front();
            if (labels[v] < 0) {
                picked = v;
                break;
            }
        }
        if (picked < 0) continue;  // region is walled in
        labels[picked] = p;
        ++assigned;
        ++size[p];
        for (int v : adj[picked])
            if (labels[v] < 0) frontier[p].push_back(v);
        active.insert({size[p], p});
    }
    // stragglers (unreached cells) attach to an assigned neighbor
    bool changed = true;
    while (assigned < n && changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            if (labels[i] >= 0) continue;
            for (int v : adj[i])
                if (labels[v] >= 0) {
                    labels[i] = labels[v];
                    ++size[labels[v]];
                    ++assigned;
                    changed = true;
                    break;
                }
        }
    }
    for (int i = 0; i < n; ++i)
        if (labels[i] < 0) {  // isolated component: dump into the smallest part
            const int p = int(std::min_element(size.begin(), size.end()) - size.begin());
            labels[i] = p;
            ++size[p];
        }

    // diffusion rebalance: wherever adjacent parts differ by 2 or more,
    // move one connectivity-safe boundary cell downhill; the squared-size
    // sum strictly decreases, so this terminates with all adjacent parts
    // within one cell of each other
    for (int pass = 0; pass < 200; ++pass) {
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            const int p = labels[i];
            int q = -1;
            for (int v : adj[i]) {
                const int cand = labels[v];
                if (cand != p && (q < 0 || size[cand] < size[q])) q = cand;
            }
            if (q < 0 || size[p] < size[q] + 2) continue;
            if (!detail::connected_without(adj, labels, p, i, size[p])) continue;
            labels[i] = q;
            --size[p];
            ++size[q];
            moved = true;
        }
        if (!moved) break;
    }
    return part;
}

/// Replace each part by a single coarse polygon traced as the outer loop
/// of the part's union. Interior fine vertices that lie on the agglomerate
/// boundary are kept, so coarse cells may have many collinear edges.
inline PolygonalMesh agglomerate(const PolygonalMesh& mesh, const Partition& part) {
    const int n = mesh.n_cells();
    if (int(part.part_of_cell.size()) != n)
        throw invalid_parameter("agglomerate: partition does not match mesh");
    std::vector<std::vector<int>> cells_of_part(part.n_parts);
    for (int c = 0; c < n; ++c) {
        const int p = part.part_of_cell[c];
        if (p < 0 || p >= part.n_parts)
            throw invalid_parameter("agglomerate: part label out of range");
        cells_of_part[p].push_back(c);
    }

    const auto adj = detail::cell_graph(mesh);
    PolygonalMesh out;
    std::vector<std::vector<int>> loops(part.n_parts);
    std::vector<int> succ(mesh.n_vertices(), -1);   // successor along the boundary
    std::vector<int> epoch(mesh.n_vertices(), -1);  // part that wrote succ last

    for (int p = 0; p < part.n_parts; ++p) {
        const auto& members = cells_of_part[p];
        if (members.empty())
            throw agglomeration_topology_error("agglomerate: empty part", p);

        // edge-connectivity of the part
        std::unordered_set<int> in_part(members.begin(), members.end());
        std::vector<int> stack{members[0]};
        std::unordered_set<int> seen{members[0]};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (in_part.count(v) && seen.insert(v).second) stack.push_back(v);
        }
        if (seen.size() != members.size())
            throw agglomeration_topology_error("agglomerate: disconnected part", p);

        // boundary = directed edges whose reverse is absent within the part
        const std::int64_t nv = mesh.n_vertices();
        std::unordered_set<std::int64_t> directed;
        for (int c : members) {
            const auto& loop = mesh.cells[c];
            const int k = int(loop.size());
            for (int e = 0; e < k; ++e)
                directed.insert(std::int64_t(loop[e]) * nv + loop[(e + 1) % k]);
        }
        std::size_t n_boundary = 0;
        int start = -1;
        for (std::int64_t code : directed) {
            const int a = int(code / nv), b = int(code % nv);
            if (directed.count(std::int64_t(b) * nv + a)) continue;  // interior edge
            ++n_boundary;
            if (epoch[a] == p)
                throw agglomeration_topology_error(
                    "agglomerate: part union pinches at a vertex", p);
            succ[a] = b;
            epoch[a] = p;
            if (start < 0 || a < start) start = a;
        }
        if (start < 0)
            throw agglomeration_topology_error("agglomerate: part has no boundary", p);
        std::vector<int> loop;
        for (int v = start;;) {
            loop.push_back(v);
            if (epoch[v] != p)
                throw agglomeration_topology_error("agglomerate: open boundary chain", p);
            v = succ[v];
            if (v == start) break;
            if (loop.size() > n_boundary)
                throw agglomeration_topology_error("agglomerate: tangled boundary", p);
        }
        if (loop.size() != n_boundary)
            throw agglomeration_topology_error(
                "agglomerate: part union has a hole (multiple boundary loops)", p);
        loops[p] = std::move(loop);
    }
    // compact vertices preserving the fine-mesh index order, so that the
    // identity partition reproduces the input mesh exactly
    std::vector<int> remap(mesh.n_vertices(), -1);
    for (const auto& loop : loops)
        for (int v : loop) remap[v] = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (remap[v] == 0) {
            remap[v] = int(out.vertices.size());
            out.vertices.push_back(mesh.vertices[v]);
        }
    for (auto& loop : loops) {
        for (int& v : loop) v = remap[v];
        out.cells.push_back(std::move(loop));
    }
    compute_boundary_flags(out);
    compute_cell_adjacency(out);
    return out;
}

} // namespace polyamg
