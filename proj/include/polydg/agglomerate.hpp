#ifndef POLYDG_AGGLOMERATE_HPP
#define POLYDG_AGGLOMERATE_HPP

/// Agglomeration of a fine mesh into coarse polytopal elements by seeded
/// region growing on the element adjacency graph.

#include <polydg/mesh.hpp>

#include <cstdint>
#include <queue>
#include <random>

namespace polydg
{
  namespace detail
  {
    /// One growing cluster of fine elements.
    struct Cluster
    {
      std::vector<int> members;
      std::vector<int> frontier; ///< unassigned fine elements adjacent to us
      Vec2             seed_centroid = Vec2::Zero();
      Real             area          = 0.0;
    };

    /// A fine element may join a cluster only when their shared boundary
    /// is one contiguous arc: e shared faces must contribute exactly
    /// e + 1 shared vertices. This keeps every cluster simply connected
    /// with a simple boundary.
    inline bool
    joins_as_disk(const PolyMesh                                 &mesh,
                  const std::vector<std::vector<std::pair<int, int>>> &adj,
                  const std::vector<std::vector<int>>            &vertex_clusters,
                  const std::vector<int>                         &assigned,
                  int                                             t,
                  int                                             c)
    {
      int shared_faces = 0;
      for (const auto &[nbr, face] : adj[static_cast<std::size_t>(t)])
        if (assigned[static_cast<std::size_t>(nbr)] == c)
          ++shared_faces;
      if (shared_faces == 0)
        return false;
      int shared_vertices = 0;
      for (int v : mesh.elements[static_cast<std::size_t>(t)])
        {
          const auto &cl = vertex_clusters[static_cast<std::size_t>(v)];
          if (std::find(cl.begin(), cl.end(), c) != cl.end())
            ++shared_vertices;
        }
      return shared_vertices == shared_faces + 1;
    }

    /// Extracts the boundary loop of a cluster as a CCW vertex list.
    /// Returns false when the cluster boundary is not a single simple
    /// loop (holes or pinch vertices).
    inline bool cluster_boundary(const PolyMesh         &mesh,
                                 const std::vector<int> &members,
                                 std::vector<int>       &loop)
    {
      // Directed edges of member polygons; interior edges appear in both
      // directions and cancel.
      std::map<std::pair<int, int>, int> count;
      for (int e : members)
        {
          const auto &el = mesh.elements[static_cast<std::size_t>(e)];
          const int   n  = static_cast<int>(el.size());
          for (int i = 0; i < n; ++i)
            {
              const int a = el[static_cast<std::size_t>(i)];
              const int b = el[static_cast<std::size_t>((i + 1) % n)];
              ++count[{a, b}];
            }
        }
      std::map<int, int> next;
      int                n_boundary = 0;
      for (const auto &[edge, c] : count)
        {
          if (c > 1)
            return false;
          if (count.count({edge.second, edge.first}))
            continue; // interior edge
          if (next.count(edge.first))
            return false; // pinch vertex: two outgoing boundary edges
          next[edge.first] = edge.second;
          ++n_boundary;
        }
      if (n_boundary < 3)
        return false;

      // Walk one loop starting from the smallest boundary vertex.
      loop.clear();
      const int start = next.begin()->first;
      int       v     = start;
      do
        {
          loop.push_back(v);
          const auto it = next.find(v);
          if (it == next.end())
            return false;
          v = it->second;
          if (static_cast<int>(loop.size()) > n_boundary)
            return false;
        }
      while (v != start);
      // All boundary edges must belong to the single loop.
      return static_cast<int>(loop.size()) == n_boundary;
    }
  } // namespace detail

  /// Merges the elements of a fine mesh into about target_n_elements
  /// polytopal elements. Clusters grow from seeded centroids, smallest
  /// cluster first, admitting an element only when the merged region
  /// stays simply connected. Unmergeable leftovers become elements of
  /// their own, so the output count can exceed the target slightly.
  /// Element areas and boundary tags are inherited exactly.
  inline PolyMesh
  agglomerate(const PolyMesh &fine, int target_n_elements, uint64_t seed)
  {
    const int n = fine.n_elements();
    if (target_n_elements < 1 || target_n_elements > n)
      throw std::invalid_argument("agglomerate: target out of range");
    if (fine.faces.empty() && n > 1)
      throw topology_error("agglomerate: input mesh lacks face topology");

    // Adjacency (neighbor element, face index) through interior faces.
    std::vector<std::vector<std::pair<int, int>>> adj(
      static_cast<std::size_t>(n));
    for (int f = 0; f < fine.n_faces(); ++f)
      {
        const Face &face = fine.faces[static_cast<std::size_t>(f)];
        if (face.neighbor < 0)
          continue;
        adj[static_cast<std::size_t>(face.owner)].emplace_back(face.neighbor, f);
        adj[static_cast<std::size_t>(face.neighbor)].emplace_back(face.owner, f);
      }

    std::vector<Vec2> centroid(static_cast<std::size_t>(n));
    std::vector<Real> area(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e)
      {
        const std::vector<Vec2> poly = fine.element_polygon(e);
        centroid[static_cast<std::size_t>(e)] = polygon_centroid(poly);
        area[static_cast<std::size_t>(e)]     = polygon_signed_area(poly);
      }

    // Seeding: distance-squared weighted farthest-point sampling.
    std::mt19937_64  rng(seed);
    std::vector<int> seeds;
    seeds.reserve(static_cast<std::size_t>(target_n_elements));
    {
      std::vector<Real> d2(static_cast<std::size_t>(n),
                           std::numeric_limits<Real>::infinity());
      const int first = static_cast<int>(
        static_cast<Real>(n) *
        (static_cast<Real>(rng() >> 11) * 0x1.0p-53));
      seeds.push_back(std::min(first, n - 1));
      while (static_cast<int>(seeds.size()) < target_n_elements)
        {
          const Vec2 &last = centroid[static_cast<std::size_t>(seeds.back())];
          Real        total = 0.0;
          for (int e = 0; e < n; ++e)
            {
              d2[static_cast<std::size_t>(e)] =
                std::min(d2[static_cast<std::size_t>(e)],
                         (centroid[static_cast<std::size_t>(e)] - last).squaredNorm());
              total += d2[static_cast<std::size_t>(e)];
            }
          Real pick = total * (static_cast<Real>(rng() >> 11) * 0x1.0p-53);
          int  chosen = -1;
          for (int e = 0; e < n; ++e)
            {
              if (d2[static_cast<std::size_t>(e)] <= 0.0)
                continue;
              chosen = e;
              pick -= d2[static_cast<std::size_t>(e)];
              if (pick <= 0.0)
                break;
            }
          if (chosen < 0)
            break; // fewer distinct elements than requested seeds
          seeds.push_back(chosen);
        }
    }

    std::vector<int>             assigned(static_cast<std::size_t>(n), -1);
    std::vector<detail::Cluster> clusters(
      static_cast<std::size_t>(target_n_elements));
    std::vector<std::vector<int>> vertex_clusters(
      static_cast<std::size_t>(fine.n_vertices()));

    auto claim = [&](int t, int c) {
      assigned[static_cast<std::size_t>(t)] = c;
      detail::Cluster &cl = clusters[static_cast<std::size_t>(c)];
      cl.members.push_back(t);
      cl.area += area[static_cast<std::size_t>(t)];
      for (int v : fine.elements[static_cast<std::size_t>(t)])
        {
          auto &vc = vertex_clusters[static_cast<std::size_t>(v)];
          if (std::find(vc.begin(), vc.end(), c) == vc.end())
            vc.push_back(c);
        }
      for (const auto &[nbr, face] : adj[static_cast<std::size_t>(t)])
        if (assigned[static_cast<std::size_t>(nbr)] < 0)
          cl.frontier.push_back(nbr);
    };

    // Duplicate seeds can occur on tiny meshes; keep the first claimant.
    int n_clusters = 0;
    for (int c = 0; c < target_n_elements; ++c)
      {
        const int s = seeds[static_cast<std::size_t>(c)];
        if (assigned[static_cast<std::size_t>(s)] >= 0)
          continue;
        clusters[static_cast<std::size_t>(n_clusters)].seed_centroid =
          centroid[static_cast<std::size_t>(s)];
        claim(s, n_clusters);
        ++n_clusters;
      }
    clusters.resize(static_cast<std::size_t>(n_clusters));

    // Grow smallest-area cluster first for balanced sizes.
    using Entry = std::pair<Real, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    for (int c = 0; c < n_clusters; ++c)
      queue.emplace(clusters[static_cast<std::size_t>(c)].area, c);
    while (!queue.empty())
      {
        const auto [a, c] = queue.top();
        queue.pop();
        detail::Cluster &cl = clusters[static_cast<std::size_t>(c)];
        if (a != cl.area)
          continue; // stale entry

        // Admissible frontier candidate closest to the seed.
        int  best    = -1;
        Real best_d2 = std::numeric_limits<Real>::infinity();
        std::vector<int> keep;
        for (int t : cl.frontier)
          {
            if (assigned[static_cast<std::size_t>(t)] >= 0)
              continue;
            keep.push_back(t);
            if (!detail::joins_as_disk(fine, adj, vertex_clusters, assigned,
                                       t, c))
              continue;
            const Real d2 =
              (centroid[static_cast<std::size_t>(t)] - cl.seed_centroid)
                .squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && t < best))
              {
                best_d2 = d2;
                best    = t;
              }
          }
        cl.frontier = std::move(keep);
        if (best < 0)
          continue; // dormant: nothing admissible right now
        claim(best, c);
        queue.emplace(cl.area, c);
      }

    // Leftovers: attach to the smallest admissible adjacent cluster;
    // whatever remains becomes a cluster of its own.
    bool progress = true;
    while (progress)
      {
        progress = false;
        for (int t = 0; t < n; ++t)
          {
            if (assigned[static_cast<std::size_t>(t)] >= 0)
              continue;
            int  best    = -1;
            Real best_area = std::numeric_limits<Real>::infinity();
            for (const auto &[nbr, face] : adj[static_cast<std::size_t>(t)])
              {
                const int c = assigned[static_cast<std::size_t>(nbr)];
                if (c < 0)
                  continue;
                if (clusters[static_cast<std::size_t>(c)].area >= best_area)
                  continue;
                if (detail::joins_as_disk(fine, adj, vertex_clusters,
                                          assigned, t, c))
                  {
                    best      = c;
                    best_area = clusters[static_cast<std::size_t>(c)].area;
                  }
              }
            if (best >= 0)
              {
                claim(t, best);
                progress = true;
              }
          }
      }
    for (int t = 0; t < n; ++t)
      if (assigned[static_cast<std::size_t>(t)] < 0)
        {
          const int c = static_cast<int>(clusters.size());
          clusters.push_back({});
          clusters.back().seed_centroid = centroid[static_cast<std::size_t>(t)];
          claim(t, c);
          // Grow the new cluster through its whole unassigned component.
          bool grew = true;
          while (grew)
            {
              grew = false;
              auto &cl = clusters[static_cast<std::size_t>(c)];
              for (int u : cl.frontier)
                if (assigned[static_cast<std::size_t>(u)] < 0 &&
                    detail::joins_as_disk(fine, adj, vertex_clusters,
                                          assigned, u, c))
                  {
                    claim(u, c);
                    grew = true;
                    break;
                  }
            }
        }

    // Assemble the coarse mesh; clusters without a simple boundary fall
    // back to their individual fine elements.
    PolyMesh coarse;
    coarse.vertices = fine.vertices;
    for (const detail::Cluster &cl : clusters)
      {
        if (cl.members.empty())
          continue;
        std::vector<int> loop;
        if (detail::cluster_boundary(fine, cl.members, loop))
          coarse.elements.push_back(std::move(loop));
        else
          for (int t : cl.members)
            coarse.elements.push_back(fine.elements[static_cast<std::size_t>(t)]);
      }

    // Drop unused vertices and reindex.
    std::vector<int> remap(static_cast<std::size_t>(fine.n_vertices()), -1);
    std::vector<Vec2> used;
    for (auto &el : coarse.elements)
      for (int &v : el)
        {
          if (remap[static_cast<std::size_t>(v)] < 0)
            {
              remap[static_cast<std::size_t>(v)] = static_cast<int>(used.size());
              used.push_back(coarse.vertices[static_cast<std::size_t>(v)]);
            }
          v = remap[static_cast<std::size_t>(v)];
        }
    coarse.vertices = std::move(used);
    for (const auto &[key, tag] : fine.boundary_tags)
      {
        const int a = remap[static_cast<std::size_t>(key.first)];
        const int b = remap[static_cast<std::size_t>(key.second)];
        if (a >= 0 && b >= 0)
          coarse.boundary_tags[{std::min(a, b), std::max(a, b)}] = tag;
      }

    validate_mesh(coarse);
    build_face_topology(coarse);
    return coarse;
  }
} // namespace polydg

#endif // POLYDG_AGGLOMERATE_HPP
