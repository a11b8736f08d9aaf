// Copyright 2026 The gentrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>

#include "gentrieval/docid.hpp"
#include "gentrieval/error.hpp"

namespace gentrieval {

namespace {

using Point = std::vector<double>;

double squared_distance(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

struct Clustering {
  std::vector<Point> centroids;
  std::vector<std::size_t> assignment;  // point -> centroid
};

std::vector<std::size_t> nearest(const std::vector<Point>& points,
                                 const std::vector<Point>& centroids) {
  std::vector<std::size_t> out(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        out[i] = c;
      }
    }
  }
  return out;
}

// Points are ordered by document key, so index 0 is the lowest-key member.
std::vector<Point> farthest_point_init(const std::vector<Point>& points, std::size_t k) {
  std::vector<Point> centroids{points.front()};
  std::vector<double> min_dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    min_dist[i] = squared_distance(points[i], centroids.front());
  }
  while (centroids.size() < k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (min_dist[i] > min_dist[best]) best = i;
    }
    if (min_dist[best] == 0.0) break;  // fewer distinct points than k
    centroids.push_back(points[best]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

// Lloyd iterations. On exit every point is assigned to its nearest centroid
// and each centroid is the mean of some earlier assignment, which keeps the
// quantization error at or below the error of the zero centroid.
Clustering kmeans(const std::vector<Point>& points, std::size_t k, int max_iterations) {
  Clustering result;
  result.centroids = farthest_point_init(points, k);
  result.assignment = nearest(points, result.centroids);
  const std::size_t dim = points.front().size();
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<Point> sums(result.centroids.size(), Point(dim, 0.0));
    std::vector<std::size_t> counts(result.centroids.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[result.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[result.assignment[i]];
    }
    for (std::size_t c = 0; c < result.centroids.size(); ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        result.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    auto next = nearest(points, result.centroids);
    if (next == result.assignment) break;
    result.assignment = std::move(next);
  }

  // Drop empty clusters, preserving order.
  std::vector<std::size_t> remap(result.centroids.size(), 0);
  std::vector<bool> used(result.centroids.size(), false);
  for (auto c : result.assignment) used[c] = true;
  std::vector<Point> kept;
  for (std::size_t c = 0; c < result.centroids.size(); ++c) {
    if (!used[c]) continue;
    remap[c] = kept.size();
    kept.push_back(std::move(result.centroids[c]));
  }
  for (auto& c : result.assignment) c = remap[c];
  result.centroids = std::move(kept);
  return result;
}

}  // namespace

std::vector<std::size_t> RqHierarchy::path(std::string_view doc_key) const {
  auto it = leaf_of.find(std::string(doc_key));
  if (it == leaf_of.end()) throw Error(Errc::kUnknownDoc, std::string(doc_key));
  std::vector<std::size_t> out;
  for (std::size_t n = it->second; nodes[n].parent.has_value(); n = *nodes[n].parent) {
    out.push_back(n);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

RqHierarchy build_rq_hierarchy(const std::map<std::string, EmbeddingVector>& vectors,
                               const RqOptions& options) {
  if (vectors.empty()) throw Error(Errc::kDegenerateInput, "no vectors to cluster");
  if (options.levels < 1) throw Error(Errc::kConfig, "levels must be >= 1");
  if (options.branching < 1) throw Error(Errc::kConfig, "branching must be >= 1");
  const std::size_t dim = vectors.begin()->second.dim();
  if (dim == 0) throw Error(Errc::kDegenerateInput, "zero-dimensional vectors");
  for (const auto& [key, v] : vectors) {
    if (v.dim() != dim) {
      throw Error(Errc::kDegenerateInput, "dimension mismatch for '" + key + "'");
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) {
        throw Error(Errc::kDegenerateInput, "non-finite entry in '" + key + "'");
      }
    }
  }

  RqHierarchy h;
  h.levels = options.levels;
  h.branching = options.branching;
  h.dim = dim;

  std::map<std::string, Point> residual;
  RqNode root;
  root.centroid.assign(dim, 0.0);
  for (const auto& [key, v] : vectors) {
    residual.emplace(key, v.values);
    root.doc_keys.push_back(key);
  }
  h.nodes.push_back(std::move(root));

  std::vector<std::size_t> frontier{0};
  for (int level = 1; level <= options.levels; ++level) {
    std::vector<std::size_t> next;
    for (std::size_t parent : frontier) {
      const std::vector<std::string> members = h.nodes[parent].doc_keys;
      std::vector<Point> points;
      points.reserve(members.size());
      for (const auto& key : members) points.push_back(residual.at(key));

      const std::size_t k =
          std::min<std::size_t>(static_cast<std::size_t>(options.branching), members.size());
      Clustering clusters = kmeans(points, k, options.max_iterations);

      const std::size_t first_child = h.nodes.size();
      for (auto& centroid : clusters.centroids) {
        RqNode child;
        child.level = level;
        child.parent = parent;
        child.centroid = std::move(centroid);
        h.nodes[parent].children.push_back(h.nodes.size());
        next.push_back(h.nodes.size());
        h.nodes.push_back(std::move(child));
      }
      for (std::size_t i = 0; i < members.size(); ++i) {
        RqNode& child = h.nodes[first_child + clusters.assignment[i]];
        child.doc_keys.push_back(members[i]);
        Point& r = residual.at(members[i]);
        for (std::size_t d = 0; d < dim; ++d) r[d] -= child.centroid[d];
      }
    }
    frontier = std::move(next);
  }

  for (std::size_t leaf : frontier) {
    if (options.disambiguate_leaves && h.nodes[leaf].doc_keys.size() > 1) {
      const std::vector<std::string> members = h.nodes[leaf].doc_keys;
      for (const auto& key : members) {
        RqNode child;
        child.level = options.levels + 1;
        child.document_level = true;
        child.parent = leaf;
        child.centroid = residual.at(key);
        child.doc_keys = {key};
        std::fill(residual.at(key).begin(), residual.at(key).end(), 0.0);
        h.nodes[leaf].children.push_back(h.nodes.size());
        h.leaf_of[key] = h.nodes.size();
        h.nodes.push_back(std::move(child));
      }
    } else {
      for (const auto& key : h.nodes[leaf].doc_keys) h.leaf_of[key] = leaf;
    }
  }
  return h;
}

}  // namespace gentrieval
