#include "curator/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace curator {

namespace {

// Candidate merge: linkage distance plus the tie key (sorted smallest
// member indices of the two clusters).
struct Cand {
  double d = std::numeric_limits<double>::infinity();
  std::size_t lo = 0, hi = 0;  // lo < hi, smallest member indices

  bool operator<(const Cand& o) const {
    if (d != o.d) return d < o.d;
    if (lo != o.lo) return lo < o.lo;
    return hi < o.hi;
  }
};

Cand make_cand(double d, std::size_t ma, std::size_t mb) {
  return {d, std::min(ma, mb), std::max(ma, mb)};
}

}  // namespace

std::vector<std::size_t> cluster_average_linkage(
    const std::vector<std::vector<double>>& points,
    std::size_t target_clusters) {
  const std::size_t n = points.size();
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i;
  if (n == 0 || target_clusters >= n) return labels;
  if (target_clusters == 0) target_clusters = 1;

  // Full pairwise matrix, maintained under Lance-Williams updates. Slot i
  // holds cluster i while active; merged clusters keep the lower slot.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0;
      for (std::size_t t = 0; t < points[i].size(); ++t) {
        const double diff = points[i][t] - points[j][t];
        d2 += diff * diff;
      }
      const double d = std::sqrt(d2);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }

  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> min_member(n);
  for (std::size_t i = 0; i < n; ++i) min_member[i] = i;

  // nearest[i]: best merge partner for active cluster i under Cand order.
  std::vector<std::size_t> nearest(n, 0);
  std::vector<Cand> best(n);
  auto recompute_nearest = [&](std::size_t i) {
    Cand b;
    std::size_t arg = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      Cand c = make_cand(dist[i * n + j], min_member[i], min_member[j]);
      if (c < b) {
        b = c;
        arg = j;
      }
    }
    best[i] = b;
    nearest[i] = arg;
  };
  for (std::size_t i = 0; i < n; ++i) recompute_nearest(i);

  std::size_t clusters = n;
  while (clusters > target_clusters) {
    // Global minimum over per-cluster nearest candidates.
    Cand gb;
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (best[i] < gb) {
        gb = best[i];
        a = i;
      }
    }
    std::size_t b = nearest[a];
    if (b < a) std::swap(a, b);  // keep the lower slot

    // UPGMA update: d(new, k) = (|a| d(a,k) + |b| d(b,k)) / (|a| + |b|).
    const double sa = static_cast<double>(size[a]);
    const double sb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double d = (sa * dist[a * n + k] + sb * dist[b * n + k]) / (sa + sb);
      dist[a * n + k] = d;
      dist[k * n + a] = d;
    }
    active[b] = false;
    size[a] += size[b];
    min_member[a] = std::min(min_member[a], min_member[b]);
    --clusters;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == b) labels[i] = a;
    if (clusters == target_clusters) break;

    recompute_nearest(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      if (nearest[k] == a || nearest[k] == b) {
        recompute_nearest(k);
      } else {
        // The merged cluster may have become k's best partner.
        Cand c = make_cand(dist[k * n + a], min_member[k], min_member[a]);
        if (c < best[k]) {
          best[k] = c;
          nearest[k] = a;
        }
      }
    }
  }

  // Map slot labels to the deterministic smallest-member-index id.
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = min_member[labels[i]];
  return out;
}

}  // namespace curator
