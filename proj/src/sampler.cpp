#include "deepgraph/sampler.hpp"

#include <algorithm>
#include <numeric>

namespace deepgraph {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

SamplerParams SamplerParams::defaults_for(int num_nodes, int thre) {
  SamplerParams p;
  p.thre = std::max(1, thre);
  p.n_init = std::max(1, ceil_div(num_nodes, 4));
  p.n_sample = std::max(1, ceil_div(num_nodes, 8));
  p.top_k = 2 * p.n_sample;
  p.m_max = std::max(p.n_init, num_nodes);
  return p;
}

std::optional<std::string> SamplerParams::check() const {
  if (thre <= 0 || n_init <= 0 || top_k <= 0 || n_sample <= 0 || m_max <= 0) {
    return "sampler parameters must be positive";
  }
  if (n_sample > top_k) return "n_sample must not exceed top_k";
  if (m_max < n_init) return "m_max must be at least n_init";
  return std::nullopt;
}

std::vector<int> sample_substructures(const SubstructureSet& set, int num_nodes, const SamplerParams& p,
                                      Rng& rng) {
  std::vector<int> chosen;
  if (set.items.empty()) return chosen;
  const int total = static_cast<int>(set.items.size());
  std::vector<std::uint8_t> used(total, 0);
  std::vector<int> cover(num_nodes, 0);

  auto take = [&](int idx) {
    used[idx] = 1;
    chosen.push_back(idx);
    for (int v : set.items[idx].nodes) ++cover[v];
  };

  // Initial draw: round-robin over kinds, uniform within a kind.
  std::vector<std::vector<int>> pools;
  for (const auto& ids : set.by_kind) {
    if (!ids.empty()) pools.push_back(ids);
  }
  const int n_init = std::min({p.n_init, p.m_max, total});
  std::size_t turn = pools.empty() ? 0 : uniform_index(rng, pools.size());
  while (static_cast<int>(chosen.size()) < n_init && !pools.empty()) {
    turn %= pools.size();
    auto& pool = pools[turn];
    std::size_t j = uniform_index(rng, pool.size());
    take(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
    if (pool.empty()) {
      pools.erase(pools.begin() + static_cast<std::ptrdiff_t>(turn));
    } else {
      ++turn;
    }
  }

  std::vector<int> cnt(total, 0);
  std::vector<int> candidates;
  while (static_cast<int>(chosen.size()) < p.m_max) {
    bool all_covered = true;
    for (int c : cover) {
      if (c < p.thre) {
        all_covered = false;
        break;
      }
    }
    if (all_covered) break;

    candidates.clear();
    for (int i = 0; i < total; ++i) {
      if (used[i]) continue;
      int c = 0;
      for (int v : set.items[i].nodes) c += cover[v] < p.thre ? 1 : 0;
      cnt[i] = c;
      if (c > 0) candidates.push_back(i);
    }
    // Remaining items cannot reduce the deficit; treat the pool as exhausted.
    if (candidates.empty()) break;

    // Rank by cnt descending, ties in uniformly random order.
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return cnt[a] > cnt[b]; });
    if (static_cast<int>(candidates.size()) > p.top_k) candidates.resize(p.top_k);

    const int draws = std::min({p.n_sample, p.m_max - static_cast<int>(chosen.size()),
                                static_cast<int>(candidates.size())});
    for (int d = 0; d < draws; ++d) {
      std::size_t j = d + uniform_index(rng, candidates.size() - d);
      std::swap(candidates[d], candidates[j]);
      take(candidates[d]);
    }
  }
  return chosen;
}

}  // namespace deepgraph
