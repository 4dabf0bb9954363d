#include "semreg/max_clique.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace semreg {

namespace {

using Clock = std::chrono::steady_clock;

// Dynamic bitset over graph vertices.
struct Bits {
  std::vector<std::uint64_t> w;

  explicit Bits(int words = 0) : w(words, 0) {}
  void set(int i) { w[i / 64] |= std::uint64_t(1) << (i % 64); }
  void clear(int i) { w[i / 64] &= ~(std::uint64_t(1) << (i % 64)); }
  bool test(int i) const { return (w[i / 64] >> (i % 64)) & 1u; }
  bool any() const {
    for (auto x : w)
      if (x) return true;
    return false;
  }
  int count() const {
    int c = 0;
    for (auto x : w) c += __builtin_popcountll(x);
    return c;
  }
  int lowest() const {
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k]) return static_cast<int>(k * 64 + __builtin_ctzll(w[k]));
    return -1;
  }
  void and_with(const std::uint64_t* other) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] &= other[k];
  }
  void and_not(const std::uint64_t* other) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] &= ~other[k];
  }
};

struct SearchContext {
  const ConsistencyGraph& g;
  std::atomic<int>& best_size;
  std::atomic<bool>& abort;
  Clock::time_point deadline;
  std::uint64_t ticks = 0;

  bool expired() {
    if ((++ticks & 0x3ff) == 0 && Clock::now() > deadline)
      abort.store(true, std::memory_order_relaxed);
    return abort.load(std::memory_order_relaxed);
  }
};

// Greedy coloring of the candidate set; emits vertices with ascending
// color numbers. The color is an upper bound on the clique size within
// the remaining candidates.
void color_sort(const ConsistencyGraph& g, const Bits& cand,
                std::vector<std::pair<int, int>>& out) {
  out.clear();
  Bits uncolored = cand;
  int color = 0;
  while (uncolored.any()) {
    ++color;
    Bits q = uncolored;
    while (true) {
      const int v = q.lowest();
      if (v < 0) break;
      out.emplace_back(v, color);
      uncolored.clear(v);
      q.clear(v);
      q.and_not(g.row(v));
    }
  }
}

// Tomita-style expansion. `current` is the growing clique; candidates are
// mutually adjacent to all of it.
void expand(SearchContext& ctx, std::vector<int>& current, const Bits& cand,
            std::vector<int>& incumbent, std::mutex& incumbent_mu) {
  if (ctx.expired()) return;

  std::vector<std::pair<int, int>> colored;
  color_sort(ctx.g, cand, colored);

  for (int idx = static_cast<int>(colored.size()) - 1; idx >= 0; --idx) {
    const auto [v, color] = colored[idx];
    const int depth = static_cast<int>(current.size());
    if (depth + color <= ctx.best_size.load(std::memory_order_relaxed)) return;

    current.push_back(v);
    Bits next(static_cast<int>(cand.w.size()));
    next = cand;
    // Restrict to vertices before v in the color order to avoid revisits.
    for (int later = idx; later < static_cast<int>(colored.size()); ++later)
      next.clear(colored[later].first);
    next.and_with(ctx.g.row(v));

    if (!next.any()) {
      const int sz = static_cast<int>(current.size());
      int prev = ctx.best_size.load(std::memory_order_relaxed);
      while (sz > prev &&
             !ctx.best_size.compare_exchange_weak(prev, sz)) {
      }
      if (sz > prev) {
        std::lock_guard<std::mutex> lock(incumbent_mu);
        if (sz > static_cast<int>(incumbent.size())) incumbent = current;
      }
    } else {
      expand(ctx, current, next, incumbent, incumbent_mu);
      if (ctx.abort.load(std::memory_order_relaxed)) {
        current.pop_back();
        return;
      }
    }
    current.pop_back();
  }
}

// Degeneracy order: repeatedly remove a minimum-degree vertex (lowest
// index on ties).
std::vector<int> degeneracy_order(const ConsistencyGraph& g) {
  const int n = g.n_vertices();
  std::vector<int> degree(n, 0);
  std::vector<bool> removed(n, false);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && g.adjacent(i, j)) ++degree[i];

  std::vector<int> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    int v = -1;
    for (int i = 0; i < n; ++i)
      if (!removed[i] && (v < 0 || degree[i] < degree[v])) v = i;
    removed[v] = true;
    order.push_back(v);
    for (int j = 0; j < n; ++j)
      if (!removed[j] && g.adjacent(v, j)) --degree[j];
  }
  return order;
}

// Decision search: does `cand` contain a clique of size >= need?
bool exists_clique(SearchContext& ctx, const Bits& cand, int need) {
  if (need <= 0) return true;
  if (ctx.expired()) return false;
  std::vector<std::pair<int, int>> colored;
  color_sort(ctx.g, cand, colored);
  if (colored.empty() || colored.back().second < need) return false;
  for (int idx = static_cast<int>(colored.size()) - 1; idx >= 0; --idx) {
    const auto [v, color] = colored[idx];
    if (color < need) return false;
    Bits next = cand;
    for (int later = idx; later < static_cast<int>(colored.size()); ++later)
      next.clear(colored[later].first);
    next.and_with(ctx.g.row(v));
    if (exists_clique(ctx, next, need - 1)) return true;
  }
  return false;
}

}  // namespace

Clique max_clique(const ConsistencyGraph& graph, double time_budget_s,
                  int workers) {
  const int n = graph.n_vertices();
  if (n == 0) throw std::invalid_argument("max_clique: empty graph");
  if (time_budget_s <= 0)
    throw std::invalid_argument("max_clique: time budget must be positive");
  if (workers < 1) workers = 1;

  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(time_budget_s));

  const std::vector<int> order = degeneracy_order(graph);
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;

  std::atomic<int> best_size{1};
  std::atomic<bool> abort{false};
  std::vector<int> incumbent{order[0]};
  std::mutex incumbent_mu;
  std::atomic<int> next_root{0};

  auto worker_fn = [&]() {
    SearchContext ctx{graph, best_size, abort, deadline};
    std::vector<int> current;
    while (true) {
      const int r = next_root.fetch_add(1);
      if (r >= n || ctx.abort.load(std::memory_order_relaxed)) break;
      const int v = order[r];
      // Candidates: neighbors later in the degeneracy order.
      Bits cand(graph.words_per_row());
      for (int j = 0; j < n; ++j)
        if (rank[j] > r && graph.adjacent(v, j)) cand.set(j);
      if (cand.count() + 1 <= ctx.best_size.load(std::memory_order_relaxed))
        continue;
      current.assign(1, v);
      expand(ctx, current, cand, incumbent, incumbent_mu);
    }
  };

  if (workers == 1 || n < 64) {
    worker_fn();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
  }

  Clique result;
  result.approximate = abort.load();
  std::sort(incumbent.begin(), incumbent.end());
  result.vertices = incumbent;
  if (result.approximate) return result;

  // Deterministic tie-break: rebuild the lexicographically smallest
  // vertex set of the proven maximum size. Gets a fresh budget slice; on
  // expiry the incumbent (exact size, arbitrary tie) is kept.
  const int target = std::max<int>(best_size.load(), 1);
  std::atomic<bool> pass2_abort{false};
  std::atomic<int> unused{0};
  SearchContext ctx{graph, unused, pass2_abort,
                    Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(time_budget_s))};

  std::vector<int> lex;
  Bits cand(graph.words_per_row());
  for (int i = 0; i < n; ++i) cand.set(i);
  int need = target;
  while (need > 0) {
    bool advanced = false;
    Bits scan = cand;
    while (true) {
      const int v = scan.lowest();
      if (v < 0) break;
      scan.clear(v);
      Bits next = cand;
      next.and_with(graph.row(v));
      for (int u = 0; u <= v; ++u) next.clear(u);
      if (exists_clique(ctx, next, need - 1)) {
        lex.push_back(v);
        cand = next;
        --need;
        advanced = true;
        break;
      }
      cand.clear(v);
    }
    if (!advanced) break;  // should not happen; fall back to incumbent
  }
  if (static_cast<int>(lex.size()) == target) result.vertices = lex;
  return result;
}

Clique brute_force_max_clique(const ConsistencyGraph& graph) {
  const int n = graph.n_vertices();
  if (n == 0)
    throw std::invalid_argument("brute_force_max_clique: empty graph");
  if (n > 25)
    throw std::invalid_argument(
        "brute_force_max_clique: too many vertices (limit 25)");

  std::vector<std::uint64_t> adj(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && graph.adjacent(i, j)) adj[i] |= std::uint64_t(1) << j;

  std::vector<int> best{0};
  std::vector<int> current;

  // Enumerate cliques by ascending vertex, keeping (size desc, lex asc).
  auto consider = [&]() {
    if (current.size() > best.size() ||
        (current.size() == best.size() && current < best))
      best = current;
  };
  std::function<void(int, std::uint64_t)> rec = [&](int from,
                                                    std::uint64_t cand) {
    consider();
    for (int v = from; v < n; ++v) {
      if (!((cand >> v) & 1u)) continue;
      if (current.size() + static_cast<std::size_t>(
                               __builtin_popcountll(cand >> v)) <
          best.size())
        break;
      current.push_back(v);
      rec(v + 1, cand & adj[v]);
      current.pop_back();
    }
  };
  rec(0, (std::uint64_t(1) << n) - 1);

  Clique out;
  out.vertices = best;
  return out;
}

}  // namespace semreg
