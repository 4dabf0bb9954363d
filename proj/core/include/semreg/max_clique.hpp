#pragma once

#include <vector>

#include "semreg/consistency.hpp"

namespace semreg {

/// A clique of the consistency graph. `vertices` is sorted ascending.
/// `approximate` is set when the time budget expired before the search
/// proved maximality.
struct Clique {
  std::vector<int> vertices;
  bool approximate = false;

  int size() const { return static_cast<int>(vertices.size()); }
};

/// Branch-and-bound maximum clique with greedy-coloring upper bounds and
/// degeneracy-order roots. Exact when it finishes inside the budget; the
/// returned set is the lexicographically smallest maximum clique. Root
/// subtrees may be explored on `workers` threads sharing a monotone best
/// size. Throws std::invalid_argument on an empty graph or a non-positive
/// budget.
Clique max_clique(const ConsistencyGraph& graph, double time_budget_s,
                  int workers = 4);

/// Exhaustive oracle for tests; requires n_vertices <= 25. Ties are broken
/// by the lexicographically smallest vertex set.
Clique brute_force_max_clique(const ConsistencyGraph& graph);

}  // namespace semreg
