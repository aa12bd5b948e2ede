#pragma once

#include <vector>

#include "stackelberg/game.hpp"
#include "stackelberg/projections.hpp"

namespace stackelberg {

// The followers' joint feasible set { x : F_i x_i <= g_i for all i, A x <= b }.
// Projection is exact when every local set is a box and the coupling rows have
// pairwise disjoint supports; otherwise it falls back to Dykstra.
class CoupledSet {
 public:
  explicit CoupledSet(const AggregativeGame& game, DykstraOptions options = {1e-12, 100000});

  Vec project(const Vec& v) const;
  double violation(const Vec& x) const;
  bool exact() const { return exact_; }

 private:
  const AggregativeGame* game_;
  DykstraOptions options_;
  bool exact_ = false;
  Vec lo_;
  Vec hi_;
  std::vector<std::vector<Index>> supports_;
  std::vector<ConvexSetDescriptor> sets_;
};

}  // namespace stackelberg
