#pragma once

#include <memory>

#include "coopvar/grid.hpp"
#include "coopvar/linops.hpp"
#include "coopvar/nonlocal.hpp"

namespace coopvar {

/// Everything a task needs, built once: the grid, the weight, and the two
/// region operators. Immutable after construction; shareable across workers.
struct System {
  Grid grid;
  WeightField weight;
  NonlinearitySpec nl;
  std::shared_ptr<ShiftedOperator> full;
  std::shared_ptr<ShiftedOperator> zero;

  Problem problem() const { return Problem{&grid, full.get(), &weight, nl}; }
};

inline System make_system(Grid grid, WeightField weight, NonlinearitySpec nl) {
  System s;
  s.grid = std::move(grid);
  s.weight = std::move(weight);
  s.nl = nl;
  s.full = std::make_shared<ShiftedOperator>(s.grid, Region::full);
  s.zero = std::make_shared<ShiftedOperator>(s.grid, Region::zero_only);
  return s;
}

}  // namespace coopvar
