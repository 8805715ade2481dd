#pragma once

#include <Eigen/Core>

#include <compare>
#include <stdexcept>
#include <utility>

namespace diffpath {

using Index = Eigen::Index;

// Position of entry (i, j) of a d x d matrix in its column-major stacking:
// value = i + d * j.
struct VecIndex {
  Index value = 0;

  friend constexpr auto operator<=>(const VecIndex&, const VecIndex&) = default;
};

inline VecIndex index_of(Index i, Index j, Index d) {
  if (i < 0 || j < 0 || i >= d || j >= d) {
    throw std::out_of_range("index_of: (i, j) outside the d x d range");
  }
  return VecIndex{i + d * j};
}

inline std::pair<Index, Index> pair_of(VecIndex e, Index d) {
  if (e.value < 0 || e.value >= d * d) {
    throw std::out_of_range("pair_of: vec index outside [0, d^2)");
  }
  return {e.value % d, e.value / d};
}

// (i, j) -> (j, i).
inline VecIndex exchange_partner(VecIndex e, Index d) {
  const auto [i, j] = pair_of(e, d);
  return VecIndex{j + d * i};
}

inline bool is_diagonal(VecIndex e, Index d) {
  return e.value % d == e.value / d;
}

}  // namespace diffpath
