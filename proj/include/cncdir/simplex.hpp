#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cncdir/common.hpp"

namespace cncdir {

// A point of the open unit simplex: every coordinate strictly in (0, 1) and
// the coordinate sum strictly below 1. The implicit last component is
// remainder().
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> coords)
      : coords_(std::move(coords)) {
    if (coords_.empty()) throw DomainError("SimplexPoint: empty coordinates");
    double sum = 0.0;
    for (double c : coords_) {
      if (!(c > 0.0 && c < 1.0))
        throw DomainError("SimplexPoint: coordinate outside (0,1): " +
                          std::to_string(c));
      sum += c;
    }
    if (!(sum < 1.0))
      throw DomainError("SimplexPoint: coordinate sum not below 1");
    remainder_ = 1.0 - sum;
  }

  SimplexPoint(std::initializer_list<double> coords)
      : SimplexPoint(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  double remainder() const { return remainder_; }

 private:
  std::vector<double> coords_;
  double remainder_ = 0.0;
};

}  // namespace cncdir
