#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "unitloc/errors.hpp"

namespace unitloc {

// Shape of a model's unit universe: one unit per (layer, dimension) of the
// per-block output.
struct ModelGeometry {
  int n_layers = 0;
  int hidden_dim = 0;

  std::int64_t unit_count() const {
    return static_cast<std::int64_t>(n_layers) * hidden_dim;
  }
  bool operator==(const ModelGeometry&) const = default;
};

struct UnitId {
  int layer = 0;
  int dim = 0;

  auto operator<=>(const UnitId&) const = default;

  std::int64_t flat(const ModelGeometry& g) const {
    return static_cast<std::int64_t>(layer) * g.hidden_dim + dim;
  }
  static UnitId from_flat(std::int64_t index, const ModelGeometry& g) {
    return UnitId{static_cast<int>(index / g.hidden_dim),
                  static_cast<int>(index % g.hidden_dim)};
  }
  bool valid_for(const ModelGeometry& g) const {
    return layer >= 0 && layer < g.n_layers && dim >= 0 && dim < g.hidden_dim;
  }
};

// Sorted, duplicate-free set of units, all valid for one geometry.
class UnitSet {
 public:
  UnitSet() = default;
  static UnitSet from_units(std::vector<UnitId> units, const ModelGeometry& g);

  const std::vector<UnitId>& units() const { return units_; }
  const ModelGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  bool contains(const UnitId& u) const;
  bool intersects(const UnitSet& other) const;

  auto begin() const { return units_.begin(); }
  auto end() const { return units_.end(); }

 private:
  std::vector<UnitId> units_;
  ModelGeometry geometry_;
};

}  // namespace unitloc
