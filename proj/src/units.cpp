#include "unitloc/units.hpp"

#include <algorithm>

namespace unitloc {

UnitSet UnitSet::from_units(std::vector<UnitId> units,
                            const ModelGeometry& g) {
  for (const auto& u : units) {
    if (!u.valid_for(g)) {
      throw ModelMismatchError("unit (" + std::to_string(u.layer) + "," +
                               std::to_string(u.dim) +
                               ") out of range for geometry " +
                               std::to_string(g.n_layers) + "x" +
                               std::to_string(g.hidden_dim));
    }
  }
  std::sort(units.begin(), units.end());
  const auto dup = std::adjacent_find(units.begin(), units.end());
  if (dup != units.end()) {
    throw ModelMismatchError("duplicate unit in set");
  }
  UnitSet s;
  s.units_ = std::move(units);
  s.geometry_ = g;
  return s;
}

bool UnitSet::contains(const UnitId& u) const {
  return std::binary_search(units_.begin(), units_.end(), u);
}

bool UnitSet::intersects(const UnitSet& other) const {
  auto a = units_.begin();
  auto b = other.units_.begin();
  while (a != units_.end() && b != other.units_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace unitloc
