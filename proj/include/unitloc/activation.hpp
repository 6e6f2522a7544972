#pragma once

#include <Eigen/Core>
#include <string>

#include "unitloc/errors.hpp"
#include "unitloc/units.hpp"

namespace unitloc {

enum class Pooling { last_token, mean_tokens };

inline const char* to_string(Pooling p) {
  return p == Pooling::last_token ? "last_token" : "mean_tokens";
}
Pooling pooling_from_string(const std::string& s);

using MatrixXfRM =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pooled per-stimulus activations; row i is stimulus i, column u is the
// flat unit index layer*H + dim.
struct ActivationMatrix {
  MatrixXfRM values;
  ModelGeometry geometry;
  Pooling pooling = Pooling::last_token;
  std::string model_id;
  std::string stimuli_sha256;

  Eigen::Index n_stimuli() const { return values.rows(); }

  // Enforces the shape and finiteness invariants.
  void validate() const {
    if (values.cols() != geometry.unit_count()) {
      throw ShapeMismatchError(
          "activation matrix has " + std::to_string(values.cols()) +
          " columns, geometry expects " +
          std::to_string(geometry.unit_count()));
    }
    if (!values.allFinite()) {
      throw ShapeMismatchError("activation matrix contains NaN/Inf");
    }
  }
};

}  // namespace unitloc
