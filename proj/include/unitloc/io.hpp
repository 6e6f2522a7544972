#pragma once

#include <map>
#include <string>
#include <vector>

#include "unitloc/activation.hpp"
#include "unitloc/encoding.hpp"
#include "unitloc/localization.hpp"
#include "unitloc/model.hpp"

namespace unitloc {

// Raw little-endian float32, row-major. Shape comes from the manifest that
// accompanies every matrix file.
void write_matrix_f32(const std::string& path, const MatrixXfRM& m);
MatrixXfRM read_matrix_f32(const std::string& path, Eigen::Index rows,
                           Eigen::Index cols);

// Activation dump directory: manifest.json + activations.bin.
void save_activation_dump(const std::string& dir, const ActivationMatrix& m);
ActivationMatrix load_activation_dump(const std::string& dir);

// Mask file: one JSON record with model id, geometry, [layer, dim] pairs
// and provenance.
void save_mask(const std::string& path, const AblationMask& mask);
AblationMask load_mask(const std::string& path);

// Ranking table: unit layer/dim, t, df, p, FDR-significance flag, in rank
// order. Round-trips exactly via the shortest-exact float format.
void save_ranking_csv(const std::string& path,
                      const SelectivityRanking& ranking, double fdr_alpha);
SelectivityRanking load_ranking_csv(const std::string& path,
                                    const ModelGeometry& g,
                                    const std::string& model_id);

// Neural dataset directory: manifest.json + stimuli.txt + responses.bin
// (+ groups.txt).
void save_neural_dataset(const std::string& dir, const NeuralDataset& data);
NeuralDataset load_neural_dataset(const std::string& dir);

// CSV helpers. Values are written with enough digits to round-trip.
std::string format_double(double v);
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Run manifest: config hash, model id, seeds, and a digest-indexed list of
// every artifact in the run directory.
class RunManifest {
 public:
  RunManifest() = default;
  RunManifest(std::string run_dir, std::string config_hash,
              std::string model_id);

  // Computes the file digest and records the path (relative to the run
  // directory).
  void add_artifact(const std::string& relative_path,
                    const std::string& kind);
  void set_field(const std::string& key, const std::string& value);

  void save() const;
  static RunManifest load(const std::string& run_dir);

  // Digest check for one artifact; throws MissingRunArtifactsError when the
  // file is absent or unindexed.
  void verify_artifact(const std::string& relative_path) const;
  const std::map<std::string, std::string>& artifacts() const {
    return artifact_digests_;
  }
  const std::string& run_dir() const { return run_dir_; }
  const std::string& model_id() const { return model_id_; }
  const std::map<std::string, std::string>& fields() const { return fields_; }

 private:
  std::string run_dir_;
  std::string config_hash_;
  std::string model_id_;
  std::map<std::string, std::string> fields_;
  std::map<std::string, std::string> artifact_digests_;  // rel path -> sha
  std::map<std::string, std::string> artifact_kinds_;
};

}  // namespace unitloc
