#include "unitloc/io.hpp"

#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "unitloc/digest.hpp"

namespace unitloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileMissingError("cannot open " + path);
  try {
    json doc;
    f >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw MalformedRecordError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw FileMissingError("cannot write " + path);
  f << doc.dump(2) << "\n";
}

}  // namespace

void write_matrix_f32(const std::string& path, const MatrixXfRM& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FileMissingError("cannot write " + path);
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * m.size()));
}

MatrixXfRM read_matrix_f32(const std::string& path, Eigen::Index rows,
                           Eigen::Index cols) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FileMissingError("cannot open " + path);
  MatrixXfRM m(rows, cols);
  f.read(reinterpret_cast<char*>(m.data()),
         static_cast<std::streamsize>(sizeof(float) * m.size()));
  if (f.gcount() != static_cast<std::streamsize>(sizeof(float) * m.size())) {
    throw MalformedRecordError(path + ": truncated matrix file");
  }
  return m;
}

void save_activation_dump(const std::string& dir, const ActivationMatrix& m) {
  m.validate();
  fs::create_directories(dir);
  const std::string bin = (fs::path(dir) / "activations.bin").string();
  write_matrix_f32(bin, m.values);
  json manifest = {
      {"format", "unitloc-activations/v1"},
      {"model_id", m.model_id},
      {"n_layers", m.geometry.n_layers},
      {"hidden_dim", m.geometry.hidden_dim},
      {"n_stimuli", m.values.rows()},
      {"pooling", to_string(m.pooling)},
      {"dtype", "float32"},
      {"layout", "row-major"},
      {"stimuli_sha256", m.stimuli_sha256},
      {"data_file", "activations.bin"},
      {"data_sha256", sha256_file_hex(bin)},
  };
  write_json_file((fs::path(dir) / "manifest.json").string(), manifest);
}

Pooling pooling_from_string(const std::string& s) {
  if (s == "last_token") return Pooling::last_token;
  if (s == "mean_tokens") return Pooling::mean_tokens;
  throw ConfigError("unknown pooling: " + s);
}

ActivationMatrix load_activation_dump(const std::string& dir) {
  const auto manifest =
      read_json_file((fs::path(dir) / "manifest.json").string());
  if (manifest.value("format", "") != "unitloc-activations/v1") {
    throw MalformedRecordError(dir + ": not an activation dump");
  }
  ActivationMatrix m;
  m.model_id = manifest.at("model_id").get<std::string>();
  m.geometry = ModelGeometry{manifest.at("n_layers").get<int>(),
                             manifest.at("hidden_dim").get<int>()};
  m.pooling = pooling_from_string(manifest.at("pooling").get<std::string>());
  m.stimuli_sha256 = manifest.at("stimuli_sha256").get<std::string>();
  const std::string bin =
      (fs::path(dir) / manifest.at("data_file").get<std::string>()).string();
  if (sha256_file_hex(bin) != manifest.at("data_sha256").get<std::string>()) {
    throw MalformedRecordError(bin + ": digest mismatch");
  }
  m.values = read_matrix_f32(bin, manifest.at("n_stimuli").get<Eigen::Index>(),
                             m.geometry.unit_count());
  m.validate();
  return m;
}

void save_mask(const std::string& path, const AblationMask& mask) {
  json units = json::array();
  for (const auto& u : mask.units) {
    units.push_back({u.layer, u.dim});
  }
  json provenance = {{"method", mask.provenance.method},
                     {"percent", mask.provenance.percent}};
  if (mask.provenance.seed) provenance["seed"] = *mask.provenance.seed;
  const json doc = {
      {"format", "unitloc-mask/v1"},
      {"model_id", mask.model_id},
      {"n_layers", mask.geometry.n_layers},
      {"hidden_dim", mask.geometry.hidden_dim},
      {"mode", mask.mode},
      {"units", units},
      {"provenance", provenance},
  };
  write_json_file(path, doc);
}

AblationMask load_mask(const std::string& path) {
  const auto doc = read_json_file(path);
  if (doc.value("format", "") != "unitloc-mask/v1") {
    throw MalformedRecordError(path + ": not a mask file");
  }
  AblationMask mask;
  mask.model_id = doc.at("model_id").get<std::string>();
  mask.geometry = ModelGeometry{doc.at("n_layers").get<int>(),
                                doc.at("hidden_dim").get<int>()};
  mask.mode = doc.value("mode", "zero");
  std::vector<UnitId> units;
  for (const auto& pair : doc.at("units")) {
    units.push_back(UnitId{pair.at(0).get<int>(), pair.at(1).get<int>()});
  }
  mask.units = UnitSet::from_units(std::move(units), mask.geometry);
  if (doc.contains("provenance")) {
    const auto& p = doc["provenance"];
    mask.provenance.method = p.value("method", "selected");
    mask.provenance.percent = p.value("percent", 0.0);
    if (p.contains("seed")) {
      mask.provenance.seed = p["seed"].get<std::uint64_t>();
    }
  }
  return mask;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw FileMissingError("cannot write " + path);
  const auto join = [&f](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) f << ",";
      f << cells[i];
    }
    f << "\n";
  };
  join(header);
  for (const auto& row : rows) join(row);
}

void save_ranking_csv(const std::string& path,
                      const SelectivityRanking& ranking, double fdr_alpha) {
  const auto significant = fdr_bh(ranking.p_flat(), fdr_alpha);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ranking.order.size());
  for (const auto& s : ranking.order) {
    rows.push_back({std::to_string(s.unit.layer), std::to_string(s.unit.dim),
                    format_double(s.t), format_double(s.df),
                    format_double(s.p_one_sided),
                    significant[s.unit.flat(ranking.geometry)] ? "1" : "0"});
  }
  write_csv(path, {"layer", "dim", "t", "df", "p_one_sided", "significant"},
            rows);
}

SelectivityRanking load_ranking_csv(const std::string& path,
                                    const ModelGeometry& g,
                                    const std::string& model_id) {
  std::ifstream f(path);
  if (!f) throw FileMissingError("cannot open ranking: " + path);
  SelectivityRanking ranking;
  ranking.geometry = g;
  ranking.model_id = model_id;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) {
      throw MalformedRecordError(path + ": short ranking row");
    }
    UnitStat s;
    s.unit = UnitId{std::stoi(cells[0]), std::stoi(cells[1])};
    s.t = std::stod(cells[2]);
    s.df = std::stod(cells[3]);
    s.p_one_sided = std::stod(cells[4]);
    ranking.order.push_back(s);
  }
  if (static_cast<std::int64_t>(ranking.order.size()) != g.unit_count()) {
    throw ShapeMismatchError(path + ": ranking does not cover the universe");
  }
  return ranking;
}

void save_neural_dataset(const std::string& dir, const NeuralDataset& data) {
  data.validate();
  fs::create_directories(dir);
  {
    std::ofstream f((fs::path(dir) / "stimuli.txt").string());
    for (const auto& s : data.stimuli) f << s << "\n";
  }
  const std::string bin = (fs::path(dir) / "responses.bin").string();
  write_matrix_f32(bin, data.responses);
  json manifest = {
      {"format", "unitloc-neural/v1"},
      {"n_stimuli", data.responses.rows()},
      {"n_targets", data.responses.cols()},
      {"dtype", "float32"},
      {"layout", "row-major"},
      {"stimuli_file", "stimuli.txt"},
      {"responses_file", "responses.bin"},
      {"responses_sha256", sha256_file_hex(bin)},
  };
  if (!data.group_ids.empty()) {
    std::ofstream f((fs::path(dir) / "groups.txt").string());
    for (const auto& g : data.group_ids) f << g << "\n";
    manifest["groups_file"] = "groups.txt";
  }
  if (data.noise_ceiling) manifest["noise_ceiling"] = *data.noise_ceiling;
  write_json_file((fs::path(dir) / "manifest.json").string(), manifest);
}

NeuralDataset load_neural_dataset(const std::string& dir) {
  const auto manifest =
      read_json_file((fs::path(dir) / "manifest.json").string());
  if (manifest.value("format", "") != "unitloc-neural/v1") {
    throw MalformedRecordError(dir + ": not a neural dataset");
  }
  NeuralDataset data;
  {
    std::ifstream f(
        (fs::path(dir) / manifest.at("stimuli_file").get<std::string>())
            .string());
    if (!f) throw FileMissingError(dir + ": missing stimuli file");
    std::string line;
    while (std::getline(f, line)) data.stimuli.push_back(line);
  }
  data.responses = read_matrix_f32(
      (fs::path(dir) / manifest.at("responses_file").get<std::string>())
          .string(),
      manifest.at("n_stimuli").get<Eigen::Index>(),
      manifest.at("n_targets").get<Eigen::Index>());
  if (manifest.contains("groups_file")) {
    std::ifstream f(
        (fs::path(dir) / manifest["groups_file"].get<std::string>())
            .string());
    if (!f) throw FileMissingError(dir + ": missing groups file");
    std::string line;
    while (std::getline(f, line)) data.group_ids.push_back(line);
  }
  if (manifest.contains("noise_ceiling")) {
    data.noise_ceiling = manifest["noise_ceiling"].get<double>();
  }
  data.validate();
  return data;
}

RunManifest::RunManifest(std::string run_dir, std::string config_hash,
                         std::string model_id)
    : run_dir_(std::move(run_dir)),
      config_hash_(std::move(config_hash)),
      model_id_(std::move(model_id)) {}

void RunManifest::add_artifact(const std::string& relative_path,
                               const std::string& kind) {
  const auto full = fs::path(run_dir_) / relative_path;
  artifact_digests_[relative_path] = sha256_file_hex(full.string());
  artifact_kinds_[relative_path] = kind;
}

void RunManifest::set_field(const std::string& key, const std::string& value) {
  fields_[key] = value;
}

void RunManifest::save() const {
  json artifacts = json::object();
  for (const auto& [path, digest] : artifact_digests_) {
    artifacts[path] = {{"sha256", digest},
                       {"kind", artifact_kinds_.at(path)}};
  }
  const json doc = {
      {"format", "unitloc-manifest/v1"},
      {"config_sha256", config_hash_},
      {"model_id", model_id_},
      {"fields", fields_},
      {"artifacts", artifacts},
  };
  write_json_file((fs::path(run_dir_) / "manifest.json").string(), doc);
}

RunManifest RunManifest::load(const std::string& run_dir) {
  const auto path = (fs::path(run_dir) / "manifest.json").string();
  if (!fs::exists(path)) {
    throw MissingRunArtifactsError("no manifest in " + run_dir);
  }
  const auto doc = read_json_file(path);
  if (doc.value("format", "") != "unitloc-manifest/v1") {
    throw MalformedRecordError(path + ": not a run manifest");
  }
  RunManifest m(run_dir, doc.at("config_sha256").get<std::string>(),
                doc.at("model_id").get<std::string>());
  if (doc.contains("fields")) {
    for (const auto& [k, v] : doc["fields"].items()) {
      m.fields_[k] = v.get<std::string>();
    }
  }
  for (const auto& [path_key, entry] : doc.at("artifacts").items()) {
    m.artifact_digests_[path_key] = entry.at("sha256").get<std::string>();
    m.artifact_kinds_[path_key] = entry.value("kind", "");
  }
  return m;
}

void RunManifest::verify_artifact(const std::string& relative_path) const {
  const auto it = artifact_digests_.find(relative_path);
  if (it == artifact_digests_.end()) {
    throw MissingRunArtifactsError("artifact not indexed: " + relative_path);
  }
  const auto full = (fs::path(run_dir_) / relative_path).string();
  if (!fs::exists(full)) {
    throw MissingRunArtifactsError("artifact missing on disk: " +
                                   relative_path);
  }
  if (sha256_file_hex(full) != it->second) {
    throw MissingRunArtifactsError("artifact digest mismatch: " +
                                   relative_path);
  }
}

}  // namespace unitloc
