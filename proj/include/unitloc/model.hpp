#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "unitloc/activation.hpp"
#include "unitloc/errors.hpp"
#include "unitloc/stimuli.hpp"
#include "unitloc/units.hpp"

namespace unitloc {

struct TransformerConfig {
  int vocab_size = 0;
  int n_layers = 0;
  int n_heads = 0;
  int hidden_dim = 0;
  int mlp_dim = 0;
  int max_context = 0;
};

// Word-level tokenizer with byte fallback; see README "Tokenizer" for the
// exact rules. Vocab files are unitloc-vocab/v1 JSON.
class Tokenizer {
 public:
  static Tokenizer load(const std::string& vocab_path,
                        const std::string& bos_token = "<bos>");
  static Tokenizer from_tokens(std::vector<std::string> tokens,
                               const std::string& bos_token = "<bos>");

  std::vector<int> encode(std::string_view text, bool add_bos = true) const;
  std::string decode(std::span<const int> ids) const;

  int vocab_size() const { return static_cast<int>(tokens_.size()); }
  bool has_bos() const { return bos_id_ >= 0; }
  int bos_id() const { return bos_id_; }
  const std::string& token(int id) const { return tokens_[id]; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int bos_id_ = -1;
  int sp_id_ = -1;
  int byte0_id_ = -1;
};

struct BlockWeights {
  Eigen::VectorXf ln1_w, ln1_b;
  MatrixXfRM wq, wk, wv, wo;  // [out, in]
  Eigen::VectorXf bq, bk, bv, bo;
  Eigen::VectorXf ln2_w, ln2_b;
  MatrixXfRM w_fc, w_proj;
  Eigen::VectorXf b_fc, b_proj;
};

struct TransformerWeights {
  MatrixXfRM tok_emb;  // [V, H]; also the (tied) output head
  MatrixXfRM pos_emb;  // [max_context, H]
  std::vector<BlockWeights> blocks;
  Eigen::VectorXf lnf_w, lnf_b;
};

struct MaskProvenance {
  std::string method = "selected";  // selected | random
  double percent = 0.0;
  std::optional<std::uint64_t> seed;
};

// Units to zero in the block outputs during a forward pass.
struct AblationMask {
  std::string model_id;
  ModelGeometry geometry;
  UnitSet units;
  std::string mode = "zero";
  MaskProvenance provenance;
};

// Pre-norm decoder-only transformer: learned positions, causal multi-head
// attention, exact-GELU MLP, LayerNorm eps 1e-5, weight-tied head.
// Activations are float32; forward passes are deterministic.
class TransformerModel {
 public:
  static TransformerModel load(const std::string& model_dir);
  static TransformerModel from_weights(TransformerConfig config,
                                       Tokenizer tokenizer,
                                       TransformerWeights weights,
                                       std::string model_id);

  const TransformerConfig& config() const { return config_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const std::string& model_id() const { return model_id_; }
  ModelGeometry geometry() const {
    return ModelGeometry{config_.n_layers, config_.hidden_dim};
  }

  struct Forward {
    MatrixXfRM logits;                       // T x V
    std::vector<MatrixXfRM> block_outputs;   // L of T x H, if collected
  };
  Forward forward(std::span<const int> tokens,
                  const AblationMask* mask = nullptr,
                  bool collect_block_outputs = false) const;

 private:
  TransformerConfig config_;
  Tokenizer tokenizer_;
  TransformerWeights weights_;
  std::string model_id_;
};

// Lightweight handle combining a model with a validated mask; the
// underlying model is unchanged.
struct AblatedModel {
  const TransformerModel* model = nullptr;
  AblationMask mask;
};

// Validates the mask against the model (ModelMismatchError otherwise).
AblatedModel apply_ablation(const TransformerModel& model, AblationMask mask);

// Pooled block-output activations for every stimulus; max_tokens > 0
// truncates each stimulus to that many tokens first (-1 = unlimited).
// Pooling is over stimulus positions (the BOS position is excluded).
ActivationMatrix capture_pooled_activations(const TransformerModel& model,
                                            const StimulusSet& stimuli,
                                            Pooling pooling, int max_tokens,
                                            const AblationMask* mask = nullptr);

// Sum of per-token negative log-probabilities of `continuation` given
// `context`, accumulated in double precision.
double continuation_nll(const TransformerModel& model,
                        std::string_view context,
                        std::string_view continuation,
                        const AblationMask* mask = nullptr);
double continuation_nll(const AblatedModel& ablated, std::string_view context,
                        std::string_view continuation);

// Greedy decoding; returns only the newly generated text.
std::string generate(const TransformerModel& model, std::string_view prompt,
                     int max_new_tokens, const AblationMask* mask = nullptr);
std::string generate(const AblatedModel& ablated, std::string_view prompt,
                     int max_new_tokens);

}  // namespace unitloc
