#include "unitloc/model.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "unitloc/digest.hpp"

namespace unitloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct WeightReader {
  std::ifstream f;
  std::string path;

  explicit WeightReader(const std::string& p)
      : f(p, std::ios::binary), path(p) {
    if (!f) throw FileMissingError("cannot open weights file: " + p);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    if (!f) throw MalformedRecordError(path + ": truncated header");
    return v;
  }
  void tensor(float* dst, std::size_t count) {
    f.read(reinterpret_cast<char*>(dst),
           static_cast<std::streamsize>(count * sizeof(float)));
    if (!f) throw MalformedRecordError(path + ": truncated tensor data");
  }
  void matrix(MatrixXfRM& m, Eigen::Index rows, Eigen::Index cols) {
    m.resize(rows, cols);
    tensor(m.data(), static_cast<std::size_t>(rows * cols));
  }
  void vector(Eigen::VectorXf& v, Eigen::Index n) {
    v.resize(n);
    tensor(v.data(), static_cast<std::size_t>(n));
  }
};

void check_dim(const char* what, long got, long want) {
  if (got != want) {
    throw ModelMismatchError(std::string("weights header ") + what + "=" +
                             std::to_string(got) + " but model config says " +
                             std::to_string(want));
  }
}

void rowwise_layer_norm(const MatrixXfRM& x, const Eigen::VectorXf& w,
                        const Eigen::VectorXf& b, MatrixXfRM& out) {
  constexpr float eps = 1e-5f;
  out.resize(x.rows(), x.cols());
  const auto n = static_cast<float>(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const float mean = x.row(i).mean();
    const float var = (x.row(i).array() - mean).square().sum() / n;
    const float inv = 1.0f / std::sqrt(var + eps);
    out.row(i) = (((x.row(i).array() - mean) * inv) *
                  w.transpose().array()) + b.transpose().array();
  }
}

inline float gelu(float v) {
  return 0.5f * v * (1.0f + std::erf(v * 0.70710678118654752f));
}

}  // namespace

TransformerModel TransformerModel::from_weights(TransformerConfig config,
                                                Tokenizer tokenizer,
                                                TransformerWeights weights,
                                                std::string model_id) {
  if (tokenizer.vocab_size() != config.vocab_size) {
    throw ModelMismatchError("tokenizer vocab size " +
                             std::to_string(tokenizer.vocab_size()) +
                             " != config vocab size " +
                             std::to_string(config.vocab_size));
  }
  if (weights.tok_emb.rows() != config.vocab_size ||
      weights.tok_emb.cols() != config.hidden_dim ||
      weights.pos_emb.rows() != config.max_context ||
      static_cast<int>(weights.blocks.size()) != config.n_layers) {
    throw ModelMismatchError("weight tensor shapes do not match config");
  }
  if (config.hidden_dim % config.n_heads != 0) {
    throw ModelMismatchError("hidden_dim must be divisible by n_heads");
  }
  TransformerModel m;
  m.config_ = config;
  m.tokenizer_ = std::move(tokenizer);
  m.weights_ = std::move(weights);
  m.model_id_ = std::move(model_id);
  return m;
}

TransformerModel TransformerModel::load(const std::string& model_dir) {
  const fs::path dir(model_dir);
  std::ifstream jf(dir / "model.json");
  if (!jf) {
    throw FileMissingError("cannot open " + (dir / "model.json").string());
  }
  json doc;
  try {
    jf >> doc;
  } catch (const json::exception& e) {
    throw MalformedRecordError((dir / "model.json").string() + ": " +
                               e.what());
  }
  if (doc.value("format", "") != "unitloc-model/v1") {
    throw MalformedRecordError((dir / "model.json").string() +
                               ": not a unitloc-model/v1 file");
  }
  TransformerConfig cfg;
  cfg.n_layers = doc.at("n_layers").get<int>();
  cfg.n_heads = doc.at("n_heads").get<int>();
  cfg.hidden_dim = doc.at("hidden_dim").get<int>();
  cfg.mlp_dim = doc.at("mlp_dim").get<int>();
  cfg.max_context = doc.at("max_context").get<int>();

  Tokenizer tok = Tokenizer::load(
      (dir / doc.at("vocab_file").get<std::string>()).string(),
      doc.value("bos_token", "<bos>"));
  cfg.vocab_size = tok.vocab_size();

  WeightReader r((dir / doc.at("weights_file").get<std::string>()).string());
  char magic[4];
  r.f.read(magic, 4);
  if (!r.f || std::memcmp(magic, "ULM1", 4) != 0) {
    throw MalformedRecordError(r.path + ": bad magic (want ULM1)");
  }
  check_dim("version", r.u32(), 1);
  check_dim("vocab_size", r.u32(), cfg.vocab_size);
  check_dim("n_layers", r.u32(), cfg.n_layers);
  check_dim("n_heads", r.u32(), cfg.n_heads);
  check_dim("hidden_dim", r.u32(), cfg.hidden_dim);
  check_dim("mlp_dim", r.u32(), cfg.mlp_dim);
  check_dim("max_context", r.u32(), cfg.max_context);

  TransformerWeights w;
  const int H = cfg.hidden_dim, F = cfg.mlp_dim;
  r.matrix(w.tok_emb, cfg.vocab_size, H);
  r.matrix(w.pos_emb, cfg.max_context, H);
  w.blocks.resize(static_cast<std::size_t>(cfg.n_layers));
  for (auto& blk : w.blocks) {
    r.vector(blk.ln1_w, H);
    r.vector(blk.ln1_b, H);
    r.matrix(blk.wq, H, H);
    r.vector(blk.bq, H);
    r.matrix(blk.wk, H, H);
    r.vector(blk.bk, H);
    r.matrix(blk.wv, H, H);
    r.vector(blk.bv, H);
    r.matrix(blk.wo, H, H);
    r.vector(blk.bo, H);
    r.vector(blk.ln2_w, H);
    r.vector(blk.ln2_b, H);
    r.matrix(blk.w_fc, F, H);
    r.vector(blk.b_fc, F);
    r.matrix(blk.w_proj, H, F);
    r.vector(blk.b_proj, H);
  }
  r.vector(w.lnf_w, H);
  r.vector(w.lnf_b, H);

  return from_weights(cfg, std::move(tok), std::move(w),
                      doc.at("model_id").get<std::string>());
}

TransformerModel::Forward TransformerModel::forward(
    std::span<const int> tokens, const AblationMask* mask,
    bool collect_block_outputs) const {
  const auto T = static_cast<Eigen::Index>(tokens.size());
  if (T == 0) throw TokenizationEmptyError("forward on empty token list");
  if (T > config_.max_context) {
    throw ContextOverflowError(std::to_string(T) + " tokens exceed context " +
                               std::to_string(config_.max_context));
  }
  const int H = config_.hidden_dim;
  const int n_heads = config_.n_heads;
  const int hd = H / n_heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

  MatrixXfRM x(T, H);
  for (Eigen::Index i = 0; i < T; ++i) {
    const int id = tokens[static_cast<std::size_t>(i)];
    if (id < 0 || id >= config_.vocab_size) {
      throw ModelMismatchError("token id out of range: " + std::to_string(id));
    }
    x.row(i) = weights_.tok_emb.row(id) + weights_.pos_emb.row(i);
  }

  Forward out;
  MatrixXfRM y, q, k, v, attn_out, scores, z;
  for (int layer = 0; layer < config_.n_layers; ++layer) {
    const BlockWeights& blk =
        weights_.blocks[static_cast<std::size_t>(layer)];
    rowwise_layer_norm(x, blk.ln1_w, blk.ln1_b, y);
    q.noalias() = y * blk.wq.transpose();
    q.rowwise() += blk.bq.transpose();
    k.noalias() = y * blk.wk.transpose();
    k.rowwise() += blk.bk.transpose();
    v.noalias() = y * blk.wv.transpose();
    v.rowwise() += blk.bv.transpose();

    attn_out.resize(T, H);
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = q.middleCols(h * hd, hd);
      const auto kh = k.middleCols(h * hd, hd);
      const auto vh = v.middleCols(h * hd, hd);
      scores.noalias() = qh * kh.transpose();
      scores *= scale;
      // causal softmax row by row over the visible prefix
      for (Eigen::Index i = 0; i < T; ++i) {
        auto row = scores.row(i).head(i + 1);
        const float m = row.maxCoeff();
        row = (row.array() - m).exp();
        row /= row.sum();
        if (i + 1 < T) scores.row(i).tail(T - i - 1).setZero();
      }
      attn_out.middleCols(h * hd, hd).noalias() =
          scores.template triangularView<Eigen::Lower>() * vh;
    }
    x.noalias() += attn_out * blk.wo.transpose();
    x.rowwise() += blk.bo.transpose();

    rowwise_layer_norm(x, blk.ln2_w, blk.ln2_b, y);
    z.noalias() = y * blk.w_fc.transpose();
    z.rowwise() += blk.b_fc.transpose();
    z = z.unaryExpr([](float f) { return gelu(f); });
    x.noalias() += z * blk.w_proj.transpose();
    x.rowwise() += blk.b_proj.transpose();

    if (mask != nullptr) {
      for (const auto& u : mask->units) {
        if (u.layer == layer) x.col(u.dim).setZero();
      }
    }
    if (collect_block_outputs) out.block_outputs.push_back(x);
  }

  rowwise_layer_norm(x, weights_.lnf_w, weights_.lnf_b, y);
  out.logits.noalias() = y * weights_.tok_emb.transpose();
  return out;
}

AblatedModel apply_ablation(const TransformerModel& model, AblationMask mask) {
  if (mask.model_id != model.model_id() ||
      mask.geometry != model.geometry()) {
    throw ModelMismatchError(
        "mask built for '" + mask.model_id + "' (" +
        std::to_string(mask.geometry.n_layers) + "x" +
        std::to_string(mask.geometry.hidden_dim) + "), model is '" +
        model.model_id() + "'");
  }
  if (mask.mode != "zero") {
    throw ModelMismatchError("unsupported ablation mode: " + mask.mode);
  }
  return AblatedModel{&model, std::move(mask)};
}

namespace {

// Tokenize a stimulus: BOS + items tokens, truncated to max_tokens.
std::vector<int> stimulus_tokens(const TransformerModel& model,
                                 const std::string& text, int max_tokens,
                                 int* first_stim_pos) {
  const auto& tok = model.tokenizer();
  std::vector<int> ids = tok.encode(text, /*add_bos=*/true);
  const int bos = tok.has_bos() ? 1 : 0;
  if (static_cast<int>(ids.size()) <= bos) {
    throw TokenizationEmptyError("stimulus tokenizes to zero tokens: '" +
                                 text + "'");
  }
  if (max_tokens > 0 &&
      static_cast<int>(ids.size()) - bos > max_tokens) {
    ids.resize(static_cast<std::size_t>(bos + max_tokens));
  }
  if (static_cast<int>(ids.size()) > model.config().max_context) {
    throw ContextOverflowError("stimulus exceeds max context");
  }
  *first_stim_pos = bos;
  return ids;
}

}  // namespace

ActivationMatrix capture_pooled_activations(const TransformerModel& model,
                                            const StimulusSet& stimuli,
                                            Pooling pooling, int max_tokens,
                                            const AblationMask* mask) {
  stimuli.validate();
  const ModelGeometry g = model.geometry();
  ActivationMatrix acts;
  acts.geometry = g;
  acts.pooling = pooling;
  acts.model_id = model.model_id();
  acts.stimuli_sha256 = stimuli.items_sha256();
  acts.values.resize(static_cast<Eigen::Index>(stimuli.items.size()),
                     g.unit_count());
  const int H = g.hidden_dim;
  for (std::size_t i = 0; i < stimuli.items.size(); ++i) {
    int first = 0;
    const auto ids = stimulus_tokens(model, stimuli.items[i], max_tokens,
                                     &first);
    const auto fwd = model.forward(ids, mask, /*collect=*/true);
    const auto n_stim =
        static_cast<Eigen::Index>(ids.size()) - first;
    for (int layer = 0; layer < g.n_layers; ++layer) {
      const auto& block = fwd.block_outputs[static_cast<std::size_t>(layer)];
      const auto row = static_cast<Eigen::Index>(i);
      if (pooling == Pooling::last_token) {
        acts.values.block(row, layer * H, 1, H) =
            block.row(block.rows() - 1);
      } else {
        acts.values.block(row, layer * H, 1, H) =
            block.middleRows(first, n_stim).colwise().mean();
      }
    }
  }
  acts.validate();
  return acts;
}

double continuation_nll(const TransformerModel& model,
                        std::string_view context,
                        std::string_view continuation,
                        const AblationMask* mask) {
  const auto& tok = model.tokenizer();
  std::vector<int> ids = tok.encode(context, /*add_bos=*/true);
  const auto ctx_len = static_cast<Eigen::Index>(ids.size());
  if (ctx_len == 0) {
    throw Error("empty context requires a tokenizer with a BOS token");
  }
  const std::vector<int> cont = tok.encode(continuation, /*add_bos=*/false);
  if (cont.empty()) {
    throw EmptyContinuationError("continuation tokenizes to zero tokens");
  }
  ids.insert(ids.end(), cont.begin(), cont.end());
  if (static_cast<int>(ids.size()) > model.config().max_context) {
    throw ContextOverflowError(
        "context+continuation exceeds max context: " +
        std::to_string(ids.size()));
  }
  const auto fwd = model.forward(ids, mask, /*collect=*/false);
  double nll = 0.0;
  for (std::size_t j = 0; j < cont.size(); ++j) {
    const auto pos = ctx_len + static_cast<Eigen::Index>(j) - 1;
    const auto logits = fwd.logits.row(pos);
    const double m = static_cast<double>(logits.maxCoeff());
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.size(); ++c) {
      sum += std::exp(static_cast<double>(logits[c]) - m);
    }
    const double lse = m + std::log(sum);
    nll += lse - static_cast<double>(logits[cont[j]]);
  }
  return nll;
}

double continuation_nll(const AblatedModel& ablated, std::string_view context,
                        std::string_view continuation) {
  return continuation_nll(*ablated.model, context, continuation,
                          &ablated.mask);
}

std::string generate(const TransformerModel& model, std::string_view prompt,
                     int max_new_tokens, const AblationMask* mask) {
  if (max_new_tokens < 1) throw Error("max_new_tokens must be >= 1");
  std::vector<int> ids = model.tokenizer().encode(prompt, /*add_bos=*/true);
  if (ids.empty()) throw TokenizationEmptyError("empty prompt");
  const std::size_t prompt_len = ids.size();
  for (int step = 0; step < max_new_tokens; ++step) {
    if (static_cast<int>(ids.size()) >= model.config().max_context) {
      throw ContextOverflowError("generation exceeded max context");
    }
    const auto fwd = model.forward(ids, mask, /*collect=*/false);
    const auto logits = fwd.logits.row(fwd.logits.rows() - 1);
    // first maximal index, so ties break deterministically
    int best = 0;
    float best_v = logits[0];
    for (Eigen::Index c = 1; c < logits.size(); ++c) {
      if (logits[c] > best_v) {
        best_v = logits[c];
        best = static_cast<int>(c);
      }
    }
    ids.push_back(best);
  }
  return model.tokenizer().decode(
      std::span<const int>(ids).subspan(prompt_len));
}

std::string generate(const AblatedModel& ablated, std::string_view prompt,
                     int max_new_tokens) {
  return generate(*ablated.model, prompt, max_new_tokens, &ablated.mask);
}

}  // namespace unitloc
