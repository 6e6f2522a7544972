#include <fstream>

#include <json.hpp>

#include "unitloc/model.hpp"

namespace unitloc {

using nlohmann::json;

Tokenizer Tokenizer::load(const std::string& vocab_path,
                          const std::string& bos_token) {
  std::ifstream f(vocab_path);
  if (!f) throw FileMissingError("cannot open vocab file: " + vocab_path);
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    throw MalformedRecordError(vocab_path + ": " + e.what());
  }
  if (doc.value("format", "") != "unitloc-vocab/v1" ||
      !doc.contains("tokens")) {
    throw MalformedRecordError(vocab_path + ": not a unitloc-vocab/v1 file");
  }
  return from_tokens(doc["tokens"].get<std::vector<std::string>>(),
                     bos_token);
}

Tokenizer Tokenizer::from_tokens(std::vector<std::string> tokens,
                                 const std::string& bos_token) {
  Tokenizer t;
  t.tokens_ = std::move(tokens);
  t.index_.reserve(t.tokens_.size());
  for (std::size_t i = 0; i < t.tokens_.size(); ++i) {
    t.index_.emplace(t.tokens_[i], static_cast<int>(i));
  }
  const auto find = [&t](const std::string& s) {
    const auto it = t.index_.find(s);
    return it == t.index_.end() ? -1 : it->second;
  };
  t.bos_id_ = bos_token.empty() ? -1 : find(bos_token);
  t.sp_id_ = find("<sp>");
  t.byte0_id_ = find("<0x00>");
  if (t.byte0_id_ >= 0) {
    // the 256 byte tokens must be contiguous
    if (t.byte0_id_ + 255 >= static_cast<int>(t.tokens_.size()) ||
        t.tokens_[t.byte0_id_ + 255] != "<0xFF>") {
      throw MalformedRecordError("byte tokens are not contiguous in vocab");
    }
  }
  return t;
}

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '\'';
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

char to_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
}

}  // namespace

std::vector<int> Tokenizer::encode(std::string_view text,
                                   bool add_bos) const {
  std::vector<int> ids;
  if (add_bos && bos_id_ >= 0) ids.push_back(bos_id_);
  bool prev_fallback = false;
  bool after_space = true;
  std::size_t i = 0;
  std::string pre;
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      after_space = true;
      ++i;
      continue;
    }
    pre.clear();
    if (is_word_char(c)) {
      while (i < text.size() && is_word_char(text[i])) {
        pre.push_back(to_lower(text[i]));
        ++i;
      }
    } else {
      pre.push_back(c);
      ++i;
    }
    const auto it = index_.find(pre);
    if (it != index_.end()) {
      ids.push_back(it->second);
      prev_fallback = false;
    } else {
      if (byte0_id_ < 0) {
        throw TokenizationEmptyError(
            "out-of-vocabulary text and tokenizer has no byte fallback: '" +
            pre + "'");
      }
      if (after_space && prev_fallback && sp_id_ >= 0) {
        ids.push_back(sp_id_);
      }
      for (const char b : pre) {
        ids.push_back(byte0_id_ + static_cast<unsigned char>(b));
      }
      prev_fallback = true;
    }
    after_space = false;
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const int> ids) const {
  std::string out;
  const auto is_byte = [this](int id) {
    return byte0_id_ >= 0 && id >= byte0_id_ && id < byte0_id_ + 256;
  };
  bool prev_byte = false;
  for (const int id : ids) {
    if (id == bos_id_) continue;
    if (id == sp_id_) {
      out.push_back(' ');
      prev_byte = false;
      continue;
    }
    if (is_byte(id)) {
      out.push_back(static_cast<char>(id - byte0_id_));
      prev_byte = true;
      continue;
    }
    // Word and punctuation tokens are space-separated (the corpus style);
    // byte runs stay glued to whatever preceded them.
    if (!out.empty() && !prev_byte) out.push_back(' ');
    out += tokens_[id];
    prev_byte = false;
  }
  return out;
}

}  // namespace unitloc
