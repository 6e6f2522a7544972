#include "unitloc/stimuli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "unitloc/digest.hpp"
#include "unitloc/rng.hpp"

namespace unitloc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string StimulusSet::items_sha256() const {
  return sha256_items_hex(items);
}

void StimulusSet::validate() const {
  if (items.empty()) {
    throw CountMismatchError("stimulus set '" + condition_label +
                             "' is empty");
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].empty()) {
      throw EmptyItemError("empty item at line " + std::to_string(i + 1) +
                           " in '" + condition_label + "'");
    }
  }
}

const char* to_string(Network n) {
  switch (n) {
    case Network::language: return "language";
    case Network::md: return "md";
    case Network::tom: return "tom";
  }
  return "language";
}

Network network_from_string(const std::string& s) {
  if (s == "language") return Network::language;
  if (s == "md") return Network::md;
  if (s == "tom") return Network::tom;
  throw ConfigError("unknown network: " + s);
}

LocalizerSpec LocalizerSpec::make(Network network, StimulusSet a,
                                  StimulusSet b) {
  LocalizerSpec spec;
  spec.network = network;
  spec.condition_a = std::move(a);
  spec.condition_b = std::move(b);
  if (network == Network::language) {
    spec.pooling = Pooling::last_token;
    spec.max_tokens = 12;
  } else {
    spec.pooling = Pooling::mean_tokens;
    spec.max_tokens = -1;
  }
  return spec;
}

StimulusSet load_line_stimuli(const std::string& path,
                              const std::string& label) {
  std::ifstream f(path);
  if (!f) throw FileMissingError("cannot open stimulus file: " + path);
  StimulusSet set;
  set.condition_label = label;
  set.source = path;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    set.items.push_back(line);
  }
  // allow one trailing blank line
  if (!set.items.empty() && set.items.back().empty()) set.items.pop_back();
  set.validate();
  return set;
}

std::pair<StimulusSet, StimulusSet> load_language_localizer(
    const std::string& sentences_path, const std::string& nonwords_path,
    bool allow_any_count) {
  auto sentences = load_line_stimuli(sentences_path, "sentences");
  auto nonwords = load_line_stimuli(nonwords_path, "nonwords");
  if (sentences.items.size() != nonwords.items.size()) {
    throw CountMismatchError(
        "condition sizes differ: " + std::to_string(sentences.items.size()) +
        " sentences vs " + std::to_string(nonwords.items.size()) +
        " nonwords");
  }
  if (!allow_any_count && sentences.items.size() != 240) {
    throw CountMismatchError("language localizer expects 240 items, got " +
                             std::to_string(sentences.items.size()));
  }
  return {std::move(sentences), std::move(nonwords)};
}

namespace {

std::string render_md(const std::string& tmpl, int a, char op, int b) {
  std::string out = tmpl;
  const auto sub = [&out](const std::string& key, const std::string& val) {
    const auto pos = out.find(key);
    if (pos == std::string::npos) {
      throw InvalidTemplateError("template is missing placeholder " + key);
    }
    out.replace(pos, key.size(), val);
  };
  sub("{a}", std::to_string(a));
  sub("{op}", std::string(1, op));
  sub("{b}", std::to_string(b));
  return out;
}

}  // namespace

std::pair<StimulusSet, StimulusSet> generate_md_localizer(
    const MdGenParams& params) {
  if (params.n_per_condition <= 0) {
    throw CountMismatchError("n_per_condition must be positive");
  }
  // fail fast on a bad template
  render_md(params.tmpl, 0, '+', 0);

  Rng rng(params.seed);
  StimulusSet hard, easy;
  hard.condition_label = "md_hard";
  easy.condition_label = "md_easy";
  std::ostringstream src;
  src << "generator md seed=" << params.seed
      << " n=" << params.n_per_condition << " template=" << params.tmpl;
  hard.source = easy.source = src.str();
  for (int i = 0; i < params.n_per_condition; ++i) {
    const int a = static_cast<int>(rng.uniform_int(100, 200));
    const int b = static_cast<int>(rng.uniform_int(100, 200));
    const char op = rng.below(2) == 0 ? '+' : '-';
    hard.items.push_back(render_md(params.tmpl, a, op, b));
  }
  for (int i = 0; i < params.n_per_condition; ++i) {
    const int a = static_cast<int>(rng.uniform_int(1, 20));
    const int b = static_cast<int>(rng.uniform_int(1, 20));
    const char op = rng.below(2) == 0 ? '+' : '-';
    easy.items.push_back(render_md(params.tmpl, a, op, b));
  }
  hard.validate();
  easy.validate();
  return {std::move(hard), std::move(easy)};
}

const char* const kTomInstruction =
    "The following multiple choice questions is based on the following "
    "story. The question is related to Theory-of-Mind. Read the story and "
    "then answer the questions. Choose the best answer from the options "
    "provided by printing it as is without any modifications.";

namespace {

StimulusSet load_tom_file(const std::string& path, const std::string& label,
                          const std::string& instruction) {
  std::ifstream f(path);
  if (!f) throw FileMissingError("cannot open ToM story file: " + path);
  StimulusSet set;
  set.condition_label = label;
  set.source = path;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecordError(path + ":" + std::to_string(lineno) + ": " +
                                 e.what());
    }
    for (const char* key : {"story", "question", "choices", "answer"}) {
      if (!rec.contains(key)) {
        throw MalformedRecordError(path + ":" + std::to_string(lineno) +
                                   ": missing field '" + key + "'");
      }
    }
    const auto& choices = rec["choices"];
    if (!choices.is_array() || choices.size() != 2) {
      throw MalformedRecordError(path + ":" + std::to_string(lineno) +
                                 ": 'choices' must be a 2-element array");
    }
    // documented order: instruction, story, question, choices, answer
    std::ostringstream prompt;
    prompt << instruction << "\n"
           << "Story: " << rec["story"].get<std::string>() << "\n"
           << "Question: " << rec["question"].get<std::string>() << "\n"
           << "Options: " << choices[0].get<std::string>() << " or "
           << choices[1].get<std::string>() << "\n"
           << "Answer: " << rec["answer"].get<std::string>();
    set.items.push_back(prompt.str());
  }
  if (set.items.size() != 10) {
    throw CountMismatchError(path + ": expected 10 story records, got " +
                             std::to_string(set.items.size()));
  }
  return set;
}

}  // namespace

std::pair<StimulusSet, StimulusSet> load_tom_localizer(
    const std::string& false_belief_path, const std::string& false_photo_path,
    const std::string& instruction) {
  auto fb = load_tom_file(false_belief_path, "tom_false_belief", instruction);
  auto fp = load_tom_file(false_photo_path, "tom_false_photo", instruction);
  return {std::move(fb), std::move(fp)};
}

std::map<std::string, StimulusSet> load_profile_conditions(
    const std::string& dir_path) {
  static const std::set<std::string> known = {
      "S", "W", "J", "N", "arithmetic", "code", "random_chars"};
  if (!fs::is_directory(dir_path)) {
    throw FileMissingError("not a directory: " + dir_path);
  }
  std::map<std::string, StimulusSet> conditions;
  for (const auto& entry : fs::directory_iterator(dir_path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") {
      continue;
    }
    const std::string label = entry.path().stem().string();
    if (!known.count(label)) {
      throw UnknownLabelError("unknown profile condition: " + label);
    }
    conditions[label] = load_line_stimuli(entry.path().string(), label);
  }
  if (conditions.empty()) {
    throw FileMissingError("no condition files in " + dir_path);
  }
  const std::size_t n = conditions.begin()->second.items.size();
  for (const auto& [label, set] : conditions) {
    if (set.items.size() != n) {
      throw CountMismatchError("condition '" + label + "' has " +
                               std::to_string(set.items.size()) +
                               " items, expected " + std::to_string(n));
    }
  }
  return conditions;
}

void ensure_disjoint(const StimulusSet& a, const StimulusSet& b) {
  std::set<std::string> hashes;
  for (const auto& item : a.items) hashes.insert(sha256_hex(item));
  for (const auto& item : b.items) {
    if (hashes.count(sha256_hex(item))) {
      throw CountMismatchError("stimulus overlap between '" +
                               a.condition_label + "' and '" +
                               b.condition_label + "': " + item);
    }
  }
}

}  // namespace unitloc
