#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unitloc/activation.hpp"
#include "unitloc/errors.hpp"

namespace unitloc {

// One condition of a localizer contrast or profile analysis: an ordered,
// labeled list of text items plus a provenance record.
struct StimulusSet {
  std::string condition_label;
  std::vector<std::string> items;
  std::string source;  // file path or "generator seed=.. n=.."

  std::string items_sha256() const;
  void validate() const;  // non-empty set, non-empty items
};

enum class Network { language, md, tom };

const char* to_string(Network n);
Network network_from_string(const std::string& s);

struct LocalizerSpec {
  Network network = Network::language;
  StimulusSet condition_a;  // target
  StimulusSet condition_b;  // control
  Pooling pooling = Pooling::last_token;
  int max_tokens = 12;  // -1 = unlimited

  // language => last_token/12; md,tom => mean_tokens.
  static LocalizerSpec make(Network network, StimulusSet a, StimulusSet b);
};

// Two line-per-item files; both must hold exactly 240 items unless
// `allow_any_count` is set, and the two counts must match either way.
std::pair<StimulusSet, StimulusSet> load_language_localizer(
    const std::string& sentences_path, const std::string& nonwords_path,
    bool allow_any_count = false);

struct MdGenParams {
  std::uint64_t seed = 0;
  int n_per_condition = 100;
  std::string tmpl = "What is {a} {op} {b}?";
};

// Hard condition: operands uniform on [100,200]; easy: [1,20]; the
// operator is + or - with equal probability. Deterministic per seed.
std::pair<StimulusSet, StimulusSet> generate_md_localizer(
    const MdGenParams& params);

// Default instruction used when rendering ToM story records into prompts.
extern const char* const kTomInstruction;

// Structured story records, 10 per file; each rendered as
// instruction/story/question/choices/answer.
std::pair<StimulusSet, StimulusSet> load_tom_localizer(
    const std::string& false_belief_path, const std::string& false_photo_path,
    const std::string& instruction = kTomInstruction);

// Directory of <label>.txt condition files with equal item counts; labels
// must come from the documented set.
std::map<std::string, StimulusSet> load_profile_conditions(
    const std::string& dir_path);

// Plain one-item-per-line loader.
StimulusSet load_line_stimuli(const std::string& path,
                              const std::string& label);

// Item-level hash comparison; throws if any item occurs in both sets.
void ensure_disjoint(const StimulusSet& a, const StimulusSet& b);

}  // namespace unitloc
