#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unitloc/localization.hpp"
#include "unitloc/model.hpp"

namespace unitloc {

// One surprisal-scored multiple-choice item. `context` may embed few-shot
// examples and instructions; candidates are scored as continuations.
struct TaskItem {
  std::string context;
  std::vector<std::string> candidates;
  int correct_index = 0;
  std::map<std::string, std::string> tags;

  void validate() const;
};

std::vector<TaskItem> load_benchmark_jsonl(const std::string& path);

struct EvalOptions {
  bool length_normalize = false;  // divide candidate NLL by token count
  std::string subtask_key = "subtask";
};

// Index of the candidate with minimal NLL; ties break to the lowest index.
int score_item(const TransformerModel& model, const TaskItem& item,
               const AblationMask* mask = nullptr,
               const EvalOptions& opts = {});

struct EvalResult {
  struct Subtask {
    double accuracy = 0.0;  // percent
    int n_items = 0;
  };
  struct ItemOutcome {
    bool correct = false;
    std::map<std::string, std::string> tags;
  };
  std::string condition;  // baseline | ablated_selected | ablated_random(seed)
  std::map<std::string, Subtask> by_subtask;
  double overall = 0.0;  // unweighted mean of subtask accuracies
  std::vector<ItemOutcome> items;
};

EvalResult evaluate(const TransformerModel& model,
                    const std::vector<TaskItem>& benchmark,
                    const AblationMask* mask = nullptr,
                    const std::string& condition = "baseline",
                    const EvalOptions& opts = {});

// Accuracy recomputed within each bucket of the given tag.
std::map<std::string, double> group_results(const EvalResult& result,
                                            const std::string& tag_key);
std::map<std::string, int> group_counts(const EvalResult& result,
                                        const std::string& tag_key);

// Deterministic prompt layout (versioned; see kFewShotLayoutVersion):
// instruction, blank line, k worked examples ("input\nanswer"), query.
extern const char* const kFewShotLayoutVersion;
std::string build_few_shot_context(
    const std::string& instruction,
    const std::vector<std::pair<std::string, std::string>>& examples,
    const std::string& query, int k);

double cohens_d(const std::vector<double>& group_a,
                const std::vector<double>& group_b);

struct LesionCondition {
  double percent = 0.0;
  std::string kind;  // selected | random
  std::optional<std::uint64_t> seed;
  std::map<std::string, EvalResult> by_benchmark;
};

struct LesionReport {
  std::string model_id;
  std::vector<double> percents;
  int n_random_seeds = 3;
  std::map<std::string, EvalResult> baseline;  // by benchmark
  std::vector<LesionCondition> conditions;

  double baseline_overall(const std::string& benchmark) const;
  // ablated minus baseline, overall accuracy
  double delta(const LesionCondition& c, const std::string& benchmark) const;
};

// Baseline once, then per percent: selected-unit ablation plus
// n_random_seeds random controls drawn from the complement.
LesionReport run_lesion_study(
    const TransformerModel& model, const SelectivityRanking& ranking,
    const std::map<std::string, std::vector<TaskItem>>& benchmarks,
    const std::vector<double>& percents = {0.125, 0.25, 0.5, 1.0},
    int n_random_seeds = 3, std::uint64_t base_seed = 0,
    const EvalOptions& opts = {});

}  // namespace unitloc
