#include "unitloc/lesion.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace unitloc {

using nlohmann::json;

void TaskItem::validate() const {
  if (candidates.size() < 2) {
    throw MalformedRecordError("task item needs >= 2 candidates");
  }
  if (correct_index < 0 ||
      correct_index >= static_cast<int>(candidates.size())) {
    throw MalformedRecordError("correct_index out of range");
  }
  std::set<std::string> uniq(candidates.begin(), candidates.end());
  if (uniq.size() != candidates.size()) {
    throw MalformedRecordError("candidates must be pairwise distinct");
  }
}

std::vector<TaskItem> load_benchmark_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileMissingError("cannot open benchmark file: " + path);
  std::vector<TaskItem> items;
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
    TaskItem item;
    try {
      item.context = rec.at("context").get<std::string>();
      item.candidates = rec.at("candidates").get<std::vector<std::string>>();
      item.correct_index = rec.at("correct_index").get<int>();
      if (rec.contains("tags")) {
        for (const auto& [k, v] : rec["tags"].items()) {
          item.tags[k] = v.get<std::string>();
        }
      }
    } catch (const json::exception& e) {
      throw MalformedRecordError(path + ":" + std::to_string(lineno) + ": " +
                                 e.what());
    }
    item.validate();
    items.push_back(std::move(item));
  }
  return items;
}

int score_item(const TransformerModel& model, const TaskItem& item,
               const AblationMask* mask, const EvalOptions& opts) {
  item.validate();
  int best = 0;
  double best_nll = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < item.candidates.size(); ++c) {
    double nll = continuation_nll(model, item.context, item.candidates[c],
                                  mask);
    if (opts.length_normalize) {
      const auto n = model.tokenizer()
                         .encode(item.candidates[c], /*add_bos=*/false)
                         .size();
      nll /= static_cast<double>(n);
    }
    if (nll < best_nll) {
      best_nll = nll;
      best = static_cast<int>(c);
    }
  }
  return best;
}

EvalResult evaluate(const TransformerModel& model,
                    const std::vector<TaskItem>& benchmark,
                    const AblationMask* mask, const std::string& condition,
                    const EvalOptions& opts) {
  if (benchmark.empty()) {
    throw EmptyBenchmarkError("benchmark has no items");
  }
  EvalResult result;
  result.condition = condition;
  std::map<std::string, std::pair<int, int>> counts;  // subtask -> (hit, n)
  for (const auto& item : benchmark) {
    const int predicted = score_item(model, item, mask, opts);
    const bool correct = predicted == item.correct_index;
    const auto it = item.tags.find(opts.subtask_key);
    const std::string subtask =
        it == item.tags.end() ? std::string("default") : it->second;
    auto& [hit, n] = counts[subtask];
    hit += correct ? 1 : 0;
    n += 1;
    result.items.push_back(EvalResult::ItemOutcome{correct, item.tags});
  }
  double sum = 0.0;
  for (const auto& [subtask, hn] : counts) {
    const double acc = 100.0 * hn.first / hn.second;
    result.by_subtask[subtask] = EvalResult::Subtask{acc, hn.second};
    sum += acc;
  }
  result.overall = sum / static_cast<double>(counts.size());
  return result;
}

std::map<std::string, double> group_results(const EvalResult& result,
                                            const std::string& tag_key) {
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& item : result.items) {
    const auto it = item.tags.find(tag_key);
    if (it == item.tags.end()) continue;
    auto& [hit, n] = counts[it->second];
    hit += item.correct ? 1 : 0;
    n += 1;
  }
  if (counts.empty()) {
    throw UnknownTagError("no item carries tag '" + tag_key + "'");
  }
  std::map<std::string, double> out;
  for (const auto& [value, hn] : counts) {
    out[value] = 100.0 * hn.first / hn.second;
  }
  return out;
}

std::map<std::string, int> group_counts(const EvalResult& result,
                                        const std::string& tag_key) {
  std::map<std::string, int> out;
  for (const auto& item : result.items) {
    const auto it = item.tags.find(tag_key);
    if (it != item.tags.end()) out[it->second] += 1;
  }
  if (out.empty()) {
    throw UnknownTagError("no item carries tag '" + tag_key + "'");
  }
  return out;
}

const char* const kFewShotLayoutVersion = "fewshot/v1";

std::string build_few_shot_context(
    const std::string& instruction,
    const std::vector<std::pair<std::string, std::string>>& examples,
    const std::string& query, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > examples.size()) {
    throw NotEnoughExamplesError("requested " + std::to_string(k) +
                                 " examples, have " +
                                 std::to_string(examples.size()));
  }
  std::ostringstream out;
  if (!instruction.empty()) out << instruction << "\n\n";
  for (int i = 0; i < k; ++i) {
    out << examples[static_cast<std::size_t>(i)].first << "\n"
        << examples[static_cast<std::size_t>(i)].second << "\n\n";
  }
  out << query;
  return out.str();
}

double cohens_d(const std::vector<double>& group_a,
                const std::vector<double>& group_b) {
  const auto na = group_a.size(), nb = group_b.size();
  if (na < 1 || nb < 1 || na + nb < 3) {
    throw TooFewSamplesError("cohens_d needs n_a + n_b - 2 > 0");
  }
  double ma = 0, mb = 0;
  for (double v : group_a) ma += v;
  for (double v : group_b) mb += v;
  ma /= double(na);
  mb /= double(nb);
  double sa = 0, sb = 0;
  for (double v : group_a) sa += (v - ma) * (v - ma);
  for (double v : group_b) sb += (v - mb) * (v - mb);
  const double pooled = (sa + sb) / double(na + nb - 2);
  if (pooled == 0.0) {
    throw ZeroPooledVarianceError("both groups are constant");
  }
  return (ma - mb) / std::sqrt(pooled);
}

double LesionReport::baseline_overall(const std::string& benchmark) const {
  return baseline.at(benchmark).overall;
}

double LesionReport::delta(const LesionCondition& c,
                           const std::string& benchmark) const {
  return c.by_benchmark.at(benchmark).overall - baseline_overall(benchmark);
}

LesionReport run_lesion_study(
    const TransformerModel& model, const SelectivityRanking& ranking,
    const std::map<std::string, std::vector<TaskItem>>& benchmarks,
    const std::vector<double>& percents, int n_random_seeds,
    std::uint64_t base_seed, const EvalOptions& opts) {
  LesionReport report;
  report.model_id = model.model_id();
  report.percents = percents;
  report.n_random_seeds = n_random_seeds;

  for (const auto& [name, items] : benchmarks) {
    report.baseline[name] = evaluate(model, items, nullptr, "baseline", opts);
  }

  for (const double percent : percents) {
    UnitSet selected = select_top_percent(ranking, percent);
    LesionCondition cond;
    cond.percent = percent;
    cond.kind = "selected";
    if (selected.empty()) {
      // floor(percent) == 0 units: every condition equals baseline
      cond.by_benchmark = report.baseline;
      for (auto& [_, r] : cond.by_benchmark) r.condition = "ablated_selected";
      report.conditions.push_back(cond);
    } else {
      AblationMask mask{model.model_id(), model.geometry(), selected, "zero",
                        MaskProvenance{"selected", percent, std::nullopt}};
      const auto ablated = apply_ablation(model, mask);
      for (const auto& [name, items] : benchmarks) {
        cond.by_benchmark[name] =
            evaluate(model, items, &ablated.mask, "ablated_selected", opts);
      }
      report.conditions.push_back(std::move(cond));
    }

    for (int s = 0; s < n_random_seeds; ++s) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
      LesionCondition rnd;
      rnd.percent = percent;
      rnd.kind = "random";
      rnd.seed = seed;
      if (selected.empty()) {
        rnd.by_benchmark = report.baseline;
        for (auto& [_, r] : rnd.by_benchmark) {
          r.condition = "ablated_random(" + std::to_string(seed) + ")";
        }
      } else {
        UnitSet control =
            sample_random_control(selected, model.geometry(), seed);
        AblationMask mask{model.model_id(), model.geometry(),
                          std::move(control), "zero",
                          MaskProvenance{"random", percent, seed}};
        const auto ablated = apply_ablation(model, mask);
        for (const auto& [name, items] : benchmarks) {
          rnd.by_benchmark[name] = evaluate(
              model, items, &ablated.mask,
              "ablated_random(" + std::to_string(seed) + ")", opts);
        }
      }
      report.conditions.push_back(std::move(rnd));
    }
  }
  return report;
}

}  // namespace unitloc
