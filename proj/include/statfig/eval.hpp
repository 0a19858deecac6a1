#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "statfig/jsonio.hpp"
#include "statfig/metadata.hpp"
#include "statfig/textutil.hpp"

namespace statfig::eval {

/// Recall-form ROUGE-L: LCS length over reference token count. An empty
/// reference scores 1.0 against an empty candidate and 0.0 otherwise.
inline double rouge_l(const std::string& candidate, const std::string& reference) {
  std::vector<std::string> cand = tokenize(candidate);
  std::vector<std::string> ref = tokenize(reference);
  if (ref.empty()) return cand.empty() ? 1.0 : 0.0;
  return static_cast<double>(lcs_length(cand, ref)) / static_cast<double>(ref.size());
}

/// Standard F1 form, available behind a flag for external comparison.
inline double rouge_l_fmeasure(const std::string& candidate, const std::string& reference) {
  std::vector<std::string> cand = tokenize(candidate);
  std::vector<std::string> ref = tokenize(reference);
  if (ref.empty() && cand.empty()) return 1.0;
  if (ref.empty() || cand.empty()) return 0.0;
  double lcs = static_cast<double>(lcs_length(cand, ref));
  if (lcs == 0) return 0.0;
  double p = lcs / static_cast<double>(cand.size());
  double r = lcs / static_cast<double>(ref.size());
  return 2 * p * r / (p + r);
}

struct EvalPair {
  std::string id;
  MetadataDoc gold;
  MetadataDoc pred;
  bool pred_parse_failed = false;  // unparseable prediction scored as zero subcharts
};

/// Maximum ROUGE-L over every (generated summary, gold summary) pair.
inline double subchart_summary_rouge(const MetadataDoc& pred, const MetadataDoc& gold) {
  if (pred.subcharts.empty() || gold.subcharts.empty()) return 0.0;
  double best = 0.0;
  for (const auto& ps : pred.subcharts) {
    for (const auto& gs : gold.subcharts) {
      best = std::max(best, rouge_l(ps.summary, gs.summary));
    }
  }
  return best;
}

/// Non-default variant: per gold subchart take the best-matching generated
/// summary, then average.
inline double subchart_summary_rouge_averaged(const MetadataDoc& pred,
                                              const MetadataDoc& gold) {
  if (pred.subcharts.empty() || gold.subcharts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& gs : gold.subcharts) {
    double best = 0.0;
    for (const auto& ps : pred.subcharts) {
      best = std::max(best, rouge_l(ps.summary, gs.summary));
    }
    total += best;
  }
  return total / static_cast<double>(gold.subcharts.size());
}

/// Per-pair subchart correctness: predicted subcharts are matched to gold in
/// index order; a match counts when kind and alignment both agree.
inline double pair_subchart_accuracy(const MetadataDoc& pred, const MetadataDoc& gold) {
  if (gold.subcharts.empty()) return pred.subcharts.empty() ? 1.0 : 0.0;
  size_t limit = std::min(pred.subcharts.size(), gold.subcharts.size());
  size_t correct = 0;
  for (size_t i = 0; i < limit; ++i) {
    if (pred.subcharts[i].kind == gold.subcharts[i].kind &&
        pred.subcharts[i].alignment == gold.subcharts[i].alignment) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(gold.subcharts.size());
}

/// Multiset intersection of predicted and gold chart kinds over gold count.
inline double pair_type_accuracy(const MetadataDoc& pred, const MetadataDoc& gold) {
  if (gold.subcharts.empty()) return pred.subcharts.empty() ? 1.0 : 0.0;
  std::vector<ChartKind> g;
  for (const auto& sc : gold.subcharts) g.push_back(sc.kind);
  size_t correct = 0;
  for (const auto& sc : pred.subcharts) {
    auto it = std::find(g.begin(), g.end(), sc.kind);
    if (it != g.end()) {
      g.erase(it);
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(gold.subcharts.size());
}

/// Sorted positional comparison of the numeric values, over gold count.
inline double pair_statistical_accuracy(const MetadataDoc& pred, const MetadataDoc& gold,
                                        double tol = 1e-9) {
  std::vector<double> p = extract_numbers(pred);
  std::vector<double> g = extract_numbers(gold);
  if (g.empty()) return 1.0;
  size_t limit = std::min(p.size(), g.size());
  size_t correct = 0;
  for (size_t i = 0; i < limit; ++i) {
    if (std::abs(p[i] - g[i]) <= tol) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(g.size());
}

struct PairBreakdown {
  std::string id;
  double subchart_accuracy = 0;
  double type_accuracy = 0;
  double statistical_accuracy = 0;
  double title_rouge_l = 0;
  double summary_rouge_l = 0;
  double subchart_summary_rouge_l = 0;
  int pred_subcharts = 0;
  int gold_subcharts = 0;
  bool flagged = false;  // unparseable or empty prediction
};

struct MetricsReport {
  double subchart_accuracy = 0;  // percent
  double rse = 0;
  double title_rouge_l = 0;
  double summary_rouge_l = 0;
  double subchart_summary_rouge_l = 0;
  double subchart_type_accuracy = 0;   // percent
  double statistical_accuracy = 0;     // percent
  size_t n_pairs = 0;
  std::vector<PairBreakdown> per_pair;

  // secondary metrics, emitted alongside the headline set
  double count_exact_match = 0;            // percent of pairs with exact count
  double micro_subchart_accuracy = 0;      // pooled counts
  double micro_type_accuracy = 0;
  double micro_statistical_accuracy = 0;
  double subchart_summary_rouge_l_avg = 0; // averaged best-match variant
};

struct EvalOptions {
  bool use_fmeasure = false;  // swap in the F1 ROUGE variant
};

/// Root square error over predicted vs gold subchart counts (one aggregate
/// across the corpus, not a per-pair mean).
inline double rse(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& pair : pairs) {
    double diff = static_cast<double>(pair.pred.subcharts.size()) -
                  static_cast<double>(pair.gold.subcharts.size());
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

inline double subchart_count_accuracy(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pair : pairs) total += pair_subchart_accuracy(pair.pred, pair.gold);
  return total / static_cast<double>(pairs.size()) * 100.0;
}

inline double subchart_type_accuracy(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pair : pairs) total += pair_type_accuracy(pair.pred, pair.gold);
  return total / static_cast<double>(pairs.size()) * 100.0;
}

inline double statistical_accuracy(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pair : pairs) total += pair_statistical_accuracy(pair.pred, pair.gold);
  return total / static_cast<double>(pairs.size()) * 100.0;
}

/// Full metric suite over a corpus of pairs. Macro aggregation (per-pair
/// means) is the headline; pooled micro variants ride along.
inline MetricsReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                                     const EvalOptions& options = {}) {
  MetricsReport report;
  report.n_pairs = pairs.size();
  if (pairs.empty()) return report;

  auto rl = [&](const std::string& cand, const std::string& ref) {
    return options.use_fmeasure ? rouge_l_fmeasure(cand, ref) : rouge_l(cand, ref);
  };

  double sum_count = 0, sum_type = 0, sum_stat = 0;
  double sum_title = 0, sum_summary = 0, sum_sub_summary = 0, sum_sub_summary_avg = 0;
  size_t exact_counts = 0;
  // micro accumulators
  double mi_count_num = 0, mi_type_num = 0, mi_stat_num = 0;
  double mi_gold_subcharts = 0, mi_gold_stats = 0;

  for (const auto& pair : pairs) {
    PairBreakdown row;
    row.id = pair.id;
    row.pred_subcharts = static_cast<int>(pair.pred.subcharts.size());
    row.gold_subcharts = static_cast<int>(pair.gold.subcharts.size());
    row.flagged = pair.pred_parse_failed || pair.pred.subcharts.empty();
    row.subchart_accuracy = pair_subchart_accuracy(pair.pred, pair.gold);
    row.type_accuracy = pair_type_accuracy(pair.pred, pair.gold);
    row.statistical_accuracy = pair_statistical_accuracy(pair.pred, pair.gold);
    row.title_rouge_l = rl(pair.pred.title, pair.gold.title);
    row.summary_rouge_l = rl(pair.pred.summary, pair.gold.summary);
    row.subchart_summary_rouge_l = subchart_summary_rouge(pair.pred, pair.gold);

    sum_count += row.subchart_accuracy;
    sum_type += row.type_accuracy;
    sum_stat += row.statistical_accuracy;
    sum_title += row.title_rouge_l;
    sum_summary += row.summary_rouge_l;
    sum_sub_summary += row.subchart_summary_rouge_l;
    sum_sub_summary_avg += subchart_summary_rouge_averaged(pair.pred, pair.gold);
    if (pair.pred.subcharts.size() == pair.gold.subcharts.size()) ++exact_counts;

    mi_gold_subcharts += static_cast<double>(pair.gold.subcharts.size());
    mi_count_num += row.subchart_accuracy * static_cast<double>(pair.gold.subcharts.size());
    mi_type_num += row.type_accuracy * static_cast<double>(pair.gold.subcharts.size());
    double gold_stats = static_cast<double>(extract_numbers(pair.gold).size());
    mi_gold_stats += gold_stats;
    mi_stat_num += row.statistical_accuracy * gold_stats;

    report.per_pair.push_back(std::move(row));
  }

  const double n = static_cast<double>(pairs.size());
  report.subchart_accuracy = sum_count / n * 100.0;
  report.subchart_type_accuracy = sum_type / n * 100.0;
  report.statistical_accuracy = sum_stat / n * 100.0;
  report.title_rouge_l = sum_title / n;
  report.summary_rouge_l = sum_summary / n;
  report.subchart_summary_rouge_l = sum_sub_summary / n;
  report.subchart_summary_rouge_l_avg = sum_sub_summary_avg / n;
  report.rse = rse(pairs);
  report.count_exact_match = static_cast<double>(exact_counts) / n * 100.0;
  report.micro_subchart_accuracy =
      mi_gold_subcharts > 0 ? mi_count_num / mi_gold_subcharts * 100.0 : 0.0;
  report.micro_type_accuracy =
      mi_gold_subcharts > 0 ? mi_type_num / mi_gold_subcharts * 100.0 : 0.0;
  report.micro_statistical_accuracy =
      mi_gold_stats > 0 ? mi_stat_num / mi_gold_stats * 100.0 : 0.0;
  return report;
}

inline json report_to_json(const MetricsReport& r) {
  json per_pair = json::array();
  for (const auto& row : r.per_pair) {
    per_pair.push_back({{"id", row.id},
                        {"subchart_accuracy", row.subchart_accuracy},
                        {"type_accuracy", row.type_accuracy},
                        {"statistical_accuracy", row.statistical_accuracy},
                        {"title_rouge_l", row.title_rouge_l},
                        {"summary_rouge_l", row.summary_rouge_l},
                        {"subchart_summary_rouge_l", row.subchart_summary_rouge_l},
                        {"pred_subcharts", row.pred_subcharts},
                        {"gold_subcharts", row.gold_subcharts},
                        {"flagged", row.flagged}});
  }
  return json{{"subchart_accuracy", r.subchart_accuracy},
              {"rse", r.rse},
              {"title_rouge_l", r.title_rouge_l},
              {"summary_rouge_l", r.summary_rouge_l},
              {"subchart_type_accuracy", r.subchart_type_accuracy},
              {"subchart_summary_rouge_l", r.subchart_summary_rouge_l},
              {"statistical_accuracy", r.statistical_accuracy},
              {"n_pairs", r.n_pairs},
              {"count_exact_match", r.count_exact_match},
              {"micro_subchart_accuracy", r.micro_subchart_accuracy},
              {"micro_type_accuracy", r.micro_type_accuracy},
              {"micro_statistical_accuracy", r.micro_statistical_accuracy},
              {"subchart_summary_rouge_l_avg", r.subchart_summary_rouge_l_avg},
              {"per_pair", per_pair}};
}

/// Human-readable one-row table with the headline column names.
inline std::string report_to_table(const MetricsReport& r) {
  char buf[512];
  std::string out;
  out += "Subchart Accuracy | RSE | Title Rouge-L | Summary Rouge-L | "
         "Subchart Type Accuracy | Subchart Summary Rouge-L | Statistical Accuracy\n";
  std::snprintf(buf, sizeof(buf),
                "%17.2f | %4.2f | %13.2f | %15.2f | %22.2f | %24.2f | %20.2f\n",
                r.subchart_accuracy, r.rse, r.title_rouge_l, r.summary_rouge_l,
                r.subchart_type_accuracy, r.subchart_summary_rouge_l,
                r.statistical_accuracy);
  out += buf;
  return out;
}

}  // namespace statfig::eval
