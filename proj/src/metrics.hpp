#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace afrlab::metrics {

/// One evaluated document: true/predicted label plus the weighted expected
/// score used for ranking.
struct PredictionRecord {
  int query_id = 0;
  int y_true = 0;
  int y_pred = 0;
  double score = 0.0;  // in [0,4]
};

/// Exact 5-way match rate.
double five_acc(std::span<const PredictionRecord> records);

/// Binary match rate after grouping {0,1} as irrelevant, {2,3,4} relevant.
double two_acc(std::span<const PredictionRecord> records);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

struct PrfReport {
  std::array<ClassScores, 5> per_class{};
  double macro_f1 = 0.0;     // unweighted mean; zero-support classes count 0
  double weighted_f1 = 0.0;  // support-weighted mean
};

PrfReport per_class_prf(std::span<const PredictionRecord> records);

struct PairAccOptions {
  bool ties_incorrect = true;         // equal scores on an ordered pair
  bool exclude_equal_labels = true;   // pairs with y_true_a == y_true_b
};

/// Same-query unordered pairs with unequal y_true: correct iff the score
/// ordering matches the label ordering. Empty when no eligible pair exists.
std::optional<double> pair_acc(std::span<const PredictionRecord> records,
                               const PairAccOptions& opts = {});

/// Mean per-query NDCG@k with gain 2^y - 1 and log2(rank+1) discount.
/// Ranking is by score descending, ties broken by input order; queries with
/// zero IDCG are skipped. Empty when every query is skipped.
std::optional<double> ndcg_at_k(std::span<const PredictionRecord> records,
                                int k = 3);

// PredictionRecord JSONL (one record per line) for the eval interface.
std::string to_jsonl_line(const PredictionRecord& r);
std::vector<PredictionRecord> read_jsonl(std::istream& in);

/// Per-class CSV in the P / R / F1 layout plus macro/weighted rows.
std::string per_class_csv(const PrfReport& report);

/// One training-step row of the experiment log.
struct MetricsRecord {
  long step = 0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double entropy = 0.0;
  double five_acc = 0.0;
  double two_acc = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double pair_acc = 0.0;
  double ndcg3 = 0.0;
  double longtail_checkpoint_acc = 0.0;
};

}  // namespace afrlab::metrics
