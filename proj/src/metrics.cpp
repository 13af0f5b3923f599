#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace afrlab::metrics {

namespace {

void require_nonempty(std::span<const PredictionRecord> records) {
  if (records.empty()) throw std::invalid_argument("no prediction records");
}

void check_labels(std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    if (r.y_true < 0 || r.y_true > 4 || r.y_pred < 0 || r.y_pred > 4) {
      throw std::invalid_argument("label out of the 0..4 range");
    }
  }
}

std::map<int, std::vector<size_t>> group_by_query(
    std::span<const PredictionRecord> records) {
  std::map<int, std::vector<size_t>> groups;
  for (size_t i = 0; i < records.size(); ++i) {
    groups[records[i].query_id].push_back(i);
  }
  return groups;
}

double dcg_at_k(std::span<const size_t> order,
                std::span<const PredictionRecord> records, int k) {
  double dcg = 0.0;
  const size_t limit = std::min(order.size(), static_cast<size_t>(k));
  for (size_t rank = 0; rank < limit; ++rank) {
    const double gain =
        std::exp2(static_cast<double>(records[order[rank]].y_true)) - 1.0;
    dcg += gain / std::log2(static_cast<double>(rank) + 2.0);
  }
  return dcg;
}

}  // namespace

double five_acc(std::span<const PredictionRecord> records) {
  require_nonempty(records);
  check_labels(records);
  size_t hit = 0;
  for (const auto& r : records) {
    if (r.y_pred == r.y_true) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

double two_acc(std::span<const PredictionRecord> records) {
  require_nonempty(records);
  check_labels(records);
  size_t hit = 0;
  for (const auto& r : records) {
    if ((r.y_pred >= 2) == (r.y_true >= 2)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

PrfReport per_class_prf(std::span<const PredictionRecord> records) {
  require_nonempty(records);
  check_labels(records);
  std::array<size_t, 5> tp{}, fp{}, fn{};
  for (const auto& r : records) {
    if (r.y_pred == r.y_true) {
      ++tp[static_cast<size_t>(r.y_true)];
    } else {
      ++fp[static_cast<size_t>(r.y_pred)];
      ++fn[static_cast<size_t>(r.y_true)];
    }
  }
  PrfReport rep;
  double weighted = 0.0;
  size_t total_support = 0;
  for (size_t c = 0; c < 5; ++c) {
    ClassScores& s = rep.per_class[c];
    s.support = tp[c] + fn[c];
    const size_t pred_count = tp[c] + fp[c];
    s.precision = pred_count > 0
                      ? static_cast<double>(tp[c]) /
                            static_cast<double>(pred_count)
                      : 0.0;
    s.recall = s.support > 0 ? static_cast<double>(tp[c]) /
                                   static_cast<double>(s.support)
                             : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    rep.macro_f1 += s.f1 / 5.0;
    weighted += s.f1 * static_cast<double>(s.support);
    total_support += s.support;
  }
  rep.weighted_f1 =
      total_support > 0 ? weighted / static_cast<double>(total_support) : 0.0;
  return rep;
}

std::optional<double> pair_acc(std::span<const PredictionRecord> records,
                               const PairAccOptions& opts) {
  check_labels(records);
  const auto groups = group_by_query(records);
  size_t total = 0, correct = 0;
  for (const auto& [qid, idx] : groups) {
    for (size_t a = 0; a < idx.size(); ++a) {
      for (size_t b = a + 1; b < idx.size(); ++b) {
        const auto& ra = records[idx[a]];
        const auto& rb = records[idx[b]];
        if (ra.y_true == rb.y_true) {
          if (opts.exclude_equal_labels) continue;
        }
        ++total;
        const double ds = ra.score - rb.score;
        const int dl = ra.y_true - rb.y_true;
        if (ds == 0.0) {
          if (!opts.ties_incorrect) ++correct;
          continue;
        }
        if ((ds > 0.0 && dl > 0) || (ds < 0.0 && dl < 0)) ++correct;
      }
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> ndcg_at_k(std::span<const PredictionRecord> records,
                                int k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  check_labels(records);
  const auto groups = group_by_query(records);
  double total = 0.0;
  size_t queries = 0;
  for (const auto& [qid, idx] : groups) {
    std::vector<size_t> by_score(idx);
    std::stable_sort(by_score.begin(), by_score.end(),
                     [&](size_t a, size_t b) {
                       return records[a].score > records[b].score;
                     });
    std::vector<size_t> ideal(idx);
    std::stable_sort(ideal.begin(), ideal.end(), [&](size_t a, size_t b) {
      return records[a].y_true > records[b].y_true;
    });
    const double idcg = dcg_at_k(ideal, records, k);
    if (idcg <= 0.0) continue;  // all-zero relevance: undefined, skipped
    total += dcg_at_k(by_score, records, k) / idcg;
    ++queries;
  }
  if (queries == 0) return std::nullopt;
  return total / static_cast<double>(queries);
}

std::string to_jsonl_line(const PredictionRecord& r) {
  nlohmann::json j;
  j["query_id"] = r.query_id;
  j["y_true"] = r.y_true;
  j["y_pred"] = r.y_pred;
  j["score"] = r.score;
  return j.dump();
}

std::vector<PredictionRecord> read_jsonl(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    PredictionRecord r;
    r.query_id = j.at("query_id").get<int>();
    r.y_true = j.at("y_true").get<int>();
    r.y_pred = j.at("y_pred").get<int>();
    r.score = j.at("score").get<double>();
    out.push_back(r);
  }
  return out;
}

std::string per_class_csv(const PrfReport& report) {
  std::string csv = "label,precision,recall,f1,support\n";
  char buf[128];
  for (size_t c = 0; c < 5; ++c) {
    const auto& s = report.per_class[c];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%zu\n", c, s.precision,
                  s.recall, s.f1, s.support);
    csv += buf;
  }
  std::snprintf(buf, sizeof(buf), "macro,,,%.6f,\n", report.macro_f1);
  csv += buf;
  std::snprintf(buf, sizeof(buf), "weighted,,,%.6f,\n", report.weighted_f1);
  csv += buf;
  return csv;
}

}  // namespace afrlab::metrics
