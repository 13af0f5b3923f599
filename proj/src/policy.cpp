#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace afrlab::policy {

namespace {

constexpr int kParamsFormatVersion = 1;

void check_slot(const PolicyParams& params, int slot) {
  if (slot < 0 || slot >= static_cast<int>(params.slots.size())) {
    throw std::invalid_argument("slot index out of range");
  }
}

std::vector<double> slot_logits(const PolicyParams::Slot& s,
                                std::span<const double> x) {
  std::vector<double> logits(static_cast<size_t>(s.vocab));
  const size_t dim = x.size();
  for (int k = 0; k < s.vocab; ++k) {
    double acc = s.b[static_cast<size_t>(k)];
    const double* row = s.w.data() + static_cast<size_t>(k) * dim;
    for (size_t d = 0; d < dim; ++d) acc += row[d] * x[d];
    logits[static_cast<size_t>(k)] = acc;
  }
  return logits;
}

std::vector<double> softmax(std::vector<double> logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  double hi = -std::numeric_limits<double>::infinity();
  for (double& z : logits) {
    z /= temperature;
    if (!std::isfinite(z)) throw std::invalid_argument("non-finite logit");
    hi = std::max(hi, z);
  }
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - hi);
    total += z;
  }
  for (double& z : logits) z /= total;
  return logits;
}

}  // namespace

SlotLayout afrl_layout() {
  return SlotLayout(grammar::kSlotVocab.begin(), grammar::kSlotVocab.end());
}

bool PolicyParams::finite() const {
  const auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  if (!ok(projection)) return false;
  for (const Slot& s : slots) {
    if (!ok(s.w) || !ok(s.b)) return false;
  }
  return true;
}

PolicyParams make_policy(const SlotLayout& layout, Capacity capacity,
                         int feature_dim, uint64_t init_seed,
                         double init_scale) {
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  PolicyParams p;
  p.capacity = capacity;
  p.feature_dim = feature_dim;
  p.input_dim = capacity == Capacity::student ? kStudentDim : feature_dim;
  Rng rng(splitmix64(init_seed ^ 0x706f6c696379ULL));
  if (capacity == Capacity::student) {
    // Fixed random projection, scaled so projected coordinates stay O(1).
    const double s = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    p.projection.resize(static_cast<size_t>(p.input_dim) *
                        static_cast<size_t>(feature_dim));
    for (double& v : p.projection) v = rng.uniform(-s, s) * 3.0;
  }
  p.slots.reserve(layout.size());
  for (int vocab : layout) {
    if (vocab < 2) throw std::invalid_argument("slot vocab must be >= 2");
    PolicyParams::Slot s;
    s.vocab = vocab;
    s.w.assign(static_cast<size_t>(vocab) * static_cast<size_t>(p.input_dim),
               0.0);
    s.b.assign(static_cast<size_t>(vocab), 0.0);
    if (init_scale > 0.0) {
      for (double& v : s.w) v = rng.uniform(-init_scale, init_scale);
      for (double& v : s.b) v = rng.uniform(-init_scale, init_scale);
    }
    p.slots.push_back(std::move(s));
  }
  return p;
}

void PolicyGrad::scale(double s) {
  for (Slot& slot : slots) {
    for (double& v : slot.w) v *= s;
    for (double& v : slot.b) v *= s;
  }
}

void PolicyGrad::axpy(double a, const PolicyGrad& other) {
  if (slots.size() != other.slots.size()) {
    throw std::invalid_argument("PolicyGrad shape mismatch");
  }
  for (size_t i = 0; i < slots.size(); ++i) {
    for (size_t j = 0; j < slots[i].w.size(); ++j) {
      slots[i].w[j] += a * other.slots[i].w[j];
    }
    for (size_t j = 0; j < slots[i].b.size(); ++j) {
      slots[i].b[j] += a * other.slots[i].b[j];
    }
  }
}

double PolicyGrad::max_abs() const {
  double m = 0.0;
  for (const Slot& s : slots) {
    for (double v : s.w) m = std::max(m, std::abs(v));
    for (double v : s.b) m = std::max(m, std::abs(v));
  }
  return m;
}

bool PolicyGrad::finite() const {
  for (const Slot& s : slots) {
    for (double v : s.w) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : s.b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

PolicyGrad zero_grad_like(const PolicyParams& params) {
  PolicyGrad g;
  g.slots.resize(params.slots.size());
  for (size_t i = 0; i < params.slots.size(); ++i) {
    g.slots[i].w.assign(params.slots[i].w.size(), 0.0);
    g.slots[i].b.assign(params.slots[i].b.size(), 0.0);
  }
  return g;
}

std::vector<double> project_features(const PolicyParams& params,
                                     std::span<const double> features) {
  if (static_cast<int>(features.size()) != params.feature_dim) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  if (params.capacity == Capacity::teacher) {
    return std::vector<double>(features.begin(), features.end());
  }
  std::vector<double> out(static_cast<size_t>(params.input_dim), 0.0);
  for (int r = 0; r < params.input_dim; ++r) {
    const double* row =
        params.projection.data() +
        static_cast<size_t>(r) * static_cast<size_t>(params.feature_dim);
    double acc = 0.0;
    for (int d = 0; d < params.feature_dim; ++d) acc += row[d] * features[d];
    out[static_cast<size_t>(r)] = acc;
  }
  return out;
}

SlotDistribution slot_distribution(const PolicyParams& params,
                                   std::span<const double> features, int slot,
                                   double temperature) {
  check_slot(params, slot);
  const auto x = project_features(params, features);
  return SlotDistribution{
      softmax(slot_logits(params.slots[static_cast<size_t>(slot)], x),
              temperature)};
}

SampledTokens sample_tokens(const PolicyParams& params,
                            std::span<const double> features, Rng& rng,
                            double temperature) {
  const auto x = project_features(params, features);
  SampledTokens out;
  out.tokens.reserve(params.slots.size());
  out.slot_logprobs.reserve(params.slots.size());
  for (const auto& slot : params.slots) {
    const auto probs = softmax(slot_logits(slot, x), temperature);
    const size_t tok = rng.categorical(probs);
    out.tokens.push_back(static_cast<int>(tok));
    out.slot_logprobs.push_back(std::log(probs[tok]));
  }
  return out;
}

SampledTrajectory sample_trajectory(const PolicyParams& params,
                                    std::span<const double> features, Rng& rng,
                                    double temperature) {
  if (params.slots.size() != grammar::kNumSlots) {
    throw std::invalid_argument("sample_trajectory needs the 7-slot layout");
  }
  const auto s = sample_tokens(params, features, rng, temperature);
  SampledTrajectory out;
  std::array<int, grammar::kNumSlots> tokens{};
  std::copy(s.tokens.begin(), s.tokens.end(), tokens.begin());
  out.trajectory = grammar::trajectory_from_tokens(tokens);
  std::copy(s.slot_logprobs.begin(), s.slot_logprobs.end(),
            out.slot_logprobs.begin());
  return out;
}

std::vector<double> log_prob_tokens(const PolicyParams& params,
                                    std::span<const double> features,
                                    std::span<const int> tokens,
                                    double temperature) {
  if (tokens.size() != params.slots.size()) {
    throw std::invalid_argument("token count mismatch");
  }
  const auto x = project_features(params, features);
  std::vector<double> out(tokens.size());
  for (size_t s = 0; s < tokens.size(); ++s) {
    const auto probs = softmax(slot_logits(params.slots[s], x), temperature);
    const int tok = tokens[s];
    if (tok < 0 || tok >= params.slots[s].vocab) {
      throw std::invalid_argument("token out of range");
    }
    out[s] = std::log(probs[static_cast<size_t>(tok)]);
  }
  return out;
}

std::array<double, grammar::kNumSlots> log_prob(
    const PolicyParams& params, std::span<const double> features,
    const Trajectory& t, double temperature) {
  const auto tokens = grammar::slot_tokens(t);
  const auto lp = log_prob_tokens(params, features, tokens, temperature);
  std::array<double, grammar::kNumSlots> out{};
  std::copy(lp.begin(), lp.end(), out.begin());
  return out;
}

double entropy(const PolicyParams& params,
               std::span<const std::vector<double>> features_batch,
               double temperature) {
  if (features_batch.empty()) {
    throw std::invalid_argument("entropy: empty batch");
  }
  double total = 0.0;
  size_t count = 0;
  for (const auto& f : features_batch) {
    const auto x = project_features(params, f);
    for (const auto& slot : params.slots) {
      const auto probs = softmax(slot_logits(slot, x), temperature);
      double h = 0.0;
      for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
      }
      total += h;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double weighted_expected_score(const SlotDistribution& dist) {
  if (dist.probs.size() != grammar::kNumLabels) {
    throw std::invalid_argument(
        "weighted_expected_score needs a 5-way distribution");
  }
  double s = 0.0;
  for (size_t k = 0; k < dist.probs.size(); ++k) {
    s += static_cast<double>(k) * dist.probs[k];
  }
  return s;
}

void accumulate_grad_logits_slot(const PolicyParams& params,
                                 std::span<const double> projected, int slot,
                                 std::span<const double> dz,
                                 PolicyGrad& grad) {
  check_slot(params, slot);
  const auto& s = params.slots[static_cast<size_t>(slot)];
  if (static_cast<int>(dz.size()) != s.vocab) {
    throw std::invalid_argument("dz size mismatch");
  }
  auto& gs = grad.slots[static_cast<size_t>(slot)];
  const size_t dim = projected.size();
  for (int k = 0; k < s.vocab; ++k) {
    const double d = dz[static_cast<size_t>(k)];
    gs.b[static_cast<size_t>(k)] += d;
    double* row = gs.w.data() + static_cast<size_t>(k) * dim;
    for (size_t j = 0; j < dim; ++j) row[j] += d * projected[j];
  }
}

void accumulate_grad_log_prob_slot(const PolicyParams& params,
                                   std::span<const double> projected, int slot,
                                   int token, double coeff, double temperature,
                                   PolicyGrad& grad) {
  check_slot(params, slot);
  const auto& s = params.slots[static_cast<size_t>(slot)];
  const auto probs = softmax(slot_logits(s, projected), temperature);
  // d log pi / d logit_k = (onehot_k - p_k) / T
  std::vector<double> dz(static_cast<size_t>(s.vocab));
  for (int k = 0; k < s.vocab; ++k) {
    dz[static_cast<size_t>(k)] =
        coeff * (((k == token) ? 1.0 : 0.0) - probs[static_cast<size_t>(k)]) /
        temperature;
  }
  accumulate_grad_logits_slot(params, projected, slot, dz, grad);
}

void accumulate_grad_cross_entropy_slot(const PolicyParams& params,
                                        std::span<const double> projected,
                                        int slot,
                                        std::span<const double> target,
                                        std::span<const double> probs,
                                        double coeff, double temperature,
                                        PolicyGrad& grad) {
  check_slot(params, slot);
  const auto& s = params.slots[static_cast<size_t>(slot)];
  if (static_cast<int>(target.size()) != s.vocab ||
      static_cast<int>(probs.size()) != s.vocab) {
    throw std::invalid_argument("target/probs size mismatch");
  }
  std::vector<double> dz(static_cast<size_t>(s.vocab));
  for (int k = 0; k < s.vocab; ++k) {
    dz[static_cast<size_t>(k)] = coeff *
                                 (probs[static_cast<size_t>(k)] -
                                  target[static_cast<size_t>(k)]) /
                                 temperature;
  }
  accumulate_grad_logits_slot(params, projected, slot, dz, grad);
}

PolicyGrad grad_log_prob(const PolicyParams& params,
                         std::span<const double> features,
                         std::span<const int> tokens) {
  if (tokens.size() != params.slots.size()) {
    throw std::invalid_argument("token count mismatch");
  }
  PolicyGrad g = zero_grad_like(params);
  const auto x = project_features(params, features);
  for (size_t s = 0; s < tokens.size(); ++s) {
    accumulate_grad_log_prob_slot(params, x, static_cast<int>(s), tokens[s],
                                  1.0, 1.0, g);
  }
  return g;
}

PolicyGrad grad_log_prob(const PolicyParams& params,
                         std::span<const double> features,
                         const Trajectory& t) {
  const auto tokens = grammar::slot_tokens(t);
  return grad_log_prob(params, features,
                       std::span<const int>(tokens.data(), tokens.size()));
}

std::vector<int> argmax_tokens(const PolicyParams& params,
                               std::span<const double> features) {
  const auto x = project_features(params, features);
  std::vector<int> out;
  out.reserve(params.slots.size());
  for (const auto& slot : params.slots) {
    const auto logits = slot_logits(slot, x);
    out.push_back(static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin()));
  }
  return out;
}

std::string to_json(const PolicyParams& params) {
  nlohmann::json j;
  j["format_version"] = kParamsFormatVersion;
  j["capacity"] =
      params.capacity == Capacity::student ? "student" : "teacher";
  j["feature_dim"] = params.feature_dim;
  j["input_dim"] = params.input_dim;
  j["projection"] = params.projection;
  auto slots = nlohmann::json::array();
  for (const auto& s : params.slots) {
    slots.push_back({{"vocab", s.vocab}, {"w", s.w}, {"b", s.b}});
  }
  j["slots"] = slots;
  return j.dump();
}

PolicyParams params_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != kParamsFormatVersion) {
    throw std::invalid_argument("unsupported params format version");
  }
  PolicyParams p;
  p.capacity = j.at("capacity").get<std::string>() == "student"
                   ? Capacity::student
                   : Capacity::teacher;
  p.feature_dim = j.at("feature_dim").get<int>();
  p.input_dim = j.at("input_dim").get<int>();
  p.projection = j.at("projection").get<std::vector<double>>();
  for (const auto& js : j.at("slots")) {
    PolicyParams::Slot s;
    s.vocab = js.at("vocab").get<int>();
    s.w = js.at("w").get<std::vector<double>>();
    s.b = js.at("b").get<std::vector<double>>();
    const size_t expect =
        static_cast<size_t>(s.vocab) * static_cast<size_t>(p.input_dim);
    if (s.w.size() != expect || s.b.size() != static_cast<size_t>(s.vocab)) {
      throw std::invalid_argument("params shape mismatch");
    }
    p.slots.push_back(std::move(s));
  }
  if (!p.finite()) throw std::invalid_argument("non-finite parameters");
  return p;
}

}  // namespace afrlab::policy
