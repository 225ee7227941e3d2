#include "geosvg/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geosvg/errors.hpp"
#include "geosvg/rng.hpp"

namespace geosvg {

using nlohmann::json;

void GrpoConfig::validate() const {
  if (group_size < 2) throw FormatError("group size must be at least 2");
  if (!(clip > 0 && clip < 1)) throw FormatError("clip range must lie in (0, 1)");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw FormatError("learning rate must be positive");
  if (updates < 0) throw FormatError("updates must be non-negative");
  if (!(kl_coeff >= 0)) throw FormatError("kl coefficient must be non-negative");
  if (!(epsilon > 0)) throw FormatError("epsilon must be positive");
  if (inner_steps < 1) throw FormatError("inner steps must be at least 1");
  if (magnitudes.size() < 2) throw FormatError("need at least two magnitudes");
  for (double m : magnitudes) {
    if (!(m >= 0) || !std::isfinite(m)) throw FormatError("magnitudes must be non-negative");
  }
  verifier.validate();
}

GrpoConfig load_grpo_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("grpo config: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("grpo config must be an object");
  GrpoConfig cfg;
  try {
    if (doc.contains("group_size")) cfg.group_size = doc["group_size"].get<int>();
    if (doc.contains("clip")) cfg.clip = doc["clip"].get<double>();
    if (doc.contains("learning_rate")) cfg.learning_rate = doc["learning_rate"].get<double>();
    if (doc.contains("updates")) cfg.updates = doc["updates"].get<int>();
    if (doc.contains("kl_coeff")) cfg.kl_coeff = doc["kl_coeff"].get<double>();
    if (doc.contains("epsilon")) cfg.epsilon = doc["epsilon"].get<double>();
    if (doc.contains("seeds")) cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    if (doc.contains("inner_steps")) cfg.inner_steps = doc["inner_steps"].get<int>();
    if (doc.contains("curriculum")) cfg.curriculum = doc["curriculum"].get<bool>();
    if (doc.contains("magnitudes")) cfg.magnitudes = doc["magnitudes"].get<std::vector<double>>();
    if (doc.contains("verifier")) cfg.verifier = load_verifier_config(doc["verifier"].dump());
  } catch (const json::exception& e) {
    throw FormatError(std::string("grpo config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) throw FormatError("a group needs at least two rewards");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (sd + epsilon));
  return out;
}

double clipped_surrogate(double rho, double advantage, double eta) {
  return std::min(rho * advantage, std::clamp(rho, 1 - eta, 1 + eta) * advantage);
}

bool surrogate_clipped(double rho, double advantage, double eta) {
  return (advantage > 0 && rho > 1 + eta) || (advantage < 0 && rho < 1 - eta);
}

ToyPolicy ToyPolicy::uniform(std::vector<double> magnitudes) {
  ToyPolicy p;
  for (auto& l : p.logits) l.assign(magnitudes.size(), 0.0);
  p.magnitudes = std::move(magnitudes);
  return p;
}

std::vector<double> ToyPolicy::probs(std::size_t category) const {
  const std::vector<double>& z = logits.at(category);
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - top);
  for (double& v : p) v /= sum;
  return p;
}

double ToyPolicy::log_prob(const ToyAction& action) const {
  double lp = 0.0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const std::vector<double>& z = logits[c];
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    lp += z.at(action.choice[c]) - top - std::log(sum);
  }
  return lp;
}

ToyAction ToyPolicy::sample(std::uint64_t seed) const {
  Rng rng(seed);
  ToyAction a;
  for (std::size_t c = 0; c < kCategoryCount; ++c) a.choice[c] = rng.categorical(probs(c));
  return a;
}

double ToyPolicy::kl_to(const ToyPolicy& ref) const {
  double kl = 0.0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const std::vector<double> p = probs(c);
    const std::vector<double> q = ref.probs(c);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] > 0) kl += p[k] * std::log(p[k] / q[k]);
    }
  }
  return kl;
}

std::vector<CorruptionTag> action_defects(const ToyPolicy& policy, const ToyAction& action, const LayoutPlan& plan,
                                          std::uint64_t seed) {
  std::vector<std::size_t> boxes;
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    if (plan.nodes[i].type == NodeType::box) boxes.push_back(i);
  }
  std::vector<CorruptionTag> tags;
  const double endpoint = policy.magnitudes.at(action.choice[0]);
  const double box = policy.magnitudes.at(action.choice[1]);
  const double text = policy.magnitudes.at(action.choice[2]);
  if (endpoint > 0) {
    for (std::size_t k = 0; k < plan.connectors.size(); ++k) tags.push_back({CorruptionKind::endpoint_shift, endpoint, k});
  }
  if (boxes.empty()) return tags;
  Rng rng(seed);
  const std::size_t moved = boxes[rng.index(boxes.size())];
  const std::size_t shrunk = boxes[rng.index(boxes.size())];
  if (box > 0) tags.push_back({CorruptionKind::box_shift, box, moved});
  if (text > 0) tags.push_back({CorruptionKind::text_shrink_box, text, shrunk});
  return tags;
}

GroupBatch rollout_group(const ToyPolicy& policy, const CorpusSample& sample, int group_size, std::uint64_t rng_seed,
                         long update_index, const GrpoConfig& cfg) {
  if (group_size < 2) throw FormatError("a group needs at least two candidates");
  GroupBatch batch;
  batch.prompt_ref = sample.sample_id;
  batch.update_index = update_index;
  const WeightSet weights =
      cfg.curriculum ? curriculum_weights(cfg.verifier.weights, update_index) : cfg.verifier.weights;
  for (int i = 0; i < group_size; ++i) {
    const std::uint64_t seed = mix_seed({rng_seed, static_cast<std::uint64_t>(i)});
    SvgCandidate c;
    c.action = policy.sample(seed);
    c.logp_behavior = policy.log_prob(c.action);
    c.svg = render_with_defects(sample, action_defects(policy, c.action, sample.plan, seed), seed);
    c.reward = verify(c.svg, sample.plan, cfg.verifier, weights);
    batch.rewards.push_back(c.reward.total);
    batch.candidates.push_back(std::move(c));
  }
  batch.advantages = group_advantages(batch.rewards, cfg.epsilon);
  batch.ratios.assign(batch.candidates.size(), 1.0);
  return batch;
}

ToyPolicy grpo_update(const ToyPolicy& policy, GroupBatch& batch, const GrpoConfig& cfg, const ToyPolicy& reference,
                      UpdateStats* stats) {
  const std::size_t g = batch.candidates.size();
  if (g == 0 || batch.advantages.size() != g) throw FormatError("batch has no scored candidates");
  std::array<std::vector<double>, kCategoryCount> probs;
  std::array<std::vector<double>, kCategoryCount> grad;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    probs[c] = policy.probs(c);
    grad[c].assign(probs[c].size(), 0.0);
  }

  UpdateStats st;
  batch.ratios.resize(g);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < g; ++i) {
    const SvgCandidate& cand = batch.candidates[i];
    const double rho = std::exp(policy.log_prob(cand.action) - cand.logp_behavior);
    const double a = batch.advantages[i];
    batch.ratios[i] = rho;
    st.surrogate += clipped_surrogate(rho, a, cfg.clip) / static_cast<double>(g);
    if (surrogate_clipped(rho, a, cfg.clip)) {
      ++clipped;
      continue;
    }
    // d(rho * A)/dz = A * rho * (onehot - softmax), category by category.
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      for (std::size_t k = 0; k < probs[c].size(); ++k) {
        const double onehot = k == cand.action.choice[c] ? 1.0 : 0.0;
        grad[c][k] += a * rho * (onehot - probs[c][k]) / static_cast<double>(g);
      }
    }
  }
  st.clip_fraction = static_cast<double>(clipped) / static_cast<double>(g);
  st.kl = policy.kl_to(reference);

  ToyPolicy next = policy;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const std::vector<double> q = reference.probs(c);
    double kl_c = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (probs[c][k] > 0) kl_c += probs[c][k] * std::log(probs[c][k] / q[k]);
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
      double d = grad[c][k];
      if (cfg.kl_coeff != 0 && probs[c][k] > 0) d -= cfg.kl_coeff * probs[c][k] * (std::log(probs[c][k] / q[k]) - kl_c);
      if (!std::isfinite(d)) throw NonFiniteGradient("non-finite gradient in category " + std::to_string(c));
      next.logits[c][k] += cfg.learning_rate * d;
    }
  }
  if (stats != nullptr) *stats = st;
  return next;
}

json update_log_to_json(const UpdateLog& log) {
  const RewardBreakdown& m = log.component_means;
  return {{"update", log.update},
          {"sample_id", log.sample_id},
          {"mean_reward", log.mean_reward},
          {"components",
           {{"exec", m.exec},
            {"fit", m.fit},
            {"overflow", m.overflow},
            {"anchor_acc", m.anchor_acc},
            {"anchor_err", m.anchor_err},
            {"text_in_box", m.text_in_box},
            {"padding", m.padding},
            {"graph", m.graph},
            {"clean", m.clean}}},
          {"clip_fraction", log.clip_fraction},
          {"kl", log.kl},
          {"effective_weights", weights_to_json(log.effective_weights)}};
}

TrainResult train(const std::vector<CorpusSample>& samples, const GrpoConfig& cfg, std::uint64_t seed,
                  const std::function<void(const UpdateLog&)>& on_update) {
  cfg.validate();
  if (samples.empty()) throw EmptyInput("training needs at least one sample");
  TrainResult result;
  const ToyPolicy reference = ToyPolicy::uniform(cfg.magnitudes);
  ToyPolicy policy = reference;
  for (long u = 0; u < cfg.updates; ++u) {
    const std::uint64_t step_seed = mix_seed({seed, static_cast<std::uint64_t>(u)});
    Rng rng(step_seed);
    const CorpusSample& sample = samples[rng.index(samples.size())];
    GroupBatch batch = rollout_group(policy, sample, cfg.group_size, rng.next(), u, cfg);

    UpdateLog log;
    log.update = u;
    log.sample_id = sample.sample_id;
    log.effective_weights = cfg.curriculum ? curriculum_weights(cfg.verifier.weights, u) : cfg.verifier.weights;
    const double n = static_cast<double>(batch.candidates.size());
    RewardBreakdown& m = log.component_means;
    for (const SvgCandidate& c : batch.candidates) {
      m.exec += c.reward.exec / n;
      m.fit += c.reward.fit / n;
      m.overflow += c.reward.overflow / n;
      m.anchor_acc += c.reward.anchor_acc / n;
      m.anchor_err += c.reward.anchor_err / n;
      m.text_in_box += c.reward.text_in_box / n;
      m.padding += c.reward.padding / n;
      m.graph += c.reward.graph / n;
      m.clean += c.reward.clean / n;
      log.mean_reward += c.reward.total / n;
    }
    m.weights = log.effective_weights;
    m.total = log.mean_reward;

    double clip_sum = 0.0;
    for (int step = 0; step < cfg.inner_steps; ++step) {
      UpdateStats st;
      policy = grpo_update(policy, batch, cfg, reference, &st);
      clip_sum += st.clip_fraction;
      log.kl = st.kl;
    }
    log.clip_fraction = clip_sum / cfg.inner_steps;
    if (on_update) on_update(log);
    result.log.push_back(std::move(log));
  }
  result.policy = std::move(policy);
  return result;
}

}  // namespace geosvg
