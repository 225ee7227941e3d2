#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosvg/corpus.hpp"
#include "geosvg/verifier.hpp"

namespace geosvg {

struct GrpoConfig {
  int group_size = 4;
  double clip = 0.2;  // eta
  double learning_rate = 0.05;
  int updates = 1500;
  double kl_coeff = 0.02;
  double epsilon = 1e-8;
  std::vector<std::uint64_t> seeds{13, 21, 42};
  int inner_steps = 2;  // optimizer steps per sampled batch; later steps see rho != 1
  bool curriculum = true;
  std::vector<double> magnitudes{0, 4, 8, 16, 32, 64};
  VerifierConfig verifier;

  void validate() const;
};

GrpoConfig load_grpo_config(std::string_view json_text);

// (r - mean) / (std + eps) with the population standard deviation.
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon = 1e-8);

double clipped_surrogate(double rho, double advantage, double eta);
// True when the clipped branch is the active minimum, so the term has zero gradient.
bool surrogate_clipped(double rho, double advantage, double eta);

enum class PerturbCategory { endpoint, box, text };
inline constexpr std::size_t kCategoryCount = 3;

struct ToyAction {
  std::array<std::size_t, kCategoryCount> choice{};  // magnitude index per category
  friend bool operator==(const ToyAction&, const ToyAction&) = default;
};

// Independent categorical distributions over perturbation magnitudes, one per category.
struct ToyPolicy {
  std::vector<double> magnitudes;
  std::array<std::vector<double>, kCategoryCount> logits;

  static ToyPolicy uniform(std::vector<double> magnitudes);
  std::vector<double> probs(std::size_t category) const;
  double log_prob(const ToyAction& action) const;
  ToyAction sample(std::uint64_t seed) const;
  // Sum over categories of KL(this || ref).
  double kl_to(const ToyPolicy& ref) const;
};

struct SvgCandidate {
  ToyAction action;
  std::string svg;
  double logp_behavior = 0.0;
  RewardBreakdown reward;
};

struct GroupBatch {
  std::string prompt_ref;
  long update_index = 0;
  std::vector<SvgCandidate> candidates;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> ratios;
};

// Perturbs the ground truth by the sampled magnitudes: every connector end point, one random
// box position and one random box width.
std::vector<CorruptionTag> action_defects(const ToyPolicy& policy, const ToyAction& action, const LayoutPlan& plan,
                                          std::uint64_t seed);

GroupBatch rollout_group(const ToyPolicy& policy, const CorpusSample& sample, int group_size, std::uint64_t rng_seed,
                         long update_index = 0, const GrpoConfig& cfg = {});

struct UpdateStats {
  double surrogate = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
};

// One gradient-ascent step on mean clipped surrogate - kl_coeff * KL(policy || reference).
// Refreshes batch.ratios under `policy`. Throws NonFiniteGradient.
ToyPolicy grpo_update(const ToyPolicy& policy, GroupBatch& batch, const GrpoConfig& cfg, const ToyPolicy& reference,
                      UpdateStats* stats = nullptr);

struct UpdateLog {
  long update = 0;
  std::string sample_id;
  double mean_reward = 0.0;
  RewardBreakdown component_means;
  double clip_fraction = 0.0;
  double kl = 0.0;
  WeightSet effective_weights;
};

nlohmann::json update_log_to_json(const UpdateLog& log);

struct TrainResult {
  ToyPolicy policy;
  std::vector<UpdateLog> log;
};

// Runs cfg.updates GRPO updates on prompts drawn from `samples`. `on_update` sees each record
// as soon as it is produced.
TrainResult train(const std::vector<CorpusSample>& samples, const GrpoConfig& cfg, std::uint64_t seed,
                  const std::function<void(const UpdateLog&)>& on_update = {});

}  // namespace geosvg
