#ifndef COTV_RL_PPO_HPP_
#define COTV_RL_PPO_HPP_

#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cotv/env/agent_step.hpp"
#include "cotv/rl/actor_critic.hpp"

namespace cotv {

enum class UpdateOrder { kLightsFirst, kVehiclesFirst };

struct PpoConfig {
  int iterations = 150;
  int episodes = 18;  // parallel episodes per iteration
  int horizon = 720;  // steps per episode
  int epochs = 10;
  int minibatch = 512;
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  int hidden = 64;
  UpdateOrder order = UpdateOrder::kLightsFirst;

  void validate() const;
};

// Adam with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps() const { return t_; }

 private:
  double lr_ = 0.0, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

// Flattened training samples for one agent type. Column k of `obs` pairs
// with entry k of every vector.
struct SampleBatch {
  Eigen::MatrixXd obs;
  Eigen::VectorXd actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return actions.size(); }
};

// Per-type store of agent trajectory segments. Segments are closed by
// records with done = true and must arrive time-ordered per agent.
class RolloutBuffer {
 public:
  RolloutBuffer() = default;
  RolloutBuffer(double gamma, double lambda) : gamma_(gamma), lambda_(lambda) {}

  // Splits one episode's records of a single agent type into per-agent
  // segments and computes their advantages.
  void add_episode(std::span<const AgentStep> records);

  bool empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }
  std::size_t segments() const { return segments_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }

  // Advantages normalized to zero mean and unit variance.
  SampleBatch batch() const;
  void clear();

 private:
  double gamma_ = 0.99;
  double lambda_ = 0.95;
  std::vector<AgentStep> steps_;
  std::vector<double> advantages_;
  std::vector<double> returns_;
  std::size_t segments_ = 0;
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Clipped-surrogate loss averaged over `batch`:
//   -min(rho A, clip(rho, 1-eps, 1+eps) A) + c_v (V - R)^2 - c_e H
// Writes d(loss)/d(params) into `grad` when non-null.
LossBreakdown ppo_loss(const ActorCritic& net, const SampleBatch& batch,
                       const PpoConfig& config, Eigen::VectorXd* grad);

struct UpdateStats {
  LossBreakdown first;  // first minibatch of the first epoch
  LossBreakdown last;   // last minibatch of the last epoch
  int minibatches = 0;
  std::size_t samples = 0;
};

// K epochs of shuffled minibatches with global grad-norm clipping. Throws
// cotv::Error(kNumerical) on a non-finite loss, leaving `net` at its last
// finite state.
UpdateStats ppo_update(ActorCritic& net, Adam& optimizer,
                       const SampleBatch& batch, const PpoConfig& config,
                       std::mt19937_64& rng);

}  // namespace cotv

#endif  // COTV_RL_PPO_HPP_
