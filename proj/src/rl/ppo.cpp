#include "cotv/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cotv/error.hpp"
#include "cotv/rl/gae.hpp"

namespace cotv {

void PpoConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCategory::kConfig, "ppo: " + msg);
  };
  if (iterations <= 0 || episodes <= 0 || horizon <= 0 || epochs <= 0 ||
      minibatch <= 0 || hidden <= 0) {
    fail("counts must be positive");
  }
  if (!(clip > 0.0 && clip < 1.0)) fail("clip must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) fail("lambda must lie in (0, 1]");
  if (!(learning_rate > 0.0 && value_coef > 0.0 && entropy_coef >= 0.0 &&
        max_grad_norm > 0.0)) {
    fail("rates and coefficients must be positive");
  }
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2,
           double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (grad.size() != m_.size() || params.size() != m_.size()) {
    throw Error(ErrorCategory::kShapeMismatch, "optimizer size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void RolloutBuffer::add_episode(std::span<const AgentStep> records) {
  std::map<std::pair<int, std::uint64_t>, std::vector<std::size_t>> by_agent;
  std::vector<std::pair<int, std::uint64_t>> order;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto key = std::make_pair(static_cast<int>(records[i].type), records[i].agent);
    auto [it, fresh] = by_agent.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(i);
  }
  std::vector<double> rewards, values;
  for (const auto& key : order) {
    const auto& idx = by_agent[key];
    std::size_t start = 0;
    while (start < idx.size()) {
      std::size_t end = start;
      while (end + 1 < idx.size() && !records[idx[end]].done) ++end;
      rewards.clear();
      values.clear();
      for (std::size_t k = start; k <= end; ++k) {
        const AgentStep& s = records[idx[k]];
        if (k > 0 && s.timestep <= records[idx[k - 1]].timestep) {
          throw Error(ErrorCategory::kInvalidArgument,
                      "agent records are not time-ordered");
        }
        rewards.push_back(s.reward);
        values.push_back(s.value);
      }
      const AgentStep& tail = records[idx[end]];
      AdvantageEstimate est =
          compute_gae(rewards, values, tail.bootstrap_value, gamma_, lambda_);
      for (std::size_t k = start; k <= end; ++k) {
        steps_.push_back(records[idx[k]]);
      }
      advantages_.insert(advantages_.end(), est.advantages.begin(),
                         est.advantages.end());
      returns_.insert(returns_.end(), est.returns.begin(), est.returns.end());
      ++segments_;
      start = end + 1;
    }
  }
}

SampleBatch RolloutBuffer::batch() const {
  SampleBatch b;
  const auto n = static_cast<Eigen::Index>(steps_.size());
  if (n == 0) return b;
  const auto d = static_cast<Eigen::Index>(steps_.front().observation.size());
  b.obs.resize(d, n);
  b.actions.resize(n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const AgentStep& s = steps_[static_cast<std::size_t>(k)];
    if (static_cast<Eigen::Index>(s.observation.size()) != d) {
      throw Error(ErrorCategory::kShapeMismatch,
                  "observation length varies within a buffer");
    }
    b.obs.col(k) = Eigen::Map<const Eigen::VectorXd>(s.observation.data(), d);
    b.actions[k] = s.action;
    b.old_log_probs[k] = s.log_prob;
    b.advantages[k] = advantages_[static_cast<std::size_t>(k)];
    b.returns[k] = returns_[static_cast<std::size_t>(k)];
  }
  const double mean = b.advantages.mean();
  const double var = (b.advantages.array() - mean).square().mean();
  b.advantages = (b.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
  return b;
}

void RolloutBuffer::clear() {
  steps_.clear();
  advantages_.clear();
  returns_.clear();
  segments_ = 0;
}

LossBreakdown ppo_loss(const ActorCritic& net, const SampleBatch& batch,
                       const PpoConfig& config, Eigen::VectorXd* grad) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw Error(ErrorCategory::kInvalidArgument, "empty batch");
  ActorCritic::Cache cache;
  Eigen::VectorXd head, value;
  net.forward_batch(batch.obs, head, value, grad ? &cache : nullptr);

  const double inv_n = 1.0 / static_cast<double>(n);
  const bool gaussian = net.head() == ActionHead::kGaussian;
  const double log_std = net.log_std();
  const double sigma2 = std::exp(2.0 * log_std);

  Eigen::VectorXd d_head = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d_value = Eigen::VectorXd::Zero(n);
  double d_log_std = 0.0;

  LossBreakdown out;
  for (Eigen::Index k = 0; k < n; ++k) {
    ActionDistribution dist;
    dist.head = net.head();
    if (gaussian) {
      dist.mean = squash_mean(head[k]);
      dist.log_std = log_std;
    } else {
      dist.logit = head[k];
    }
    const double a = batch.actions[k];
    const double logp = dist.log_prob(a);
    const double ratio = std::exp(logp - batch.old_log_probs[k]);
    const double adv = batch.advantages[k];
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
    const double surr = std::min(ratio * adv, clipped * adv);
    const double v_err = value[k] - batch.returns[k];
    const double ent = dist.entropy();

    out.policy += -surr * inv_n;
    out.value += v_err * v_err * inv_n;
    out.entropy += ent * inv_n;
    out.mean_ratio += ratio * inv_n;
    out.approx_kl += (batch.old_log_probs[k] - logp) * inv_n;
    if (std::abs(ratio - 1.0) > config.clip) out.clip_fraction += inv_n;

    if (grad == nullptr) continue;
    // d(loss)/d(log pi): the clipped branch is constant in the parameters.
    const double d_logp = (ratio * adv <= clipped * adv) ? -ratio * adv * inv_n : 0.0;
    d_value[k] = 2.0 * config.value_coef * v_err * inv_n;
    if (gaussian) {
      const double diff = a - dist.mean;
      const double t = std::tanh(head[k]);
      d_head[k] = d_logp * (diff / sigma2) * kGaussianScale * (1.0 - t * t);
      d_log_std += d_logp * (diff * diff / sigma2 - 1.0);
      d_log_std += -config.entropy_coef * inv_n;
    } else {
      const double p = dist.switch_probability();
      const double target = a > 0.5 ? 1.0 : 0.0;
      const double d_ent = -head[k] * p * (1.0 - p);
      d_head[k] = d_logp * (target - p) - config.entropy_coef * inv_n * d_ent;
    }
  }
  out.total = out.policy + config.value_coef * out.value -
              config.entropy_coef * out.entropy;
  if (grad != nullptr) {
    *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.num_params()));
    net.backward(cache, d_head, d_value, d_log_std, *grad);
  }
  return out;
}

namespace {

SampleBatch gather(const SampleBatch& batch, std::span<const Eigen::Index> idx) {
  SampleBatch mb;
  const auto m = static_cast<Eigen::Index>(idx.size());
  mb.obs.resize(batch.obs.rows(), m);
  mb.actions.resize(m);
  mb.old_log_probs.resize(m);
  mb.advantages.resize(m);
  mb.returns.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index k = idx[static_cast<std::size_t>(j)];
    mb.obs.col(j) = batch.obs.col(k);
    mb.actions[j] = batch.actions[k];
    mb.old_log_probs[j] = batch.old_log_probs[k];
    mb.advantages[j] = batch.advantages[k];
    mb.returns[j] = batch.returns[k];
  }
  return mb;
}

}  // namespace

UpdateStats ppo_update(ActorCritic& net, Adam& optimizer,
                       const SampleBatch& batch, const PpoConfig& config,
                       std::mt19937_64& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw Error(ErrorCategory::kInvalidArgument, "empty batch");
  UpdateStats stats;
  stats.samples = static_cast<std::size_t>(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t len =
          std::min(order.size() - start, static_cast<std::size_t>(config.minibatch));
      SampleBatch mb = gather(batch, std::span(order).subspan(start, len));
      LossBreakdown loss = ppo_loss(net, mb, config, &grad);
      if (!std::isfinite(loss.total) || !grad.allFinite()) {
        throw Error(ErrorCategory::kNumerical,
                    "non-finite PPO loss (policy " + std::to_string(loss.policy) +
                        ", value " + std::to_string(loss.value) + ")");
      }
      const double norm = grad.norm();
      if (norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
      optimizer.step(net.params(), grad);
      if (stats.minibatches == 0) stats.first = loss;
      stats.last = loss;
      ++stats.minibatches;
    }
  }
  return stats;
}

}  // namespace cotv
