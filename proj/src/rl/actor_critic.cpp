#include "cotv/rl/actor_critic.hpp"

#include <cstring>
#include <numbers>

#include "cotv/error.hpp"

namespace cotv {

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

std::string_view to_string(ActionHead head) {
  return head == ActionHead::kBernoulli ? "bernoulli" : "gaussian";
}

double ActionDistribution::log_prob(double action) const {
  if (head == ActionHead::kBernoulli) {
    // log sigmoid(z) = -softplus(-z)
    return action > 0.5 ? -softplus(-logit) : -softplus(logit);
  }
  const double z = (action - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - kLogSqrt2Pi;
}

double ActionDistribution::entropy() const {
  if (head == ActionHead::kBernoulli) {
    const double p = sigmoid(logit);
    return p * softplus(-logit) + (1.0 - p) * softplus(logit);
  }
  return log_std + 0.5 + kLogSqrt2Pi;
}

double ActionDistribution::mode() const {
  if (head == ActionHead::kBernoulli) return logit > 0.0 ? 1.0 : 0.0;
  return mean;
}

double ActionDistribution::sample(std::mt19937_64& rng) const {
  if (head == ActionHead::kBernoulli) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < sigmoid(logit) ? 1.0 : 0.0;
  }
  std::normal_distribution<double> n(0.0, 1.0);
  return mean + std::exp(log_std) * n(rng);
}

double ActionDistribution::switch_probability() const {
  return sigmoid(logit);
}

std::size_t ActorCritic::param_count(int obs_dim, int hidden,
                                     ActionHead head) {
  const auto d = static_cast<std::size_t>(obs_dim);
  const auto h = static_cast<std::size_t>(hidden);
  return h * d + h + h * h + h + (h + 1) * 2 +
         (head == ActionHead::kGaussian ? 1 : 0);
}

ActorCritic::ActorCritic(int obs_dim, ActionHead head, std::uint64_t seed,
                         int hidden)
    : obs_dim_(obs_dim), hidden_(hidden), head_(head) {
  if (obs_dim <= 0 || hidden <= 0) {
    throw Error(ErrorCategory::kInvalidArgument,
                "network dimensions must be positive");
  }
  params_ = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(param_count(obs_dim, hidden, head)));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Offsets o = offsets();
  auto fill = [&](Eigen::Index start, Eigen::Index count, double scale) {
    for (Eigen::Index i = 0; i < count; ++i) {
      params_[start + i] = scale * normal(rng);
    }
  };
  fill(o.w1, hidden * obs_dim, 1.0 / std::sqrt(obs_dim));
  fill(o.w2, hidden * hidden, 1.0 / std::sqrt(hidden));
  fill(o.wp, hidden, 0.01 / std::sqrt(hidden));
  fill(o.wv, hidden, 1.0 / std::sqrt(hidden));
  if (head == ActionHead::kGaussian) {
    params_[o.log_std] = std::log(0.5 * kGaussianScale);
  }
}

ActorCritic::Offsets ActorCritic::offsets() const {
  Offsets o{};
  const Eigen::Index d = obs_dim_;
  const Eigen::Index h = hidden_;
  o.w1 = 0;
  o.b1 = o.w1 + h * d;
  o.w2 = o.b1 + h;
  o.b2 = o.w2 + h * h;
  o.wp = o.b2 + h;
  o.bp = o.wp + h;
  o.wv = o.bp + 1;
  o.bv = o.wv + h;
  o.log_std = o.bv + 1;
  return o;
}

double ActorCritic::log_std() const {
  return head_ == ActionHead::kGaussian ? params_[offsets().log_std] : 0.0;
}

ActionDistribution ActorCritic::distribution(double raw_head) const {
  ActionDistribution d;
  d.head = head_;
  if (head_ == ActionHead::kBernoulli) {
    d.logit = raw_head;
  } else {
    d.mean = squash_mean(raw_head);
    d.log_std = log_std();
  }
  return d;
}

PolicyOutput ActorCritic::forward(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != obs_dim_) {
    throw Error(ErrorCategory::kShapeMismatch,
                "observation has " + std::to_string(obs.size()) +
                    " entries, network expects " + std::to_string(obs_dim_));
  }
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(
      obs.data(), static_cast<Eigen::Index>(obs.size()));
  Eigen::VectorXd head, value;
  forward_batch(x, head, value);
  return PolicyOutput{distribution(head[0]), value[0]};
}

void ActorCritic::forward_batch(const Eigen::MatrixXd& obs,
                                Eigen::VectorXd& head_out,
                                Eigen::VectorXd& value_out,
                                Cache* cache) const {
  if (obs.rows() != obs_dim_) {
    throw Error(ErrorCategory::kShapeMismatch,
                "observation batch has wrong row count");
  }
  const Offsets o = offsets();
  const Eigen::Index d = obs_dim_;
  const Eigen::Index h = hidden_;
  Eigen::Map<const Eigen::MatrixXd> w1(params_.data() + o.w1, h, d);
  Eigen::Map<const Eigen::VectorXd> b1(params_.data() + o.b1, h);
  Eigen::Map<const Eigen::MatrixXd> w2(params_.data() + o.w2, h, h);
  Eigen::Map<const Eigen::VectorXd> b2(params_.data() + o.b2, h);
  Eigen::Map<const Eigen::RowVectorXd> wp(params_.data() + o.wp, h);
  Eigen::Map<const Eigen::RowVectorXd> wv(params_.data() + o.wv, h);

  Eigen::MatrixXd h1 = ((w1 * obs).colwise() + b1).array().tanh().matrix();
  Eigen::MatrixXd h2 = ((w2 * h1).colwise() + b2).array().tanh().matrix();
  head_out = (wp * h2).transpose().array() + params_[o.bp];
  value_out = (wv * h2).transpose().array() + params_[o.bv];
  if (cache != nullptr) {
    cache->input = obs;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
  }
}

void ActorCritic::backward(const Cache& cache, const Eigen::VectorXd& d_head,
                           const Eigen::VectorXd& d_value, double d_log_std,
                           Eigen::VectorXd& grad) const {
  const Offsets o = offsets();
  const Eigen::Index d = obs_dim_;
  const Eigen::Index h = hidden_;
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::Map<const Eigen::MatrixXd> w2(params_.data() + o.w2, h, h);
  Eigen::Map<const Eigen::RowVectorXd> wp(params_.data() + o.wp, h);
  Eigen::Map<const Eigen::RowVectorXd> wv(params_.data() + o.wv, h);

  Eigen::Map<Eigen::MatrixXd> g_w1(grad.data() + o.w1, h, d);
  Eigen::Map<Eigen::VectorXd> g_b1(grad.data() + o.b1, h);
  Eigen::Map<Eigen::MatrixXd> g_w2(grad.data() + o.w2, h, h);
  Eigen::Map<Eigen::VectorXd> g_b2(grad.data() + o.b2, h);
  Eigen::Map<Eigen::RowVectorXd> g_wp(grad.data() + o.wp, h);
  Eigen::Map<Eigen::RowVectorXd> g_wv(grad.data() + o.wv, h);

  g_wp += d_head.transpose() * cache.h2.transpose();
  grad[o.bp] += d_head.sum();
  g_wv += d_value.transpose() * cache.h2.transpose();
  grad[o.bv] += d_value.sum();

  Eigen::MatrixXd dz2 = (wp.transpose() * d_head.transpose() +
                         wv.transpose() * d_value.transpose())
                            .cwiseProduct((1.0 - cache.h2.array().square()).matrix());
  g_w2 += dz2 * cache.h1.transpose();
  g_b2 += dz2.rowwise().sum();
  Eigen::MatrixXd dz1 = (w2.transpose() * dz2)
                            .cwiseProduct((1.0 - cache.h1.array().square()).matrix());
  g_w1 += dz1 * cache.input.transpose();
  g_b1 += dz1.rowwise().sum();
  if (head_ == ActionHead::kGaussian) grad[o.log_std] += d_log_std;
}

std::uint64_t ActorCritic::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(params_.data());
  const std::size_t n = static_cast<std::size_t>(params_.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace cotv
