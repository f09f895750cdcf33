#ifndef COTV_RL_ACTOR_CRITIC_HPP_
#define COTV_RL_ACTOR_CRITIC_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace cotv {

enum class ActionHead {
  kBernoulli,  // keep (0) / switch (1)
  kGaussian,   // acceleration, mean squashed to +-kGaussianScale
};

inline constexpr double kGaussianScale = 3.0;  // m/s^2

std::string_view to_string(ActionHead head);

// The distribution one forward pass produces for one observation.
struct ActionDistribution {
  ActionHead head = ActionHead::kBernoulli;
  double logit = 0.0;    // Bernoulli
  double mean = 0.0;     // Gaussian, already squashed
  double log_std = 0.0;  // Gaussian

  double log_prob(double action) const;
  double entropy() const;
  // Most likely action: switch iff p(switch) > 0.5, or the Gaussian mean.
  double mode() const;
  double sample(std::mt19937_64& rng) const;
  double switch_probability() const;
};

struct PolicyOutput {
  ActionDistribution dist;
  double value = 0.0;
};

// Shared-trunk MLP: obs -> hidden -> hidden (tanh) -> {policy head, value
// head}. All parameters live in one flat vector in the order
// W1, b1, W2, b2, Wp, bp, Wv, bv[, log_std]; matrices are column-major.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(int obs_dim, ActionHead head, std::uint64_t seed,
              int hidden = 64);

  int obs_dim() const { return obs_dim_; }
  int hidden() const { return hidden_; }
  ActionHead head() const { return head_; }
  bool empty() const { return obs_dim_ == 0; }

  PolicyOutput forward(std::span<const double> obs) const;

  // Batched pass over the columns of `obs`. Stores activations in `cache`
  // when given, for use by `backward`.
  struct Cache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd h1;
    Eigen::MatrixXd h2;
  };
  void forward_batch(const Eigen::MatrixXd& obs, Eigen::VectorXd& head_out,
                     Eigen::VectorXd& value_out, Cache* cache = nullptr) const;

  // Accumulates parameter gradients given loss derivatives w.r.t. the raw
  // policy head output, the value output and log_std.
  void backward(const Cache& cache, const Eigen::VectorXd& d_head,
                const Eigen::VectorXd& d_value, double d_log_std,
                Eigen::VectorXd& grad) const;

  double log_std() const;

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  // FNV-1a over the raw parameter bytes.
  std::uint64_t fingerprint() const;

  static std::size_t param_count(int obs_dim, int hidden, ActionHead head);

 private:
  struct Offsets {
    Eigen::Index w1, b1, w2, b2, wp, bp, wv, bv, log_std;
  };
  Offsets offsets() const;
  ActionDistribution distribution(double raw_head) const;

  int obs_dim_ = 0;
  int hidden_ = 0;
  ActionHead head_ = ActionHead::kBernoulli;
  Eigen::VectorXd params_;
};

// Gaussian mean from the raw head output.
inline double squash_mean(double raw) { return kGaussianScale * std::tanh(raw); }

}  // namespace cotv

#endif  // COTV_RL_ACTOR_CRITIC_HPP_
