#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qctrl/dynamics.hpp"

namespace qctrl::rl {

using dynamics::DensityMatrix;
using dynamics::PulseSchedule;
using dynamics::SystemParams;

/// Agent observation: (rho_gg, rho_rr, rho_ee, Re rho_ge, Im rho_ge,
/// Re rho_gr, Im rho_gr, Re rho_er, Im rho_er).
using Observation = Eigen::Matrix<double, 9, 1>;

using Action = Eigen::Vector2d;  // (a_S, a_P)

/// MLP policy mean: 9 inputs -> hidden (ReLU) -> 2 outputs (tanh),
/// so mu is always inside [-1, 1]^2.
struct PolicyNetwork {
  std::vector<int> layer_sizes;          // {9, hidden..., 2}
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;

  /// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
  static PolicyNetwork initialized(const std::vector<int>& hidden_sizes,
                                   std::mt19937_64& rng);
  static PolicyNetwork zeros(const std::vector<int>& hidden_sizes);

  long parameter_count() const;
};

/// Gradient container with the network's weight/bias shapes.
struct NetGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static NetGradient zeros_like(const PolicyNetwork& net);
  void add_scaled(const NetGradient& other, double factor);
  double max_abs() const;
};

struct EpisodeTrace {
  std::vector<Observation> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;  // zeros with the terminal rho_rr(T) last
  double final_reward = 0.0;
  std::vector<double> returns;
};

enum class Optimizer { Sgd, Adam };

struct TrainerConfig {
  double sigma = 0.5;
  int batch_size = 200;
  double learning_rate = 0.05;
  int n_steps = 30;
  double discount = 1.0;
  Optimizer optimizer = Optimizer::Sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int max_episodes = 2000;
  std::uint64_t seed = 0;
  std::vector<int> hidden_sizes = {100, 50};
  /// Optional plateau exit: stop once the best reward reaches this value.
  std::optional<double> stop_at_best_reward;

  void validate() const;
};

/// Shipped hyperparameter presets: "reinforce-sgd" (hidden 100/50, sigma 0.5,
/// batch 200, eta 0.05) and "reinforce-adam" (hidden 100/50/30, Adam, batch 2).
TrainerConfig preset_config(std::string_view name);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;

  static AdamState zeros_like(const PolicyNetwork& net);
};

Observation observe(const DensityMatrix& state);

Eigen::Vector2d policy_forward(const PolicyNetwork& net, const Observation& s);

/// Componentwise Normal(mu_i, sigma^2) draw; unbounded.
Action sample_action(const Eigen::Vector2d& mu, double sigma, std::mt19937_64& rng);

/// Logistic control map Omega = omega_0 / (1 + exp(-3 a)); returns
/// (omega_s, omega_p), both in (0, omega_0).
std::pair<double, double> action_to_controls(const Action& a, double omega_0);

/// Log-density of the Gaussian policy at action a.
double log_policy_density(const Eigen::Vector2d& mu, const Action& a, double sigma);

/// One episode from |g><g|: observe, sample, map to controls, propagate one
/// segment of length T / n_steps; terminal reward rho_rr(T).
EpisodeTrace rollout(const PolicyNetwork& net, const TrainerConfig& config,
                     const SystemParams& params, std::mt19937_64& rng);

/// G_t = sum_k Gamma^k R_{t+k+1}.
std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double gamma_discount);

/// Gradient of the surrogate cost sum_j G_j/(2 sigma^2) |a_j - mu(s_j)|^2,
/// summed over the steps of each trace and averaged over the batch.
NetGradient surrogate_gradient(const PolicyNetwork& net,
                               const std::vector<EpisodeTrace>& batch,
                               double sigma);

/// grad_theta log pi(a | s) for a single step (the REINFORCE direction).
NetGradient log_policy_gradient(const PolicyNetwork& net, const Observation& s,
                                const Action& a, double sigma);

/// Applies one descent step on the batch surrogate cost (SGD or Adam) and
/// returns the updated network. adam must be non-null for the Adam optimizer.
PolicyNetwork reinforce_update(const PolicyNetwork& net,
                               const std::vector<EpisodeTrace>& batch,
                               const TrainerConfig& config,
                               AdamState* adam = nullptr);

struct BestPulses {
  std::vector<Action> actions;
  double reward = -1.0;
  int episode = -1;
  int agent = -1;

  PulseSchedule to_schedule(const SystemParams& params, int n_steps) const;
};

struct LearningCurvePoint {
  int episode = 0;
  double mean_reward = 0.0;
  double best_reward = 0.0;
};

struct TrainResult {
  PolicyNetwork net;
  BestPulses best;
  std::vector<LearningCurvePoint> curve;
};

/// Batched REINFORCE training loop. Rollouts inside a batch draw from
/// per-(episode, agent) RNG streams and may run in parallel; updates are
/// accumulated in agent order, so results depend only on the seed.
TrainResult train(const TrainerConfig& config, const SystemParams& params);

}  // namespace qctrl::rl
