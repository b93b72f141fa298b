#include "qctrl/rl.hpp"

#include <cmath>
#include <numbers>

#include "qctrl/parallel.hpp"
#include "qctrl/rng.hpp"

namespace qctrl::rl {

namespace {

std::vector<int> full_sizes(const std::vector<int>& hidden_sizes) {
  std::vector<int> sizes;
  sizes.reserve(hidden_sizes.size() + 2);
  sizes.push_back(9);
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("PolicyNetwork: hidden sizes must be >= 1");
    sizes.push_back(h);
  }
  sizes.push_back(2);
  return sizes;
}

// Forward pass keeping pre-activations and activations for backprop.
struct ForwardCache {
  std::vector<Eigen::VectorXd> activations;  // a_0 = input, ..., a_L = mu
  std::vector<Eigen::VectorXd> pre;          // z_1 ... z_L
};

ForwardCache forward_cached(const PolicyNetwork& net, const Observation& s) {
  ForwardCache cache;
  const std::size_t layers = net.weights.size();
  cache.activations.reserve(layers + 1);
  cache.pre.reserve(layers);
  cache.activations.push_back(s);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = net.weights[l] * cache.activations.back() + net.biases[l];
    cache.pre.push_back(z);
    if (l + 1 == layers)
      cache.activations.push_back(z.array().tanh().matrix());
    else
      cache.activations.push_back(z.cwiseMax(0.0));
  }
  return cache;
}

// Backpropagates dC/dmu through the network, accumulating into grad.
void backprop_into(const PolicyNetwork& net, const ForwardCache& cache,
                   const Eigen::Vector2d& dmu, NetGradient& grad) {
  const int layers = static_cast<int>(net.weights.size());
  // tanh output layer
  Eigen::VectorXd delta =
      (dmu.array() * (1.0 - cache.activations.back().array().square())).matrix();
  for (int l = layers - 1; l >= 0; --l) {
    grad.weights[l].noalias() += delta * cache.activations[l].transpose();
    grad.biases[l] += delta;
    if (l > 0) {
      const Eigen::VectorXd upstream = net.weights[l].transpose() * delta;
      delta = (cache.pre[l - 1].array() > 0.0)
                  .select(upstream.array(), 0.0)
                  .matrix();
    }
  }
}

}  // namespace

PolicyNetwork PolicyNetwork::zeros(const std::vector<int>& hidden_sizes) {
  PolicyNetwork net;
  net.layer_sizes = full_sizes(hidden_sizes);
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    net.weights.emplace_back(
        Eigen::MatrixXd::Zero(net.layer_sizes[l + 1], net.layer_sizes[l]));
    net.biases.emplace_back(Eigen::VectorXd::Zero(net.layer_sizes[l + 1]));
  }
  return net;
}

PolicyNetwork PolicyNetwork::initialized(const std::vector<int>& hidden_sizes,
                                         std::mt19937_64& rng) {
  PolicyNetwork net = zeros(hidden_sizes);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const double fan_in = static_cast<double>(net.layer_sizes[l]);
    const double fan_out = static_cast<double>(net.layer_sizes[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j)
      for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i)
        net.weights[l](i, j) = uniform(rng);
  }
  return net;
}

long PolicyNetwork::parameter_count() const {
  long count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    count += weights[l].size() + biases[l].size();
  return count;
}

NetGradient NetGradient::zeros_like(const PolicyNetwork& net) {
  NetGradient g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.emplace_back(
        Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

void NetGradient::add_scaled(const NetGradient& other, double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += factor * other.weights[l];
    biases[l] += factor * other.biases[l];
  }
}

double NetGradient::max_abs() const {
  double m = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    m = std::max(m, weights[l].cwiseAbs().maxCoeff());
    if (biases[l].size() > 0) m = std::max(m, biases[l].cwiseAbs().maxCoeff());
  }
  return m;
}

void TrainerConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("TrainerConfig: sigma must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainerConfig: batch_size must be >= 1");
  if (n_steps < 1) throw std::invalid_argument("TrainerConfig: n_steps must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0))
    throw std::invalid_argument("TrainerConfig: discount must be in [0, 1]");
  if (max_episodes < 0) throw std::invalid_argument("TrainerConfig: max_episodes must be >= 0");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("TrainerConfig: learning_rate must be > 0");
}

TrainerConfig preset_config(std::string_view name) {
  TrainerConfig cfg;
  if (name == "reinforce-sgd") {
    cfg.hidden_sizes = {100, 50};
    cfg.sigma = 0.5;
    cfg.batch_size = 200;
    cfg.learning_rate = 0.05;
    cfg.optimizer = Optimizer::Sgd;
  } else if (name == "reinforce-adam") {
    cfg.hidden_sizes = {100, 50, 30};
    cfg.sigma = 0.5;
    cfg.batch_size = 2;
    cfg.learning_rate = 0.001;
    cfg.optimizer = Optimizer::Adam;
  } else {
    throw std::invalid_argument("unknown preset: " + std::string(name));
  }
  return cfg;
}

AdamState AdamState::zeros_like(const PolicyNetwork& net) {
  AdamState st;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    st.m_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    st.v_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    st.m_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    st.v_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return st;
}

Observation observe(const DensityMatrix& state) {
  using namespace dynamics;
  Observation s;
  s << state(kG, kG).real(), state(kR, kR).real(), state(kE, kE).real(),
      state(kG, kE).real(), state(kG, kE).imag(),
      state(kG, kR).real(), state(kG, kR).imag(),
      state(kE, kR).real(), state(kE, kR).imag();
  return s;
}

Eigen::Vector2d policy_forward(const PolicyNetwork& net, const Observation& s) {
  Eigen::VectorXd a = s;
  const std::size_t layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = net.weights[l] * a + net.biases[l];
    if (l + 1 == layers)
      a = z.array().tanh().matrix();
    else
      a = z.cwiseMax(0.0);
  }
  return a;
}

Action sample_action(const Eigen::Vector2d& mu, double sigma, std::mt19937_64& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sample_action: sigma must be > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Action a;
  a[0] = mu[0] + sigma * normal(rng);
  a[1] = mu[1] + sigma * normal(rng);
  return a;
}

std::pair<double, double> action_to_controls(const Action& a, double omega_0) {
  if (!(omega_0 > 0.0)) throw std::invalid_argument("action_to_controls: omega_0 must be > 0");
  const double omega_s = omega_0 / (1.0 + std::exp(-3.0 * a[0]));
  const double omega_p = omega_0 / (1.0 + std::exp(-3.0 * a[1]));
  return {omega_s, omega_p};
}

double log_policy_density(const Eigen::Vector2d& mu, const Action& a, double sigma) {
  const double r2 = (a - mu).squaredNorm();
  return -r2 / (2.0 * sigma * sigma) -
         std::log(2.0 * std::numbers::pi * sigma * sigma);
}

EpisodeTrace rollout(const PolicyNetwork& net, const TrainerConfig& config,
                     const SystemParams& params, std::mt19937_64& rng) {
  config.validate();
  params.validate();
  EpisodeTrace trace;
  trace.observations.reserve(config.n_steps);
  trace.actions.reserve(config.n_steps);
  const double dt = params.t_final / config.n_steps;
  DensityMatrix rho = dynamics::pure_state(dynamics::kG);
  for (int j = 0; j < config.n_steps; ++j) {
    const Observation s = observe(rho);
    const Eigen::Vector2d mu = policy_forward(net, s);
    const Action a = sample_action(mu, config.sigma, rng);
    const auto [omega_s, omega_p] = action_to_controls(a, params.omega_max);
    const auto gen = dynamics::assemble_liouvillian(params, omega_p, omega_s);
    rho = dynamics::propagate_segment(rho, gen, dt);
    trace.observations.push_back(s);
    trace.actions.push_back(a);
  }
  trace.final_reward = dynamics::fidelity(rho);
  trace.rewards.assign(config.n_steps, 0.0);
  trace.rewards.back() = trace.final_reward;
  trace.returns = compute_returns(trace.rewards, config.discount);
  return trace;
}

std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double gamma_discount) {
  std::vector<double> returns(rewards.size(), 0.0);
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[t] + gamma_discount * acc;
    returns[t] = acc;
  }
  return returns;
}

NetGradient surrogate_gradient(const PolicyNetwork& net,
                               const std::vector<EpisodeTrace>& batch,
                               double sigma) {
  if (batch.empty()) throw std::invalid_argument("surrogate_gradient: empty batch");
  NetGradient grad = NetGradient::zeros_like(net);
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  for (const EpisodeTrace& trace : batch) {
    for (std::size_t j = 0; j < trace.observations.size(); ++j) {
      const ForwardCache cache = forward_cached(net, trace.observations[j]);
      const Eigen::Vector2d mu = cache.activations.back();
      // dC_j/dmu = G_j / sigma^2 (mu - a_j)
      const Eigen::Vector2d dmu =
          trace.returns[j] * inv_sigma2 * (mu - trace.actions[j]);
      backprop_into(net, cache, dmu, grad);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    grad.weights[l] *= scale;
    grad.biases[l] *= scale;
  }
  return grad;
}

NetGradient log_policy_gradient(const PolicyNetwork& net, const Observation& s,
                                const Action& a, double sigma) {
  NetGradient grad = NetGradient::zeros_like(net);
  const ForwardCache cache = forward_cached(net, s);
  const Eigen::Vector2d mu = cache.activations.back();
  // d log pi / d mu = (a - mu) / sigma^2
  const Eigen::Vector2d dmu = (a - mu) / (sigma * sigma);
  backprop_into(net, cache, dmu, grad);
  return grad;
}

PolicyNetwork reinforce_update(const PolicyNetwork& net,
                               const std::vector<EpisodeTrace>& batch,
                               const TrainerConfig& config, AdamState* adam) {
  if (batch.empty()) throw std::invalid_argument("reinforce_update: empty batch");
  const NetGradient grad = surrogate_gradient(net, batch, config.sigma);
  PolicyNetwork updated = net;
  if (config.optimizer == Optimizer::Sgd) {
    for (std::size_t l = 0; l < updated.weights.size(); ++l) {
      updated.weights[l] -= config.learning_rate * grad.weights[l];
      updated.biases[l] -= config.learning_rate * grad.biases[l];
    }
    return updated;
  }
  if (adam == nullptr)
    throw std::invalid_argument("reinforce_update: Adam optimizer needs an AdamState");
  adam->step += 1;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam->step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam->step));
  for (std::size_t l = 0; l < updated.weights.size(); ++l) {
    adam->m_w[l] = b1 * adam->m_w[l] + (1.0 - b1) * grad.weights[l];
    adam->v_w[l] = b2 * adam->v_w[l] + (1.0 - b2) * grad.weights[l].cwiseAbs2();
    adam->m_b[l] = b1 * adam->m_b[l] + (1.0 - b1) * grad.biases[l];
    adam->v_b[l] = b2 * adam->v_b[l] + (1.0 - b2) * grad.biases[l].cwiseAbs2();
    updated.weights[l] -=
        config.learning_rate *
        ((adam->m_w[l] / bc1).array() / ((adam->v_w[l] / bc2).array().sqrt() + config.adam_epsilon))
            .matrix();
    updated.biases[l] -=
        config.learning_rate *
        ((adam->m_b[l] / bc1).array() / ((adam->v_b[l] / bc2).array().sqrt() + config.adam_epsilon))
            .matrix();
  }
  return updated;
}

PulseSchedule BestPulses::to_schedule(const SystemParams& params, int n_steps) const {
  if (static_cast<int>(actions.size()) != n_steps)
    throw std::invalid_argument("BestPulses: action count != n_steps");
  std::vector<double> pump(n_steps), stokes(n_steps);
  for (int j = 0; j < n_steps; ++j) {
    const auto [omega_s, omega_p] = action_to_controls(actions[j], params.omega_max);
    pump[j] = omega_p;
    stokes[j] = omega_s;
  }
  return PulseSchedule::piecewise_constant(std::move(pump), std::move(stokes),
                                           params.t_final);
}

TrainResult train(const TrainerConfig& config, const SystemParams& params) {
  config.validate();
  params.validate();
  auto init_rng = derive_stream(config.seed, {0x11ull});
  TrainResult result;
  result.net = PolicyNetwork::initialized(config.hidden_sizes, init_rng);
  AdamState adam = AdamState::zeros_like(result.net);

  std::vector<EpisodeTrace> batch(config.batch_size);
  for (int episode = 0; episode < config.max_episodes; ++episode) {
    parallel_for_indexed(config.batch_size, [&](int agent) {
      auto rng = derive_stream(config.seed,
                               {0x22ull, static_cast<std::uint64_t>(episode),
                                static_cast<std::uint64_t>(agent)});
      batch[agent] = rollout(result.net, config, params, rng);
    });

    double mean_reward = 0.0;
    for (int agent = 0; agent < config.batch_size; ++agent) {
      const double r = batch[agent].final_reward;
      mean_reward += r;
      if (r > result.best.reward) {
        result.best.reward = r;
        result.best.actions = batch[agent].actions;
        result.best.episode = episode;
        result.best.agent = agent;
      }
    }
    mean_reward /= static_cast<double>(config.batch_size);
    result.curve.push_back({episode, mean_reward, result.best.reward});

    result.net = reinforce_update(result.net, batch, config,
                                  config.optimizer == Optimizer::Adam ? &adam : nullptr);

    if (config.stop_at_best_reward && result.best.reward >= *config.stop_at_best_reward)
      break;
  }
  return result;
}

}  // namespace qctrl::rl
