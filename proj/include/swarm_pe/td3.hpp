#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "swarm_pe/common.hpp"
#include "swarm_pe/env.hpp"
#include "swarm_pe/rng.hpp"

namespace swarm_pe {

// Fully connected network with rectifier hidden units and parameters held in
// one flat vector (weights column-major, then biases, per layer). The flat
// layout makes polyak blending, optimizer state and checkpoints trivial.
class Mlp {
 public:
  enum class Output { Identity, Squash };

  Mlp() = default;
  Mlp(std::vector<int> sizes, Output output, double out_low = 0.0,
      double out_high = 1.0);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::Index param_count() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, layer order.
  void init_uniform_fanin(Rng& rng);

  // Columns are samples.
  Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& input) const;
  // Single-sample convenience.
  Eigen::VectorXd forward_one(const Eigen::VectorXd& input) const;

  struct Cache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;   // affine outputs per layer
    std::vector<Eigen::MatrixXd> post;  // activations per layer
  };
  Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& input,
                          Cache& cache) const;

  struct Backprop {
    Eigen::VectorXd param_grad;  // summed over the batch, flat layout
    Eigen::MatrixXd input_grad;
  };
  // Exact reverse-mode gradients for upstream = dL/d(output).
  Backprop backward(const Cache& cache,
                    const Eigen::Ref<const Eigen::MatrixXd>& upstream) const;

 private:
  std::vector<int> sizes_;
  Output output_ = Output::Identity;
  double out_low_ = 0.0, out_high_ = 1.0;
  Eigen::VectorXd params_;
  std::vector<Eigen::Index> w_offset_, b_offset_;

  friend struct MlpLayout;
};

// Adaptive per-parameter moment estimation with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, double lr);

  void step(Eigen::VectorXd& params,
            const Eigen::Ref<const Eigen::VectorXd>& grad);

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  double d = 0.0;  // 1 on terminal transitions
};

// FIFO ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i-th transition in insertion order, oldest first.
  const Transition& at(std::size_t i) const;

  struct Batch {
    Eigen::MatrixXd s, a, s_next;  // columns are samples
    Eigen::VectorXd r, d;
  };
  Batch sample(int batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot once full
  std::vector<Transition> storage_;
};

struct Td3Config {
  double gamma = 0.99;
  double rho = 0.995;
  double a_low = 0.0;
  double a_high = 1.0;
  // negative means "derive from the action range"
  double sigma_expl = -1.0;    // default 0.1 * range
  double sigma_smooth = -1.0;  // default 0.2 * range
  double noise_clip = -1.0;    // default 0.5 * sigma_smooth * 2
  int policy_delay = 2;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int warmup_steps = 500;
  std::vector<int> hidden = {400, 300};

  double expl_sigma() const;
  double smooth_sigma() const;
  double clip_bound() const;
  void validate() const;
};

struct Td3Params {
  Mlp actor, critic1, critic2;
  Mlp actor_target, critic1_target, critic2_target;
  Adam actor_opt, critic1_opt, critic2_opt;
  int state_dim = 0, action_dim = 0;

  // Online nets initialized from rng; targets start as bit-exact copies.
  static Td3Params make(int state_dim, int action_dim, const Td3Config& cfg,
                        Rng& rng);
};

// target <- rho * target + (1 - rho) * online
void polyak_update(Eigen::VectorXd& target,
                   const Eigen::Ref<const Eigen::VectorXd>& online,
                   double rho);

// clip(mu_target(s') + clip(eps, -c, c), a_low, a_high)
Eigen::VectorXd smoothed_target_action(
    const Eigen::Ref<const Eigen::VectorXd>& s_next,
    const Eigen::Ref<const Eigen::VectorXd>& eps, const Td3Params& params,
    const Td3Config& cfg);

// y = r + gamma * (1 - d) * min_i Q_target_i(s', a'(s'))
double td_target(double r, double d,
                 const Eigen::Ref<const Eigen::VectorXd>& s_next,
                 const Eigen::Ref<const Eigen::VectorXd>& eps,
                 const Td3Params& params, const Td3Config& cfg);

// One optimizer step on both critics against smoothed twin-min targets.
// Runs every update round. Returns the mean squared TD error (both critics
// averaged) before the step.
double critic_update(const ReplayBuffer::Batch& batch, Td3Params& params,
                     const Td3Config& cfg, Rng& rng);

// One ascent step on mean Q1(s, mu(s)) followed by polyak updates of all
// three targets. Call every policy_delay rounds.
void actor_update(const ReplayBuffer::Batch& batch, Td3Params& params,
                  const Td3Config& cfg);

struct EpisodeLogRow {
  int episode = 0;
  int steps = 0;
  double episode_return = 0.0;
  double critic_loss_mean = 0.0;
};

struct TrainResult {
  std::vector<EpisodeLogRow> log;
  long total_steps = 0;
};

// Exploration, storage and update rounds interleaved per step, one update
// round per environment step once the warmup finished. Deterministic in
// (env, cfg, seed).
TrainResult train(Env& env, Td3Params& params, const Td3Config& cfg,
                  std::uint64_t seed, int max_episodes);

// Flat binary checkpoint: layer-size header plus the six parameter vectors.
void save_checkpoint(const std::string& path, const Td3Params& params,
                     const Td3Config& cfg);
Td3Params load_checkpoint(const std::string& path, const Td3Config& cfg);

}  // namespace swarm_pe
