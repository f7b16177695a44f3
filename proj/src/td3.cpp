#include "swarm_pe/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace swarm_pe {

Mlp::Mlp(std::vector<int> sizes, Output output, double out_low,
         double out_high)
    : sizes_(std::move(sizes)),
      output_(output),
      out_low_(out_low),
      out_high_(out_high) {
  if (sizes_.size() < 2) throw ShapeError("Mlp: need at least input and output");
  for (int s : sizes_)
    if (s < 1) throw ShapeError("Mlp: layer sizes must be positive");
  if (output_ == Output::Squash && !(out_high_ > out_low_))
    throw ConfigError("Mlp: squash range is empty");

  Eigen::Index total = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_offset_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
    b_offset_.push_back(total);
    total += sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
}

void Mlp::init_uniform_fanin(Rng& rng) {
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    Eigen::Index count =
        static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
    for (Eigen::Index i = 0; i < count; ++i)
      params_[w_offset_[l] + i] = rng.uniform(-bound, bound);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::Ref<const Eigen::MatrixXd>& input,
                             Cache& cache) const {
  if (input.rows() != sizes_.front())
    throw ShapeError("Mlp::forward: expected " +
                     std::to_string(sizes_.front()) + " input rows, got " +
                     std::to_string(input.rows()));
  size_t layers = sizes_.size() - 1;
  cache.input = input;
  cache.pre.assign(layers, {});
  cache.post.assign(layers, {});

  Eigen::MatrixXd a = input;
  for (size_t l = 0; l < layers; ++l) {
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + w_offset_[l],
                                        sizes_[l + 1], sizes_[l]);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + b_offset_[l],
                                        sizes_[l + 1]);
    cache.pre[l] = (w * a).colwise() + b;
    if (l + 1 < layers) {
      cache.post[l] = cache.pre[l].cwiseMax(0.0);
    } else if (output_ == Output::Identity) {
      cache.post[l] = cache.pre[l];
    } else {
      cache.post[l] = (out_low_ + (out_high_ - out_low_) * 0.5 *
                                      (cache.pre[l].array().tanh() + 1.0))
                          .matrix();
    }
    a = cache.post[l];
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(
    const Eigen::Ref<const Eigen::MatrixXd>& input) const {
  Cache cache;
  return forward(input, cache);
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& input) const {
  Cache cache;
  return forward(Eigen::Ref<const Eigen::MatrixXd>(input), cache).col(0);
}

Mlp::Backprop Mlp::backward(
    const Cache& cache,
    const Eigen::Ref<const Eigen::MatrixXd>& upstream) const {
  size_t layers = sizes_.size() - 1;
  if (upstream.rows() != sizes_.back() ||
      upstream.cols() != cache.input.cols())
    throw ShapeError("Mlp::backward: upstream shape mismatch");

  Backprop bp;
  bp.param_grad = Eigen::VectorXd::Zero(params_.size());

  Eigen::MatrixXd delta;
  if (output_ == Output::Identity) {
    delta = upstream;
  } else {
    Eigen::ArrayXXd th = cache.pre[layers - 1].array().tanh();
    delta = upstream.array() * (out_high_ - out_low_) * 0.5 * (1.0 - th * th);
  }

  for (size_t li = layers; li-- > 0;) {
    const Eigen::MatrixXd& a_prev =
        li == 0 ? cache.input : cache.post[li - 1];
    Eigen::Map<Eigen::MatrixXd> dw(bp.param_grad.data() + w_offset_[li],
                                   sizes_[li + 1], sizes_[li]);
    Eigen::Map<Eigen::VectorXd> db(bp.param_grad.data() + b_offset_[li],
                                   sizes_[li + 1]);
    dw = delta * a_prev.transpose();
    db = delta.rowwise().sum();

    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + w_offset_[li],
                                        sizes_[li + 1], sizes_[li]);
    Eigen::MatrixXd back = w.transpose() * delta;
    if (li == 0) {
      bp.input_grad = back;
    } else {
      delta = back.array() *
              (cache.pre[li - 1].array() > 0.0).cast<double>();
    }
  }
  return bp;
}

Adam::Adam(Eigen::Index n, double lr)
    : lr_(lr), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& params,
                const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ShapeError("Adam::step: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw ConfigError("replay buffer capacity must be >= 1");
  storage_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= storage_.size()) throw DomainError("ReplayBuffer::at: out of range");
  if (storage_.size() < capacity_) return storage_[i];
  return storage_[(head_ + i) % capacity_];
}

ReplayBuffer::Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (batch_size < 1) throw DomainError("sample: batch_size must be >= 1");
  if (storage_.size() < static_cast<std::size_t>(batch_size))
    throw DomainError("sample: buffer smaller than batch");
  Eigen::Index sd = storage_[0].s.size();
  Eigen::Index ad = storage_[0].a.size();
  Batch b;
  b.s.resize(sd, batch_size);
  b.a.resize(ad, batch_size);
  b.s_next.resize(sd, batch_size);
  b.r.resize(batch_size);
  b.d.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const Transition& t = storage_[rng.uniform_index(storage_.size())];
    b.s.col(i) = t.s;
    b.a.col(i) = t.a;
    b.s_next.col(i) = t.s_next;
    b.r[i] = t.r;
    b.d[i] = t.d;
  }
  return b;
}

double Td3Config::expl_sigma() const {
  return sigma_expl >= 0.0 ? sigma_expl : 0.1 * (a_high - a_low);
}

double Td3Config::smooth_sigma() const {
  return sigma_smooth >= 0.0 ? sigma_smooth : 0.2 * (a_high - a_low);
}

double Td3Config::clip_bound() const {
  return noise_clip >= 0.0 ? noise_clip : smooth_sigma();
}

void Td3Config::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("td3.gamma must be in [0, 1)");
  if (rho <= 0.0 || rho >= 1.0) throw ConfigError("td3.rho must be in (0, 1)");
  if (!(a_high > a_low)) throw ConfigError("td3 action range is empty");
  if (!(clip_bound() > 0.0)) throw ConfigError("td3.noise_clip must be > 0");
  if (policy_delay < 1) throw ConfigError("td3.policy_delay must be >= 1");
  if (batch_size < 1) throw ConfigError("td3.batch_size must be >= 1");
  if (warmup_steps < 0) throw ConfigError("td3.warmup_steps must be >= 0");
  if (hidden.empty()) throw ConfigError("td3.hidden must not be empty");
  for (int h : hidden)
    if (h < 1) throw ConfigError("td3.hidden sizes must be positive");
}

Td3Params Td3Params::make(int state_dim, int action_dim, const Td3Config& cfg,
                          Rng& rng) {
  cfg.validate();
  Td3Params p;
  p.state_dim = state_dim;
  p.action_dim = action_dim;

  std::vector<int> actor_sizes{state_dim};
  std::vector<int> critic_sizes{state_dim + action_dim};
  for (int h : cfg.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(action_dim);
  critic_sizes.push_back(1);

  p.actor = Mlp(actor_sizes, Mlp::Output::Squash, cfg.a_low, cfg.a_high);
  p.critic1 = Mlp(critic_sizes, Mlp::Output::Identity);
  p.critic2 = Mlp(critic_sizes, Mlp::Output::Identity);
  p.actor.init_uniform_fanin(rng);
  p.critic1.init_uniform_fanin(rng);
  p.critic2.init_uniform_fanin(rng);

  p.actor_target = p.actor;
  p.critic1_target = p.critic1;
  p.critic2_target = p.critic2;

  p.actor_opt = Adam(p.actor.param_count(), cfg.actor_lr);
  p.critic1_opt = Adam(p.critic1.param_count(), cfg.critic_lr);
  p.critic2_opt = Adam(p.critic2.param_count(), cfg.critic_lr);
  return p;
}

void polyak_update(Eigen::VectorXd& target,
                   const Eigen::Ref<const Eigen::VectorXd>& online,
                   double rho) {
  if (target.size() != online.size())
    throw ShapeError("polyak_update: size mismatch");
  target = rho * target + (1.0 - rho) * online;
}

Eigen::VectorXd smoothed_target_action(
    const Eigen::Ref<const Eigen::VectorXd>& s_next,
    const Eigen::Ref<const Eigen::VectorXd>& eps, const Td3Params& params,
    const Td3Config& cfg) {
  double c = cfg.clip_bound();
  Eigen::VectorXd a = params.actor_target.forward_one(s_next);
  a += eps.cwiseMax(-c).cwiseMin(c);
  return a.cwiseMax(cfg.a_low).cwiseMin(cfg.a_high);
}

double td_target(double r, double d,
                 const Eigen::Ref<const Eigen::VectorXd>& s_next,
                 const Eigen::Ref<const Eigen::VectorXd>& eps,
                 const Td3Params& params, const Td3Config& cfg) {
  if (d != 0.0) return r;  // terminal transitions do not bootstrap
  Eigen::VectorXd a_next = smoothed_target_action(s_next, eps, params, cfg);
  Eigen::VectorXd x(s_next.size() + a_next.size());
  x << s_next, a_next;
  double q1 = params.critic1_target.forward_one(x)[0];
  double q2 = params.critic2_target.forward_one(x)[0];
  return r + cfg.gamma * std::min(q1, q2);
}

namespace {

Eigen::MatrixXd clipped_noise(int rows, int cols, double sigma, double bound,
                              Rng& rng) {
  Eigen::MatrixXd eps(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      eps(i, j) = std::clamp(rng.normal(0.0, sigma), -bound, bound);
  return eps;
}

}  // namespace

double critic_update(const ReplayBuffer::Batch& batch, Td3Params& params,
                     const Td3Config& cfg, Rng& rng) {
  int b = static_cast<int>(batch.s.cols());

  Eigen::MatrixXd a_next = params.actor_target.forward(batch.s_next);
  a_next += clipped_noise(static_cast<int>(a_next.rows()), b,
                          cfg.smooth_sigma(), cfg.clip_bound(), rng);
  a_next = a_next.cwiseMax(cfg.a_low).cwiseMin(cfg.a_high);

  Eigen::MatrixXd x_next(batch.s_next.rows() + a_next.rows(), b);
  x_next << batch.s_next, a_next;
  Eigen::RowVectorXd q1t = params.critic1_target.forward(x_next).row(0);
  Eigen::RowVectorXd q2t = params.critic2_target.forward(x_next).row(0);

  Eigen::VectorXd y(b);
  for (int i = 0; i < b; ++i)
    y[i] = batch.r[i] +
           cfg.gamma * (1.0 - batch.d[i]) * std::min(q1t[i], q2t[i]);

  Eigen::MatrixXd x(batch.s.rows() + batch.a.rows(), b);
  x << batch.s, batch.a;

  double loss_sum = 0.0;
  auto update_one = [&](Mlp& critic, Adam& opt) {
    Mlp::Cache cache;
    Eigen::RowVectorXd q = critic.forward(x, cache).row(0);
    Eigen::RowVectorXd err = q - y.transpose();
    loss_sum += err.squaredNorm() / b;
    Eigen::MatrixXd upstream = (2.0 / b) * err;
    Mlp::Backprop bp = critic.backward(cache, upstream);
    opt.step(critic.params(), bp.param_grad);
  };
  update_one(params.critic1, params.critic1_opt);
  update_one(params.critic2, params.critic2_opt);
  return loss_sum / 2.0;
}

void actor_update(const ReplayBuffer::Batch& batch, Td3Params& params,
                  const Td3Config& cfg) {
  int b = static_cast<int>(batch.s.cols());

  Mlp::Cache actor_cache;
  Eigen::MatrixXd a = params.actor.forward(batch.s, actor_cache);
  Eigen::MatrixXd x(batch.s.rows() + a.rows(), b);
  x << batch.s, a;

  Mlp::Cache critic_cache;
  params.critic1.forward(x, critic_cache);
  // descend on -mean Q1(s, mu(s))
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, b, -1.0 / b);
  Mlp::Backprop critic_bp = params.critic1.backward(critic_cache, upstream);
  Eigen::MatrixXd da = critic_bp.input_grad.bottomRows(a.rows());
  Mlp::Backprop actor_bp = params.actor.backward(actor_cache, da);
  params.actor_opt.step(params.actor.params(), actor_bp.param_grad);

  polyak_update(params.actor_target.params(), params.actor.params(), cfg.rho);
  polyak_update(params.critic1_target.params(), params.critic1.params(),
                cfg.rho);
  polyak_update(params.critic2_target.params(), params.critic2.params(),
                cfg.rho);
}

TrainResult train(Env& env, Td3Params& params, const Td3Config& cfg,
                  std::uint64_t seed, int max_episodes) {
  cfg.validate();
  if (env.obs_dim() != params.state_dim ||
      env.action_dim() != params.action_dim)
    throw ShapeError("train: env dims do not match the networks");

  Rng rng(seed);
  ReplayBuffer buffer(cfg.buffer_capacity);
  TrainResult result;
  long total = 0;
  long rounds = 0;

  for (int ep = 0; ep < max_episodes; ++ep) {
    Eigen::VectorXd obs = env.reset(derive_seed(seed, ep));
    double ep_return = 0.0;
    double loss_sum = 0.0;
    int loss_n = 0;
    int steps = 0;
    bool done = false;
    while (!done) {
      Eigen::VectorXd action(env.action_dim());
      if (total < cfg.warmup_steps) {
        for (int i = 0; i < action.size(); ++i)
          action[i] = rng.uniform(cfg.a_low, cfg.a_high);
      } else {
        action = params.actor.forward_one(obs);
        for (int i = 0; i < action.size(); ++i)
          action[i] = std::clamp(action[i] + rng.normal(0.0, cfg.expl_sigma()),
                                 cfg.a_low, cfg.a_high);
      }
      Env::Step sr = env.step(action);
      buffer.push({obs, action, sr.reward, sr.obs, sr.done ? 1.0 : 0.0});
      obs = sr.obs;
      ep_return += sr.reward;
      ++steps;
      ++total;

      if (total >= cfg.warmup_steps &&
          buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        ReplayBuffer::Batch batch = buffer.sample(cfg.batch_size, rng);
        loss_sum += critic_update(batch, params, cfg, rng);
        ++loss_n;
        ++rounds;
        if (rounds % cfg.policy_delay == 0) actor_update(batch, params, cfg);
      }
      done = sr.done;
    }
    result.log.push_back(
        {ep, steps, ep_return, loss_n > 0 ? loss_sum / loss_n : 0.0});
  }
  result.total_steps = total;
  return result;
}

namespace {

constexpr char kMagic[8] = {'S', 'W', 'P', 'E', 'T', 'D', '3', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  return value;
}

void write_params(std::ofstream& out, const Eigen::VectorXd& v) {
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_params(std::ifstream& in, Eigen::VectorXd& v) {
  auto count = read_pod<std::uint64_t>(in);
  if (count != static_cast<std::uint64_t>(v.size()))
    throw ShapeError("checkpoint: parameter count " + std::to_string(count) +
                     " does not match network size " +
                     std::to_string(v.size()));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw IoError("checkpoint: truncated parameter block");
}

}  // namespace

void save_checkpoint(const std::string& path, const Td3Params& params,
                     const Td3Config& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::int32_t>(out, params.state_dim);
  write_pod<std::int32_t>(out, params.action_dim);
  write_pod<std::int32_t>(out, static_cast<std::int32_t>(cfg.hidden.size()));
  for (int h : cfg.hidden) write_pod<std::int32_t>(out, h);
  write_pod<double>(out, cfg.a_low);
  write_pod<double>(out, cfg.a_high);
  for (const Mlp* net :
       {&params.actor, &params.critic1, &params.critic2, &params.actor_target,
        &params.critic1_target, &params.critic2_target})
    write_params(out, net->params());
  if (!out) throw IoError("checkpoint write failure: " + path);
}

Td3Params load_checkpoint(const std::string& path, const Td3Config& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a td3 checkpoint: " + path);

  auto state_dim = read_pod<std::int32_t>(in);
  auto action_dim = read_pod<std::int32_t>(in);
  auto n_hidden = read_pod<std::int32_t>(in);
  if (n_hidden < 1 || n_hidden > 64)
    throw IoError("checkpoint: implausible hidden layer count");
  std::vector<int> hidden(n_hidden);
  for (int i = 0; i < n_hidden; ++i) hidden[i] = read_pod<std::int32_t>(in);
  double a_low = read_pod<double>(in);
  double a_high = read_pod<double>(in);

  Td3Config file_cfg = cfg;
  file_cfg.hidden = hidden;
  file_cfg.a_low = a_low;
  file_cfg.a_high = a_high;
  Rng dummy(0);
  Td3Params params = Td3Params::make(state_dim, action_dim, file_cfg, dummy);
  for (Mlp* net :
       {&params.actor, &params.critic1, &params.critic2, &params.actor_target,
        &params.critic1_target, &params.critic2_target})
    read_params(in, net->params());
  return params;
}

}  // namespace swarm_pe
