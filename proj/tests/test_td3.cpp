#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "swarm_pe/td3.hpp"

using namespace swarm_pe;

namespace {

// 1-state continuous bandit: reward = -(a - optimum)^2, one step per episode.
class BanditEnv : public Env {
 public:
  explicit BanditEnv(double optimum) : optimum_(optimum) {}
  int obs_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  Eigen::VectorXd reset(std::uint64_t) override {
    return Eigen::VectorXd::Zero(1);
  }
  Step step(const Eigen::Ref<const Eigen::VectorXd>& a) override {
    double r = -(a[0] - optimum_) * (a[0] - optimum_);
    return {Eigen::VectorXd::Zero(1), r, true};
  }

 private:
  double optimum_;
};

// Wraps another env and asserts every action stays inside [lo, hi].
class RangeCheckEnv : public Env {
 public:
  RangeCheckEnv(Env& inner, double lo, double hi)
      : inner_(inner), lo_(lo), hi_(hi) {}
  int obs_dim() const override { return inner_.obs_dim(); }
  int action_dim() const override { return inner_.action_dim(); }
  Eigen::VectorXd reset(std::uint64_t seed) override {
    return inner_.reset(seed);
  }
  Step step(const Eigen::Ref<const Eigen::VectorXd>& a) override {
    min_seen = std::min(min_seen, a.minCoeff());
    max_seen = std::max(max_seen, a.maxCoeff());
    return inner_.step(a);
  }
  double min_seen = 1e300, max_seen = -1e300;

 private:
  Env& inner_;
  double lo_, hi_;
};

// Central finite differences of L = sum(u .* f(x)) with respect to every
// parameter and to the input.
struct FdCheck {
  double max_param_err = 0.0;
  double max_input_err = 0.0;
};

FdCheck fd_gradcheck(Mlp& net, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, double h = 1e-5) {
  Mlp::Cache cache;
  net.forward(Eigen::Ref<const Eigen::MatrixXd>(x), cache);
  Mlp::Backprop bp =
      net.backward(cache, Eigen::Ref<const Eigen::MatrixXd>(u));

  auto loss = [&](const Eigen::VectorXd& input) {
    return u.dot(net.forward_one(input));
  };

  FdCheck out;
  Eigen::VectorXd& p = net.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double keep = p[i];
    p[i] = keep + h;
    double lp = loss(x);
    p[i] = keep - h;
    double lm = loss(x);
    p[i] = keep;
    double fd = (lp - lm) / (2 * h);
    double err = std::abs(bp.param_grad[i] - fd) / std::max(1e-4, std::abs(fd));
    out.max_param_err = std::max(out.max_param_err, err);
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fd = (loss(xp) - loss(xm)) / (2 * h);
    double err =
        std::abs(bp.input_grad(i, 0) - fd) / std::max(1e-4, std::abs(fd));
    out.max_input_err = std::max(out.max_input_err, err);
  }
  return out;
}

// Rejects inputs that park a rectifier pre-activation on its kink, where
// finite differences are meaningless.
Eigen::VectorXd safe_input(Mlp& net, int dim, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.uniform(-1.0, 1.0);
    Mlp::Cache cache;
    net.forward(Eigen::Ref<const Eigen::MatrixXd>(x), cache);
    double closest = 1e300;
    for (size_t l = 0; l + 1 < cache.pre.size(); ++l)
      closest = std::min(closest, cache.pre[l].array().abs().minCoeff());
    if (closest > 1e-3) return x;
  }
  FAIL("could not find a kink-free input");
  return Eigen::VectorXd::Zero(dim);
}

Td3Config small_cfg() {
  Td3Config cfg;
  cfg.hidden = {32, 32};
  cfg.warmup_steps = 64;
  return cfg;
}

}  // namespace

TEST_CASE("zero network maps everything to zero or the squash midpoint") {
  Mlp critic({3, 8, 2}, Mlp::Output::Identity);
  Eigen::VectorXd y = critic.forward_one(Eigen::VectorXd::Ones(3));
  CHECK(y.norm() == 0.0);

  Mlp actor({3, 8, 2}, Mlp::Output::Squash, 0.0, 1.0);
  Eigen::VectorXd a = actor.forward_one(Eigen::VectorXd::Ones(3));
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[1] == doctest::Approx(0.5));

  Mlp wide({3, 8, 2}, Mlp::Output::Squash, -2.0, 4.0);
  CHECK(wide.forward_one(Eigen::VectorXd::Zero(3))[0] == doctest::Approx(1.0));
}

TEST_CASE("finite inputs give finite outputs") {
  Rng rng(1);
  Mlp net({5, 16, 16, 3}, Mlp::Output::Squash, 0.0, 1.0);
  net.init_uniform_fanin(rng);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = rng.uniform(-100.0, 100.0);
    CHECK(net.forward_one(x).allFinite());
  }
  CHECK_THROWS_AS(net.forward_one(Eigen::VectorXd::Zero(4)), ShapeError);
}

TEST_CASE("backprop matches finite differences on a 4-8-6-2 net") {
  Rng rng(2024);
  for (auto output : {Mlp::Output::Identity, Mlp::Output::Squash}) {
    Mlp net({4, 8, 6, 2}, output, 0.0, 1.0);
    net.init_uniform_fanin(rng);
    Eigen::VectorXd x = safe_input(net, 4, rng);
    Eigen::VectorXd u(2);
    u << rng.uniform(-1, 1), rng.uniform(-1, 1);
    FdCheck check = fd_gradcheck(net, x, u);
    CHECK(check.max_param_err < 1e-4);
    CHECK(check.max_input_err < 1e-4);
  }
}

TEST_CASE("backprop on randomized small nets stays within tolerance") {
  Rng rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    int in = 2 + static_cast<int>(rng.uniform_index(4));
    int h1 = 4 + static_cast<int>(rng.uniform_index(6));
    int out = 1 + static_cast<int>(rng.uniform_index(3));
    Mlp net({in, h1, out}, Mlp::Output::Identity);
    net.init_uniform_fanin(rng);
    Eigen::VectorXd x = safe_input(net, in, rng);
    Eigen::VectorXd u(out);
    for (int i = 0; i < out; ++i) u[i] = rng.uniform(-1, 1);
    FdCheck check = fd_gradcheck(net, x, u);
    CHECK(check.max_param_err < 1e-4);
  }
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  Rng rng(5);
  Mlp net({4, 8, 2}, Mlp::Output::Identity);
  net.init_uniform_fanin(rng);
  Eigen::VectorXd x(4);
  x << 0.4, -0.2, 0.7, 0.1;
  Mlp::Cache cache;
  net.forward(Eigen::Ref<const Eigen::MatrixXd>(x), cache);
  Mlp::Backprop bp = net.backward(
      cache, Eigen::Ref<const Eigen::MatrixXd>(Eigen::VectorXd::Zero(2)));
  CHECK(bp.param_grad.norm() == 0.0);
  CHECK(bp.input_grad.norm() == 0.0);
}

TEST_CASE("backprop is linear in the upstream gradient") {
  Rng rng(6);
  Mlp net({4, 8, 2}, Mlp::Output::Identity);
  net.init_uniform_fanin(rng);
  Eigen::VectorXd x(4);
  x << 0.4, -0.2, 0.7, 0.1;
  Eigen::VectorXd u(2);
  u << 0.3, -0.8;
  Mlp::Cache cache;
  net.forward(Eigen::Ref<const Eigen::MatrixXd>(x), cache);
  Mlp::Backprop g1 =
      net.backward(cache, Eigen::Ref<const Eigen::MatrixXd>(u));
  Eigen::VectorXd u2 = 2.0 * u;
  Mlp::Backprop g2 =
      net.backward(cache, Eigen::Ref<const Eigen::MatrixXd>(u2));
  CHECK((g2.param_grad - 2.0 * g1.param_grad).norm() < 1e-12);
}

TEST_CASE("td target arithmetic") {
  Td3Config cfg = small_cfg();
  cfg.gamma = 0.5;
  Rng rng(7);
  Td3Params p = Td3Params::make(2, 1, cfg, rng);

  // terminal transitions ignore the networks entirely
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(1);
  CHECK(td_target(2.0, 1.0, s2, eps, p, cfg) == doctest::Approx(2.0));

  // zero critics bootstrap zero
  Td3Params zero = Td3Params::make(2, 1, cfg, rng);
  zero.critic1_target.params().setZero();
  zero.critic2_target.params().setZero();
  CHECK(td_target(0.25, 0.0, s2, eps, zero, cfg) == doctest::Approx(0.25));
}

TEST_CASE("td target takes the discounted min of the twin critics") {
  Td3Config cfg = small_cfg();
  cfg.gamma = 0.5;
  Rng rng(8);
  Td3Params p = Td3Params::make(2, 1, cfg, rng);
  // bias-only critics: Q1 = 4, Q2 = 6 regardless of input
  p.critic1_target.params().setZero();
  p.critic2_target.params().setZero();
  p.critic1_target.params().tail(1)[0] = 4.0;
  p.critic2_target.params().tail(1)[0] = 6.0;
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(1);
  CHECK(td_target(0.0, 0.0, s2, eps, p, cfg) == doctest::Approx(2.0));
}

TEST_CASE("target action noise is clipped before the action range") {
  Td3Config cfg = small_cfg();
  cfg.noise_clip = 0.2;
  Rng rng(9);
  Td3Params p = Td3Params::make(2, 1, cfg, rng);
  p.actor_target.params().setZero();  // mu = 0.5 per squash midpoint
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd eps(1);
  eps << 0.7;
  Eigen::VectorXd a = smoothed_target_action(s2, eps, p, cfg);
  CHECK(a[0] == doctest::Approx(0.7));  // 0.5 + clip(0.7 -> 0.2)
  eps << -0.9;
  a = smoothed_target_action(s2, eps, p, cfg);
  CHECK(a[0] == doctest::Approx(0.3));
}

TEST_CASE("bootstrapped term is bounded by each twin") {
  Td3Config cfg = small_cfg();
  Rng rng(10);
  Td3Params p = Td3Params::make(3, 2, cfg, rng);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd s2(3);
    s2 << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    Eigen::VectorXd eps(2);
    eps << rng.normal(0.0, 0.2), rng.normal(0.0, 0.2);
    Eigen::VectorXd a = smoothed_target_action(s2, eps, p, cfg);
    Eigen::VectorXd x(5);
    x << s2, a;
    double q1 = p.critic1_target.forward_one(x)[0];
    double q2 = p.critic2_target.forward_one(x)[0];
    double y = td_target(0.0, 0.0, s2, eps, p, cfg);
    CHECK(y <= cfg.gamma * q1 + 1e-12);
    CHECK(y <= cfg.gamma * q2 + 1e-12);
  }
}

TEST_CASE("targets start as exact copies of the online networks") {
  Td3Config cfg = small_cfg();
  Rng rng(11);
  Td3Params p = Td3Params::make(4, 2, cfg, rng);
  CHECK((p.actor.params() - p.actor_target.params()).norm() == 0.0);
  CHECK((p.critic1.params() - p.critic1_target.params()).norm() == 0.0);
  CHECK((p.critic2.params() - p.critic2_target.params()).norm() == 0.0);
  // and the twins are distinct from each other
  CHECK((p.critic1.params() - p.critic2.params()).norm() > 0.0);
}

TEST_CASE("polyak blending") {
  Eigen::VectorXd target = Eigen::VectorXd::Constant(4, 1.0);
  Eigen::VectorXd online = Eigen::VectorXd::Zero(4);
  polyak_update(target, online, 0.9);
  CHECK(target[0] == doctest::Approx(0.9));

  Eigen::VectorXd frozen = Eigen::VectorXd::Constant(4, 1.0);
  polyak_update(frozen, online, 1.0 - 1e-15);
  CHECK(frozen[0] == doctest::Approx(1.0));
}

TEST_CASE("replay buffer is FIFO and validates sampling") {
  ReplayBuffer buf(8);
  CHECK(buf.capacity() == 8);
  auto tr = [](double r) {
    Transition t;
    t.s = Eigen::VectorXd::Zero(1);
    t.a = Eigen::VectorXd::Zero(1);
    t.s_next = Eigen::VectorXd::Zero(1);
    t.r = r;
    return t;
  };
  Rng rng(12);
  CHECK_THROWS_AS(buf.sample(1, rng), DomainError);
  for (int i = 0; i < 11; ++i) buf.push(tr(i));
  CHECK(buf.size() == 8);
  // the 3 oldest rewards {0,1,2} were evicted
  for (std::size_t i = 0; i < buf.size(); ++i)
    CHECK(buf.at(i).r == doctest::Approx(3.0 + i));

  ReplayBuffer::Batch b = buf.sample(4, rng);
  CHECK(b.s.cols() == 4);
  for (int i = 0; i < 4; ++i) CHECK(b.r[i] >= 3.0);
}

TEST_CASE("critic update is a no-op when predictions already match targets") {
  Td3Config cfg = small_cfg();
  Rng rng(13);
  Td3Params p = Td3Params::make(2, 1, cfg, rng);
  p.critic1.params().setZero();
  p.critic2.params().setZero();
  p.critic1_target.params().setZero();
  p.critic2_target.params().setZero();
  Eigen::VectorXd before1 = p.critic1.params();

  ReplayBuffer::Batch batch;
  int b = 8;
  batch.s = Eigen::MatrixXd::Zero(2, b);
  batch.a = Eigen::MatrixXd::Constant(1, b, 0.5);
  batch.s_next = Eigen::MatrixXd::Zero(2, b);
  batch.r = Eigen::VectorXd::Zero(b);
  batch.d = Eigen::VectorXd::Ones(b);  // y = r = 0 = Q
  double loss = critic_update(batch, p, cfg, rng);
  CHECK(loss == doctest::Approx(0.0));
  CHECK((p.critic1.params() - before1).norm() == 0.0);
}

TEST_CASE("single-transition critic loss is the squared error") {
  Td3Config cfg = small_cfg();
  Rng rng(14);
  Td3Params p = Td3Params::make(2, 1, cfg, rng);
  // bias-only critic predicting 1.5 everywhere
  p.critic1.params().setZero();
  p.critic2.params().setZero();
  p.critic1.params().tail(1)[0] = 1.5;
  p.critic2.params().tail(1)[0] = 1.5;

  ReplayBuffer::Batch batch;
  batch.s = Eigen::MatrixXd::Zero(2, 1);
  batch.a = Eigen::MatrixXd::Constant(1, 1, 0.5);
  batch.s_next = Eigen::MatrixXd::Zero(2, 1);
  batch.r = Eigen::VectorXd::Constant(1, 0.5);
  batch.d = Eigen::VectorXd::Ones(1);
  double loss = critic_update(batch, p, cfg, rng);
  CHECK(loss == doctest::Approx(1.0));  // (1.5 - 0.5)^2
}

TEST_CASE("repeated critic updates overfit a fixed batch") {
  Td3Config cfg = small_cfg();
  Rng rng(15);
  Td3Params p = Td3Params::make(3, 2, cfg, rng);

  ReplayBuffer::Batch batch;
  int b = 16;
  batch.s = Eigen::MatrixXd::Random(3, b);
  batch.a = (Eigen::MatrixXd::Random(2, b).array() * 0.5 + 0.5).matrix();
  batch.s_next = Eigen::MatrixXd::Random(3, b);
  batch.r = Eigen::VectorXd::Random(b);
  batch.d = Eigen::VectorXd::Ones(b);  // supervised: y = r

  double first = critic_update(batch, p, cfg, rng);
  double at_100 = 0.0;
  for (int i = 0; i < 99; ++i) at_100 = critic_update(batch, p, cfg, rng);
  CHECK(at_100 < 0.6 * first);
  double at_300 = at_100;
  for (int i = 0; i < 200; ++i) at_300 = critic_update(batch, p, cfg, rng);
  CHECK(at_300 < 0.05 * first);  // keeps shrinking: genuine overfit
}

TEST_CASE("actor update climbs a quadratic critic to its peak") {
  Td3Config cfg = small_cfg();
  cfg.rho = 0.99;
  Rng rng(16);
  Td3Params p = Td3Params::make(1, 1, cfg, rng);

  // supervised critic fit of Q(s=0, a) = -(a - 0.3)^2 over a dense grid
  int b = 64;
  for (int it = 0; it < 3000; ++it) {
    ReplayBuffer::Batch batch;
    batch.s = Eigen::MatrixXd::Zero(1, b);
    batch.a.resize(1, b);
    for (int i = 0; i < b; ++i) batch.a(0, i) = rng.uniform01();
    batch.s_next = Eigen::MatrixXd::Zero(1, b);
    batch.r.resize(b);
    for (int i = 0; i < b; ++i)
      batch.r[i] = -(batch.a(0, i) - 0.3) * (batch.a(0, i) - 0.3);
    batch.d = Eigen::VectorXd::Ones(b);
    critic_update(batch, p, cfg, rng);
  }

  ReplayBuffer::Batch states;
  states.s = Eigen::MatrixXd::Zero(1, b);
  states.a = Eigen::MatrixXd::Zero(1, b);
  states.s_next = Eigen::MatrixXd::Zero(1, b);
  states.r = Eigen::VectorXd::Zero(b);
  states.d = Eigen::VectorXd::Ones(b);
  for (int it = 0; it < 2000; ++it) actor_update(states, p, cfg);

  double a = p.actor.forward_one(Eigen::VectorXd::Zero(1))[0];
  CHECK(a == doctest::Approx(0.3).epsilon(0.0667));  // 0.3 +- 0.02
}

TEST_CASE("training is deterministic and respects the action range") {
  BanditEnv bandit(0.6);
  RangeCheckEnv env(bandit, 0.0, 1.0);
  Td3Config cfg = small_cfg();
  Rng rng1(17);
  Td3Params p1 = Td3Params::make(1, 1, cfg, rng1);
  TrainResult r1 = train(env, p1, cfg, 99, 300);

  Rng rng2(17);
  Td3Params p2 = Td3Params::make(1, 1, cfg, rng2);
  TrainResult r2 = train(env, p2, cfg, 99, 300);

  REQUIRE(r1.log.size() == r2.log.size());
  for (size_t i = 0; i < r1.log.size(); ++i) {
    CHECK(r1.log[i].episode_return == r2.log[i].episode_return);
    CHECK(r1.log[i].critic_loss_mean == r2.log[i].critic_loss_mean);
  }
  CHECK(env.min_seen >= 0.0);
  CHECK(env.max_seen <= 1.0);
}

TEST_CASE("frozen networks without noise repeat the same rollout") {
  BanditEnv env(0.6);
  Td3Config cfg = small_cfg();
  cfg.sigma_expl = 0.0;
  cfg.actor_lr = 0.0;
  cfg.critic_lr = 0.0;
  cfg.warmup_steps = 0;
  Rng rng(18);
  Td3Params p = Td3Params::make(1, 1, cfg, rng);
  TrainResult r = train(env, p, cfg, 7, 50);
  for (size_t i = 1; i < r.log.size(); ++i)
    CHECK(r.log[i].episode_return == r.log[0].episode_return);
}

TEST_CASE("td3 solves the continuous bandit") {
  BanditEnv env(0.6);
  Td3Config cfg = small_cfg();
  Rng rng(19);
  Td3Params p = Td3Params::make(1, 1, cfg, rng);
  train(env, p, cfg, 4, 5000);  // 5000 one-step episodes
  double a = p.actor.forward_one(Eigen::VectorXd::Zero(1))[0];
  CHECK(a == doctest::Approx(0.6).epsilon(0.0834));  // 0.6 +- 0.05
}

TEST_CASE("checkpoints round-trip and reject mismatched shapes") {
  Td3Config cfg = small_cfg();
  Rng rng(20);
  Td3Params p = Td3Params::make(4, 3, cfg, rng);
  std::string path =
      (std::filesystem::temp_directory_path() / "td3_ckpt_test.bin").string();
  save_checkpoint(path, p, cfg);
  Td3Params q = load_checkpoint(path, cfg);
  CHECK(q.state_dim == 4);
  CHECK(q.action_dim == 3);
  CHECK((q.actor.params() - p.actor.params()).norm() == 0.0);
  CHECK((q.critic2_target.params() - p.critic2_target.params()).norm() == 0.0);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin", cfg), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("config validation") {
  Td3Config cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = Td3Config{};
  cfg.rho = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = Td3Config{};
  cfg.policy_delay = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = Td3Config{};
  CHECK(cfg.expl_sigma() == doctest::Approx(0.1));
  CHECK(cfg.smooth_sigma() == doctest::Approx(0.2));
  CHECK(cfg.clip_bound() == doctest::Approx(0.2));
}
