#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace swarm_pe {

// Step-then-observe environment contract used by the trainer. A single
// logical actor drives one instance at a time.
class Env {
 public:
  virtual ~Env() = default;

  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;

  struct Step {
    Eigen::VectorXd obs;
    double reward = 0.0;
    bool done = false;
  };

  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual Step step(const Eigen::Ref<const Eigen::VectorXd>& action) = 0;
};

}  // namespace swarm_pe
