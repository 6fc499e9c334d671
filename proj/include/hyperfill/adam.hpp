#pragma once

#include <vector>

#include "hyperfill/tape.hpp"

namespace hyperfill::diff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled: value -= lr * weight_decay * value
};

// Adam with decoupled weight decay over a fixed list of parameters. Moment
// state starts at zero; step() consumes the gradients currently stored on the
// parameters (callers zero them between steps).
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  void step();
  void zero_grad();
  long steps_taken() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Mat> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace hyperfill::diff
