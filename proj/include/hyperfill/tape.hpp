#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hyperfill/matrix.hpp"

namespace hyperfill::diff {

using hyperfill::Groups;
using hyperfill::Mat;

// A learnable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
};

struct Var {
  int idx = -1;
};

// Reverse-mode tape over dense matrices. Operations append nodes; backward()
// walks the tape once in reverse with a fixed accumulation order, so gradients
// are bit-identical across runs. One tape instance per loss evaluation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat v);
  // Differentiable leaf; read its gradient with grad() after backward().
  Var leaf(Mat v);
  // Leaf bound to a Parameter: backward() accumulates into p.grad.
  Var param(Parameter& p);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add_bias(Var x, Var bias);
  Var rectify(Var x);
  Var apply_mask(Var x, Mat mask);  // elementwise multiply by a fixed mask
  Var row_normalize(Var x);         // rows scaled to unit L2 norm
  Var cosine_rows(Var a, Var b);    // n x 1; rows with zero norm give 0
  Var log_softmax_rows(Var x);
  Var segment_mean(Var x, Groups groups);  // empty group -> zero row
  Var segment_sum(Var x, Groups groups);
  Var masked_assign(Var x, std::vector<int> rows, Var row_value);
  Var select_rows(Var x, std::vector<int> rows);
  Var sum_all(Var x);                                        // 1 x 1
  Var pick_sum(Var x, std::vector<std::pair<int, int>> at);  // 1 x 1

  // Reverse sweep from a 1x1 loss node; flushes bound Parameter gradients.
  void backward(Var loss);

  const Mat& value(Var v) const { return node(v.idx).value; }
  const Mat& grad(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&)> backprop;  // empty for leaves and constants
  };

  Var push(Mat value, std::function<void(Tape&)> backprop);
  Node& node(int idx);
  const Node& node(int idx) const;
  Mat& grad_at(int idx) { return node(idx).grad; }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, Parameter*>> bindings_;
  bool backward_done_ = false;
};

}  // namespace hyperfill::diff
