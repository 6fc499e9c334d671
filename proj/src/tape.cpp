#include "hyperfill/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperfill::diff {

namespace {

void check_same_shape(const char* op, const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()) + ")");
}

void check_rows(const char* op, const std::vector<int>& rows, long limit) {
  for (int r : rows) {
    if (r < 0 || r >= limit)
      throw std::invalid_argument(std::string(op) + ": row index " + std::to_string(r) +
                                  " out of range [0, " + std::to_string(limit) + ")");
  }
}

}  // namespace

Tape::Node& Tape::node(int idx) { return nodes_.at(idx); }
const Tape::Node& Tape::node(int idx) const { return nodes_.at(idx); }

Var Tape::push(Mat value, std::function<void(Tape&)> backprop) {
  if (backward_done_) throw std::logic_error("tape: cannot extend after backward()");
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat v) { return push(std::move(v), nullptr); }

Var Tape::leaf(Mat v) { return push(std::move(v), nullptr); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, nullptr);
  bindings_.emplace_back(v.idx, &p);
  return v;
}

const Mat& Tape::grad(Var v) const {
  if (!backward_done_) throw std::logic_error("tape: grad() before backward()");
  return node(v.idx).grad;
}

Var Tape::add(Var a, Var b) {
  check_same_shape("add", value(a), value(b));
  return push(value(a) + value(b), [a, b, out = size()](Tape& t) {
    t.grad_at(a.idx) += t.grad_at(out);
    t.grad_at(b.idx) += t.grad_at(out);
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_shape("sub", value(a), value(b));
  return push(value(a) - value(b), [a, b, out = size()](Tape& t) {
    t.grad_at(a.idx) += t.grad_at(out);
    t.grad_at(b.idx) -= t.grad_at(out);
  });
}

Var Tape::scale(Var a, double c) {
  return push(value(a) * c, [a, c, out = size()](Tape& t) {
    t.grad_at(a.idx) += c * t.grad_at(out);
  });
}

Var Tape::matmul(Var a, Var b) {
  if (value(a).cols() != value(b).rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  return push(value(a) * value(b), [a, b, out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    t.grad_at(a.idx) += g * t.value(b).transpose();
    t.grad_at(b.idx) += t.value(a).transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  if (value(a).cols() != value(b).cols())
    throw std::invalid_argument("matmul_nt: column dimensions disagree");
  return push(value(a) * value(b).transpose(), [a, b, out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    t.grad_at(a.idx) += g * t.value(b);
    t.grad_at(b.idx) += g.transpose() * t.value(a);
  });
}

Var Tape::add_bias(Var x, Var bias) {
  if (value(bias).rows() != 1 || value(bias).cols() != value(x).cols())
    throw std::invalid_argument("add_bias: bias must be 1 x cols(x)");
  Mat out = value(x);
  out.rowwise() += Eigen::RowVectorXd(value(bias).row(0));
  return push(std::move(out), [x, bias, out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    t.grad_at(x.idx) += g;
    t.grad_at(bias.idx) += g.colwise().sum();
  });
}

Var Tape::rectify(Var x) {
  Mat out = value(x).cwiseMax(0.0);
  return push(std::move(out), [x, out = size()](Tape& t) {
    t.grad_at(x.idx).array() +=
        t.grad_at(out).array() * (t.value(x).array() > 0.0).cast<double>();
  });
}

Var Tape::apply_mask(Var x, Mat mask) {
  check_same_shape("apply_mask", value(x), mask);
  Mat out = value(x).cwiseProduct(mask);
  return push(std::move(out), [x, mask = std::move(mask), out = size()](Tape& t) {
    t.grad_at(x.idx) += t.grad_at(out).cwiseProduct(mask);
  });
}

Var Tape::row_normalize(Var x) {
  const Mat& v = value(x);
  Mat out(v.rows(), v.cols());
  for (long r = 0; r < v.rows(); ++r) {
    double norm = v.row(r).norm();
    if (norm == 0.0)
      throw std::invalid_argument("row_normalize: zero-norm row " + std::to_string(r));
    out.row(r) = v.row(r) / norm;
  }
  return push(std::move(out), [x, out = size()](Tape& t) {
    const Mat& v = t.value(x);
    const Mat& y = t.value(Var{out});
    const Mat& g = t.grad_at(out);
    Mat& gx = t.grad_at(x.idx);
    for (long r = 0; r < v.rows(); ++r) {
      double norm = v.row(r).norm();
      double dot = g.row(r).dot(y.row(r));
      gx.row(r) += (g.row(r) - dot * y.row(r)) / norm;
    }
  });
}

Var Tape::cosine_rows(Var a, Var b) {
  check_same_shape("cosine_rows", value(a), value(b));
  const Mat& va = value(a);
  const Mat& vb = value(b);
  Mat out(va.rows(), 1);
  for (long r = 0; r < va.rows(); ++r) {
    double na = va.row(r).norm(), nb = vb.row(r).norm();
    out(r, 0) = (na == 0.0 || nb == 0.0) ? 0.0 : va.row(r).dot(vb.row(r)) / (na * nb);
  }
  return push(std::move(out), [a, b, out = size()](Tape& t) {
    const Mat& va = t.value(a);
    const Mat& vb = t.value(b);
    const Mat& c = t.value(Var{out});
    const Mat& g = t.grad_at(out);
    Mat& ga = t.grad_at(a.idx);
    Mat& gb = t.grad_at(b.idx);
    for (long r = 0; r < va.rows(); ++r) {
      double na = va.row(r).norm(), nb = vb.row(r).norm();
      if (na == 0.0 || nb == 0.0) continue;  // cosine pinned to 0 there
      double gr = g(r, 0), cr = c(r, 0);
      ga.row(r) += gr * (vb.row(r) / (na * nb) - cr * va.row(r) / (na * na));
      gb.row(r) += gr * (va.row(r) / (na * nb) - cr * vb.row(r) / (nb * nb));
    }
  });
}

Var Tape::log_softmax_rows(Var x) {
  const Mat& v = value(x);
  if (v.cols() < 1) throw std::invalid_argument("log_softmax_rows: empty rows");
  Mat out(v.rows(), v.cols());
  for (long r = 0; r < v.rows(); ++r) {
    double mx = v.row(r).maxCoeff();
    double lse = mx + std::log((v.row(r).array() - mx).exp().sum());
    out.row(r) = v.row(r).array() - lse;
  }
  return push(std::move(out), [x, out = size()](Tape& t) {
    const Mat& y = t.value(Var{out});
    const Mat& g = t.grad_at(out);
    Mat& gx = t.grad_at(x.idx);
    for (long r = 0; r < y.rows(); ++r) {
      double gsum = g.row(r).sum();
      gx.row(r) += g.row(r) - gsum * y.row(r).array().exp().matrix();
    }
  });
}

Var Tape::segment_mean(Var x, Groups groups) {
  const Mat& v = value(x);
  Mat out = Mat::Zero(static_cast<long>(groups.size()), v.cols());
  for (size_t r = 0; r < groups.size(); ++r) {
    check_rows("segment_mean", groups[r], v.rows());
    if (groups[r].empty()) continue;
    for (int src : groups[r]) out.row(r) += v.row(src);
    out.row(r) /= static_cast<double>(groups[r].size());
  }
  return push(std::move(out), [x, groups = std::move(groups), out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    Mat& gx = t.grad_at(x.idx);
    for (size_t r = 0; r < groups.size(); ++r) {
      if (groups[r].empty()) continue;
      double inv = 1.0 / static_cast<double>(groups[r].size());
      for (int src : groups[r]) gx.row(src) += inv * g.row(r);
    }
  });
}

Var Tape::segment_sum(Var x, Groups groups) {
  const Mat& v = value(x);
  Mat out = Mat::Zero(static_cast<long>(groups.size()), v.cols());
  for (size_t r = 0; r < groups.size(); ++r) {
    check_rows("segment_sum", groups[r], v.rows());
    for (int src : groups[r]) out.row(r) += v.row(src);
  }
  return push(std::move(out), [x, groups = std::move(groups), out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    Mat& gx = t.grad_at(x.idx);
    for (size_t r = 0; r < groups.size(); ++r) {
      for (int src : groups[r]) gx.row(src) += g.row(r);
    }
  });
}

Var Tape::masked_assign(Var x, std::vector<int> rows, Var row_value) {
  const Mat& v = value(x);
  const Mat& tok = value(row_value);
  if (tok.rows() != 1 || tok.cols() != v.cols())
    throw std::invalid_argument("masked_assign: replacement must be 1 x cols(x)");
  check_rows("masked_assign", rows, v.rows());
  Mat out = v;
  for (int r : rows) out.row(r) = tok.row(0);
  return push(std::move(out), [x, row_value, rows = std::move(rows), out = size()](Tape& t) {
    Mat pass = t.grad_at(out);
    Mat& gtok = t.grad_at(row_value.idx);
    for (int r : rows) {
      gtok.row(0) += pass.row(r);
      pass.row(r).setZero();
    }
    t.grad_at(x.idx) += pass;
  });
}

Var Tape::select_rows(Var x, std::vector<int> rows) {
  const Mat& v = value(x);
  check_rows("select_rows", rows, v.rows());
  Mat out(static_cast<long>(rows.size()), v.cols());
  for (size_t r = 0; r < rows.size(); ++r) out.row(r) = v.row(rows[r]);
  return push(std::move(out), [x, rows = std::move(rows), out = size()](Tape& t) {
    const Mat& g = t.grad_at(out);
    Mat& gx = t.grad_at(x.idx);
    for (size_t r = 0; r < rows.size(); ++r) gx.row(rows[r]) += g.row(r);
  });
}

Var Tape::sum_all(Var x) {
  Mat out(1, 1);
  out(0, 0) = value(x).sum();
  return push(std::move(out), [x, out = size()](Tape& t) {
    t.grad_at(x.idx).array() += t.grad_at(out)(0, 0);
  });
}

Var Tape::pick_sum(Var x, std::vector<std::pair<int, int>> at) {
  const Mat& v = value(x);
  double total = 0.0;
  for (auto [r, c] : at) {
    if (r < 0 || r >= v.rows() || c < 0 || c >= v.cols())
      throw std::invalid_argument("pick_sum: entry (" + std::to_string(r) + ", " +
                                  std::to_string(c) + ") out of range");
    total += v(r, c);
  }
  Mat out(1, 1);
  out(0, 0) = total;
  return push(std::move(out), [x, at = std::move(at), out = size()](Tape& t) {
    double g = t.grad_at(out)(0, 0);
    Mat& gx = t.grad_at(x.idx);
    for (auto [r, c] : at) gx(r, c) += g;
  });
}

void Tape::backward(Var loss) {
  if (backward_done_) throw std::logic_error("tape: backward() called twice");
  const Mat& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw std::invalid_argument("backward: loss must be a 1x1 scalar");
  for (auto& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  backward_done_ = true;
  node(loss.idx).grad(0, 0) = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    if (nodes_[i].backprop) nodes_[i].backprop(*this);
  }
  for (auto& [idx, p] : bindings_) p->grad += nodes_[idx].grad;
}

}  // namespace hyperfill::diff
