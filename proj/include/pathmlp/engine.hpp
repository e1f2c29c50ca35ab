#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathmlp/graph.hpp"
#include "pathmlp/matrix.hpp"
#include "pathmlp/rng.hpp"

namespace pathmlp {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape; filled by Tape::backward
  bool trainable = true;
  bool decay_exempt = false;

  Parameter() = default;
  Parameter(std::string n, Matrix val, bool train = true)
      : name(std::move(n)), value(std::move(val)), grad(value.rows, value.cols, 0.0),
        trainable(train) {}
};

// Records one training step's forward operations and replays them in reverse
// for gradients. Every forward op validates shapes and rejects non-finite
// outputs with std::runtime_error. A Tape belongs to a single step on a single
// thread; build a fresh one per step.
class Tape {
public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(Matrix value);       // constant leaf
  Var param(Parameter& p);       // differentiable leaf; grads land in p.grad

  Var linear(Var x, Var w);            // x · w
  Var linear(Var x, Var w, Var bias);  // x · w + bias, bias is 1 x cols
  Var relu(Var x);
  Var concat_cols(const std::vector<Var>& xs);
  Var softmax_rows(Var x);
  // weights is B x K, items is (B*K) x H grouped row-major by weight row;
  // result row i is sum_k weights(i,k) * items(i*K+k).
  Var weighted_sum_groups(Var weights, Var items);
  Var add(Var x, Var y);
  Var add_row_broadcast(Var x, Var bias);  // bias is 1 x cols
  Var scale(Var x, double c);
  Var affine_mix(Var x, Var y, double beta);  // beta*x + (1-beta)*y
  Var dropout(Var x, double p, bool training, Rng& rng);
  Var gather_rows(Var x, std::vector<int> rows);
  // out row i = sum of table rows indexed by the neighbors of batch[i]; the
  // sparse equivalent of multiplying the 0/1 adjacency row by the table.
  Var neighbor_row_sum(Var table, const Graph& g, std::vector<int> batch);
  Var reshape(Var x, int rows, int cols);
  Var sum(Var x);  // 1x1
  // -(1/n) sum_i log(max(probs(i, labels[i]), 1e-12)); probs rows must be
  // distributions over classes. 1x1 result.
  Var cross_entropy_mean(Var probs, std::vector<int> labels);

  // Reverse traversal from a scalar loss. Zeroes the grads of every parameter
  // registered on this tape first, so untouched parameters end with zeros.
  void backward(Var loss);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  // Smallest |pre-activation| seen by relu on this tape; used by the finite
  // difference check to skip kink coordinates.
  double min_relu_abs() const { return min_relu_abs_; }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> back;  // nullptr for leaves
    Parameter* owner = nullptr;
  };

  Var push(Matrix value, std::function<void()> back, const char* op,
           Parameter* owner = nullptr);

  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
  double min_relu_abs_ = 1e300;
};

struct FdiffOutcome {
  double loss = 0.0;
  double min_relu_abs = 1e300;  // from Tape::min_relu_abs of that evaluation
};

struct FdiffReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

// Central-difference check of analytic gradients already stored in each
// parameter's grad. Samples up to coords_per_param coordinates per parameter;
// coordinates whose evaluations pass within `step` of a relu kink are skipped.
// Relative error uses max(|analytic|, |numeric|, 1e-6) as the scale.
FdiffReport finite_difference_check(const std::function<FdiffOutcome()>& loss_fn,
                                    const std::vector<Parameter*>& params,
                                    double step, int coords_per_param,
                                    std::uint64_t seed);

} // namespace pathmlp
