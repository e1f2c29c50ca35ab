#include "pathmlp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace pathmlp {

namespace {

// out += a · b
void mm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

// out += a · bᵀ
void mm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      orow[j] += acc;
    }
  }
}

// out += aᵀ · b
void mm_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (int j = 0; j < a.cols; ++j) {
      const double aij = arow[j];
      if (aij == 0.0) continue;
      double* orow = out.row(j);
      for (int k = 0; k < b.cols; ++k) orow[k] += aij * brow[k];
    }
  }
}

} // namespace

Tape::Var Tape::push(Matrix value, std::function<void()> back, const char* op,
                     Parameter* owner) {
  for (double x : value.v) {
    if (!std::isfinite(x)) {
      throw std::runtime_error(std::string("tape: non-finite value produced by ") + op);
    }
  }
  Node node;
  node.grad = Matrix(value.rows, value.cols, 0.0);
  node.value = std::move(value);
  node.back = std::move(back);
  node.owner = owner;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::input(Matrix value) { return push(std::move(value), nullptr, "input"); }

Tape::Var Tape::param(Parameter& p) {
  Var v = push(p.value, nullptr, "param", &p);
  param_nodes_.push_back(v.id);
  return v;
}

Tape::Var Tape::linear(Var x, Var w) {
  const Matrix& xv = nodes_[x.id].value;
  const Matrix& wv = nodes_[w.id].value;
  if (xv.cols != wv.rows) throw std::invalid_argument("linear: inner dimensions disagree");
  Matrix out(xv.rows, wv.cols, 0.0);
  mm_acc(xv, wv, out);
  Var o = push(std::move(out), nullptr, "linear");
  nodes_[o.id].back = [this, x, w, o] {
    const Matrix& g = nodes_[o.id].grad;
    mm_nt_acc(g, nodes_[w.id].value, nodes_[x.id].grad);   // gx += g · wᵀ
    mm_tn_acc(nodes_[x.id].value, g, nodes_[w.id].grad);   // gw += xᵀ · g
  };
  return o;
}

Tape::Var Tape::linear(Var x, Var w, Var bias) {
  const Matrix& bv = nodes_[bias.id].value;
  const Matrix& wv = nodes_[w.id].value;
  if (bv.rows != 1 || bv.cols != wv.cols) {
    throw std::invalid_argument("linear: bias must be 1 x output-cols");
  }
  return add_row_broadcast(linear(x, w), bias);
}

Tape::Var Tape::relu(Var x) {
  const Matrix& xv = nodes_[x.id].value;
  Matrix out = xv;
  for (double val : xv.v) min_relu_abs_ = std::min(min_relu_abs_, std::abs(val));
  for (double& val : out.v) val = val > 0.0 ? val : 0.0;
  Var o = push(std::move(out), nullptr, "relu");
  nodes_[o.id].back = [this, x, o] {
    const Matrix& g = nodes_[o.id].grad;
    const Matrix& xv2 = nodes_[x.id].value;
    Matrix& gx = nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      if (xv2.v[i] > 0.0) gx.v[i] += g.v[i];  // subgradient 0 at the kink
    }
  };
  return o;
}

Tape::Var Tape::concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat: no inputs");
  const int rows = nodes_[xs[0].id].value.rows;
  int total = 0;
  for (Var x : xs) {
    if (nodes_[x.id].value.rows != rows) {
      throw std::invalid_argument("concat: row counts disagree");
    }
    total += nodes_[x.id].value.cols;
  }
  Matrix out(rows, total);
  int off = 0;
  for (Var x : xs) {
    const Matrix& xv = nodes_[x.id].value;
    for (int i = 0; i < rows; ++i) {
      std::copy(xv.row(i), xv.row(i) + xv.cols, out.row(i) + off);
    }
    off += xv.cols;
  }
  Var o = push(std::move(out), nullptr, "concat");
  nodes_[o.id].back = [this, xs, o] {
    const Matrix& g = nodes_[o.id].grad;
    int off2 = 0;
    for (Var x : xs) {
      Matrix& gx = nodes_[x.id].grad;
      for (int i = 0; i < g.rows; ++i) {
        const double* src = g.row(i) + off2;
        double* dst = gx.row(i);
        for (int c = 0; c < gx.cols; ++c) dst[c] += src[c];
      }
      off2 += gx.cols;
    }
  };
  return o;
}

Tape::Var Tape::softmax_rows(Var x) {
  const Matrix& xv = nodes_[x.id].value;
  Matrix out(xv.rows, xv.cols);
  for (int i = 0; i < xv.rows; ++i) {
    const double* in = xv.row(i);
    double* o = out.row(i);
    double mx = in[0];
    for (int c = 1; c < xv.cols; ++c) mx = std::max(mx, in[c]);
    double z = 0.0;
    for (int c = 0; c < xv.cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      z += o[c];
    }
    for (int c = 0; c < xv.cols; ++c) o[c] /= z;
  }
  Var o = push(std::move(out), nullptr, "softmax");
  nodes_[o.id].back = [this, x, o] {
    const Matrix& g = nodes_[o.id].grad;
    const Matrix& p = nodes_[o.id].value;
    Matrix& gx = nodes_[x.id].grad;
    for (int i = 0; i < g.rows; ++i) {
      const double* gi = g.row(i);
      const double* pi = p.row(i);
      double dot = 0.0;
      for (int c = 0; c < g.cols; ++c) dot += gi[c] * pi[c];
      double* gxi = gx.row(i);
      for (int c = 0; c < g.cols; ++c) gxi[c] += pi[c] * (gi[c] - dot);
    }
  };
  return o;
}

Tape::Var Tape::weighted_sum_groups(Var weights, Var items) {
  const Matrix& wv = nodes_[weights.id].value;
  const Matrix& iv = nodes_[items.id].value;
  const int groups = wv.rows, k = wv.cols, h = iv.cols;
  if (iv.rows != groups * k) {
    throw std::invalid_argument("weighted_sum_groups: items rows != weights rows*cols");
  }
  Matrix out(groups, h, 0.0);
  for (int i = 0; i < groups; ++i) {
    double* orow = out.row(i);
    for (int j = 0; j < k; ++j) {
      const double w = wv.at(i, j);
      const double* item = iv.row(i * k + j);
      for (int c = 0; c < h; ++c) orow[c] += w * item[c];
    }
  }
  Var o = push(std::move(out), nullptr, "weighted_sum");
  nodes_[o.id].back = [this, weights, items, o, groups, k, h] {
    const Matrix& g = nodes_[o.id].grad;
    const Matrix& wv2 = nodes_[weights.id].value;
    const Matrix& iv2 = nodes_[items.id].value;
    Matrix& gw = nodes_[weights.id].grad;
    Matrix& gi = nodes_[items.id].grad;
    for (int i = 0; i < groups; ++i) {
      const double* grow = g.row(i);
      for (int j = 0; j < k; ++j) {
        const double w = wv2.at(i, j);
        const double* item = iv2.row(i * k + j);
        double* gitem = gi.row(i * k + j);
        double acc = 0.0;
        for (int c = 0; c < h; ++c) {
          gitem[c] += w * grow[c];
          acc += item[c] * grow[c];
        }
        gw.at(i, j) += acc;
      }
    }
  };
  return o;
}

Tape::Var Tape::add(Var x, Var y) {
  const Matrix& xv = nodes_[x.id].value;
  const Matrix& yv = nodes_[y.id].value;
  if (!xv.same_shape(yv)) throw std::invalid_argument("add: shape mismatch");
  Matrix out = xv;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += yv.v[i];
  Var o = push(std::move(out), nullptr, "add");
  nodes_[o.id].back = [this, x, y, o] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    Matrix& gy = nodes_[y.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      gx.v[i] += g.v[i];
      gy.v[i] += g.v[i];
    }
  };
  return o;
}

Tape::Var Tape::add_row_broadcast(Var x, Var bias) {
  const Matrix& xv = nodes_[x.id].value;
  const Matrix& bv = nodes_[bias.id].value;
  if (bv.rows != 1 || bv.cols != xv.cols) {
    throw std::invalid_argument("add_row_broadcast: bias must be 1 x cols");
  }
  Matrix out = xv;
  for (int i = 0; i < out.rows; ++i) {
    double* row = out.row(i);
    for (int c = 0; c < out.cols; ++c) row[c] += bv.v[c];
  }
  Var o = push(std::move(out), nullptr, "add_row_broadcast");
  nodes_[o.id].back = [this, x, bias, o] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    Matrix& gb = nodes_[bias.id].grad;
    for (int i = 0; i < g.rows; ++i) {
      const double* grow = g.row(i);
      double* gxrow = gx.row(i);
      for (int c = 0; c < g.cols; ++c) {
        gxrow[c] += grow[c];
        gb.v[c] += grow[c];
      }
    }
  };
  return o;
}

Tape::Var Tape::scale(Var x, double c) {
  Matrix out = nodes_[x.id].value;
  for (double& val : out.v) val *= c;
  Var o = push(std::move(out), nullptr, "scale");
  nodes_[o.id].back = [this, x, o, c] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) gx.v[i] += c * g.v[i];
  };
  return o;
}

Tape::Var Tape::affine_mix(Var x, Var y, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("affine_mix: beta outside [0,1]");
  const Matrix& xv = nodes_[x.id].value;
  const Matrix& yv = nodes_[y.id].value;
  if (!xv.same_shape(yv)) throw std::invalid_argument("affine_mix: shape mismatch");
  Matrix out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] = beta * xv.v[i] + (1.0 - beta) * yv.v[i];
  }
  Var o = push(std::move(out), nullptr, "affine_mix");
  nodes_[o.id].back = [this, x, y, o, beta] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    Matrix& gy = nodes_[y.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      gx.v[i] += beta * g.v[i];
      gy.v[i] += (1.0 - beta) * g.v[i];
    }
  };
  return o;
}

Tape::Var Tape::dropout(Var x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const Matrix& xv = nodes_[x.id].value;
  if (!training || p == 0.0) {
    Matrix out = xv;  // identity, bitwise
    Var o = push(std::move(out), nullptr, "dropout");
    nodes_[o.id].back = [this, x, o] {
      const Matrix& g = nodes_[o.id].grad;
      Matrix& gx = nodes_[x.id].grad;
      for (std::size_t i = 0; i < g.v.size(); ++i) gx.v[i] += g.v[i];
    };
    return o;
  }
  auto mask = std::make_shared<std::vector<double>>(xv.v.size());
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.v.size(); ++i) {
    const double m = rng.next_double() < p ? 0.0 : keep_scale;
    (*mask)[i] = m;
    out.v[i] = m * xv.v[i];
  }
  Var o = push(std::move(out), nullptr, "dropout");
  nodes_[o.id].back = [this, x, o, mask] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) gx.v[i] += (*mask)[i] * g.v[i];
  };
  return o;
}

Tape::Var Tape::gather_rows(Var x, std::vector<int> rows) {
  const Matrix& xv = nodes_[x.id].value;
  Matrix out(static_cast<int>(rows.size()), xv.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= xv.rows) {
      throw std::invalid_argument("gather_rows: index out of range");
    }
    std::copy(xv.row(rows[i]), xv.row(rows[i]) + xv.cols, out.row(static_cast<int>(i)));
  }
  Var o = push(std::move(out), nullptr, "gather_rows");
  nodes_[o.id].back = [this, x, o, rows = std::move(rows)] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* src = g.row(static_cast<int>(i));
      double* dst = gx.row(rows[i]);
      for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
    }
  };
  return o;
}

Tape::Var Tape::neighbor_row_sum(Var table, const Graph& g, std::vector<int> batch) {
  const Matrix& tv = nodes_[table.id].value;
  if (tv.rows != g.node_count) {
    throw std::invalid_argument("neighbor_row_sum: table rows != node count");
  }
  Matrix out(static_cast<int>(batch.size()), tv.cols, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double* orow = out.row(static_cast<int>(i));
    for (int u : g.neighbors(batch[i])) {
      const double* trow = tv.row(u);
      for (int c = 0; c < tv.cols; ++c) orow[c] += trow[c];
    }
  }
  Var o = push(std::move(out), nullptr, "neighbor_row_sum");
  nodes_[o.id].back = [this, table, o, &g, batch = std::move(batch)] {
    const Matrix& gr = nodes_[o.id].grad;
    Matrix& gt = nodes_[table.id].grad;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double* grow = gr.row(static_cast<int>(i));
      for (int u : g.neighbors(batch[i])) {
        double* trow = gt.row(u);
        for (int c = 0; c < gr.cols; ++c) trow[c] += grow[c];
      }
    }
  };
  return o;
}

Tape::Var Tape::reshape(Var x, int rows, int cols) {
  const Matrix& xv = nodes_[x.id].value;
  if (static_cast<std::size_t>(rows) * cols != xv.v.size()) {
    throw std::invalid_argument("reshape: element count mismatch");
  }
  Matrix out(rows, cols);
  out.v = xv.v;
  Var o = push(std::move(out), nullptr, "reshape");
  nodes_[o.id].back = [this, x, o] {
    const Matrix& g = nodes_[o.id].grad;
    Matrix& gx = nodes_[x.id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) gx.v[i] += g.v[i];
  };
  return o;
}

Tape::Var Tape::sum(Var x) {
  const Matrix& xv = nodes_[x.id].value;
  double total = 0.0;
  for (double val : xv.v) total += val;
  Matrix out(1, 1, total);
  Var o = push(std::move(out), nullptr, "sum");
  nodes_[o.id].back = [this, x, o] {
    const double g = nodes_[o.id].grad.v[0];
    Matrix& gx = nodes_[x.id].grad;
    for (double& val : gx.v) val += g;
  };
  return o;
}

Tape::Var Tape::cross_entropy_mean(Var probs, std::vector<int> labels) {
  const Matrix& pv = nodes_[probs.id].value;
  if (static_cast<int>(labels.size()) != pv.rows) {
    throw std::invalid_argument("cross_entropy_mean: label count != probability rows");
  }
  constexpr double kClamp = 1e-12;
  double total = 0.0;
  for (int i = 0; i < pv.rows; ++i) {
    if (labels[i] < 0 || labels[i] >= pv.cols) {
      throw std::invalid_argument("cross_entropy_mean: label out of range");
    }
    total -= std::log(std::max(pv.at(i, labels[i]), kClamp));
  }
  Matrix out(1, 1, total / pv.rows);
  Var o = push(std::move(out), nullptr, "cross_entropy");
  nodes_[o.id].back = [this, probs, o, labels = std::move(labels)] {
    const double g = nodes_[o.id].grad.v[0];
    const Matrix& pv2 = nodes_[probs.id].value;
    Matrix& gp = nodes_[probs.id].grad;
    const double inv_n = 1.0 / pv2.rows;
    for (int i = 0; i < pv2.rows; ++i) {
      const double p = pv2.at(i, labels[i]);
      if (p > kClamp) gp.at(i, labels[i]) -= g * inv_n / p;  // clamped region is flat
    }
  };
  return o;
}

void Tape::backward(Var loss) {
  if (!loss.valid()) throw std::invalid_argument("backward: invalid loss var");
  const Matrix& lv = nodes_[loss.id].value;
  if (lv.rows != 1 || lv.cols != 1) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  for (int id : param_nodes_) {
    Parameter* p = nodes_[id].owner;
    std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
  }
  nodes_[loss.id].grad.v[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back();
  }
  for (int id : param_nodes_) {
    Parameter* p = nodes_[id].owner;
    const Matrix& g = nodes_[id].grad;
    for (std::size_t i = 0; i < g.v.size(); ++i) p->grad.v[i] += g.v[i];
  }
}

FdiffReport finite_difference_check(const std::function<FdiffOutcome()>& loss_fn,
                                    const std::vector<Parameter*>& params,
                                    double step, int coords_per_param,
                                    std::uint64_t seed) {
  FdiffReport report;
  Rng rng(seed, 0x8d1f);
  for (Parameter* p : params) {
    const int n = static_cast<int>(p->value.v.size());
    std::vector<int> coords(n);
    for (int i = 0; i < n; ++i) coords[i] = i;
    if (n > coords_per_param) {
      rng.shuffle(coords);
      coords.resize(coords_per_param);
    }
    for (int idx : coords) {
      const double saved = p->value.v[idx];
      p->value.v[idx] = saved + step;
      const FdiffOutcome hi = loss_fn();
      p->value.v[idx] = saved - step;
      const FdiffOutcome lo = loss_fn();
      p->value.v[idx] = saved;
      if (std::min(hi.min_relu_abs, lo.min_relu_abs) < step) {
        ++report.skipped;
        continue;
      }
      const double numeric = (hi.loss - lo.loss) / (2.0 * step);
      const double analytic = p->grad.v[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      report.max_rel_error = std::max(report.max_rel_error,
                                      std::abs(analytic - numeric) / denom);
      ++report.checked;
    }
  }
  return report;
}

} // namespace pathmlp
