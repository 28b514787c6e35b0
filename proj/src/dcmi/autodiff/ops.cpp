#include "dcmi/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcmi::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename F>
Tensor map(const Tensor& t, F f) {
  Tensor out = Tensor::zeros_like(t);
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = f(t[i]);
  return out;
}

// Unary elementwise op whose derivative is expressed through (input, output).
template <typename Fwd, typename Deriv>
Var unary(const char* name, const Var& a, Fwd fwd, Deriv deriv) {
  Tensor out = map(a.value(), fwd);
  return a.graph().record(name, out, {a}, [a, out, deriv](Graph& g, const Tensor& go) {
    const auto& x = a.value();
    Tensor ga = Tensor::zeros_like(x);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] = go[i] * deriv(x[i], out[i]);
    g.accumulate(a, ga);
  });
}

Tensor transpose_matmul_lhs(const Tensor& a, const Tensor& g, std::size_t k, std::size_t m) {
  // a: (n x k), g: (n x m) -> a^T g: (k x m)
  const std::size_t n = a.rows();
  Tensor out({k, m});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      const double av = a[r * k + i];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += av * g[r * m + j];
    }
  }
  return out;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // log sigma(x) = -softplus(-x)
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  out += b.value();
  return a.graph().record("add", std::move(out), {a, b}, [a, b](Graph& g, const Tensor& go) {
    g.accumulate(a, go);
    g.accumulate(b, go);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.graph().record("sub", std::move(out), {a, b}, [a, b](Graph& g, const Tensor& go) {
    g.accumulate(a, go);
    Tensor neg = go;
    neg *= -1.0;
    g.accumulate(b, neg);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.graph().record("mul", std::move(out), {a, b}, [a, b](Graph& g, const Tensor& go) {
    const auto& av = a.value();
    const auto& bv = b.value();
    if (a.requires_grad()) {
      Tensor ga = go;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= bv[i];
      g.accumulate(a, ga);
    }
    if (b.requires_grad()) {
      Tensor gb = go;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= av[i];
      g.accumulate(b, gb);
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  out *= s;
  return a.graph().record("scale", std::move(out), {a}, [a, s](Graph& g, const Tensor& go) {
    Tensor ga = go;
    ga *= s;
    g.accumulate(a, ga);
  });
}

Var square(const Var& a) {
  return unary("square", a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var sigmoid(const Var& a) {
  return unary("sigmoid", a, [](double x) { return sigmoid(x); },
               [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var relu(const Var& a) {
  return unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var log(const Var& a) {
  for (double v : a.value().values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  }
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var exp(const Var& a) {
  return unary("exp", a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.graph().record("sum", Tensor::scalar(s), {a}, [a](Graph& g, const Tensor& go) {
    g.accumulate(a, Tensor(a.shape(), go[0]));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var stop_gradient(const Var& a) {
  // A constant copy: downstream nodes see no differentiable input.
  return a.graph().constant(a.value());
}

Var matmul(const Var& a, const Var& b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (bv.rank() != 2) throw ShapeError("matmul: right operand must be a matrix");
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("matmul: inner extents differ " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()));
  }
  Tensor out({n, m});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      const double x = av[r * k + i];
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out[r * m + j] += x * bv[i * m + j];
    }
  }
  return a.graph().record("matmul", std::move(out), {a, b}, [a, b, n, k, m](Graph& g, const Tensor& go) {
    const auto& av = a.value();
    const auto& bv = b.value();
    if (a.requires_grad()) {
      Tensor ga(av.shape());
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += go[r * m + j] * bv[i * m + j];
          ga[r * k + i] = s;
        }
      }
      g.accumulate(a, ga);
    }
    if (b.requires_grad()) g.accumulate(b, transpose_matmul_lhs(av, go, k, m));
  });
}

Var add_row(const Var& x, const Var& row) {
  const auto& xv = x.value();
  const auto& rv = row.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  if (rv.size() != m) throw ShapeError("add_row: row length mismatch");
  Tensor out = xv;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] += rv[j];
  return x.graph().record("add_row", std::move(out), {x, row}, [x, row, n, m](Graph& g, const Tensor& go) {
    g.accumulate(x, go);
    if (row.requires_grad()) {
      Tensor gr = Tensor::zeros_like(row.value());
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < m; ++j) gr[j] += go[r * m + j];
      g.accumulate(row, gr);
    }
  });
}

Var mul_row(const Var& x, const Var& row) {
  const auto& xv = x.value();
  const auto& rv = row.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  if (rv.size() != m) throw ShapeError("mul_row: row length mismatch");
  Tensor out = xv;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] *= rv[j];
  return x.graph().record("mul_row", std::move(out), {x, row}, [x, row, n, m](Graph& g, const Tensor& go) {
    const auto& xv = x.value();
    const auto& rv = row.value();
    if (x.requires_grad()) {
      Tensor gx = go;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < m; ++j) gx[r * m + j] *= rv[j];
      g.accumulate(x, gx);
    }
    if (row.requires_grad()) {
      Tensor gr = Tensor::zeros_like(rv);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < m; ++j) gr[j] += go[r * m + j] * xv[r * m + j];
      g.accumulate(row, gr);
    }
  });
}

Var scale_rows(const Var& x, std::span<const double> weights) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  if (weights.size() != n) throw ShapeError("scale_rows: one weight per row required");
  std::vector<double> w(weights.begin(), weights.end());
  Tensor out = xv;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] *= w[r];
  return x.graph().record("scale_rows", std::move(out), {x}, [x, w, n, m](Graph& g, const Tensor& go) {
    Tensor gx = go;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < m; ++j) gx[r * m + j] *= w[r];
    g.accumulate(x, gx);
  });
}

Var gather_rows(const Var& x, std::span<const std::size_t> indices) {
  const auto& xv = x.value();
  const std::size_t rows = xv.rows(), m = xv.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  if (idx.empty()) throw ShapeError("gather_rows: no indices");
  Tensor out({idx.size(), m});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= rows) throw std::out_of_range("gather_rows: index " + std::to_string(idx[r]));
    std::copy_n(xv.values().begin() + static_cast<std::ptrdiff_t>(idx[r] * m), m,
                out.values().begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  return x.graph().record("gather_rows", std::move(out), {x}, [x, idx, m](Graph& g, const Tensor& go) {
    Tensor gx = Tensor::zeros_like(x.value());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < m; ++j) gx[idx[r] * m + j] += go[r * m + j];
    g.accumulate(x, gx);
  });
}

Var embedding_bag_mean(const Var& table, const std::vector<std::vector<std::size_t>>& bags) {
  const auto& tv = table.value();
  const std::size_t vocab = tv.rows(), m = tv.cols();
  if (bags.empty()) throw ShapeError("embedding_bag_mean: no bags");
  Tensor out({bags.size(), m});
  for (std::size_t r = 0; r < bags.size(); ++r) {
    if (bags[r].empty()) throw ShapeError("embedding_bag_mean: empty token sequence");
    const double inv = 1.0 / static_cast<double>(bags[r].size());
    for (auto id : bags[r]) {
      if (id >= vocab) throw std::out_of_range("embedding_bag_mean: token id " + std::to_string(id));
      for (std::size_t j = 0; j < m; ++j) out[r * m + j] += tv[id * m + j] * inv;
    }
  }
  return table.graph().record("embedding_bag_mean", std::move(out), {table},
                              [table, bags, m](Graph& g, const Tensor& go) {
                                Tensor gt = Tensor::zeros_like(table.value());
                                for (std::size_t r = 0; r < bags.size(); ++r) {
                                  const double inv = 1.0 / static_cast<double>(bags[r].size());
                                  for (auto id : bags[r])
                                    for (std::size_t j = 0; j < m; ++j) gt[id * m + j] += go[r * m + j] * inv;
                                }
                                g.accumulate(table, gt);
                              });
}

Var l2_normalize_rows(const Var& x) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  std::vector<double> norms(n);
  Tensor out = xv;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += xv[r * m + j] * xv[r * m + j];
    norms[r] = std::max(std::sqrt(s), 1e-12);
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] /= norms[r];
  }
  Tensor y = out;
  return x.graph().record("l2_normalize_rows", std::move(out), {x},
                          [x, y, norms, n, m](Graph& g, const Tensor& go) {
                            // d(x/|x|) = (go - y (y . go)) / |x|
                            Tensor gx = Tensor::zeros_like(y);
                            for (std::size_t r = 0; r < n; ++r) {
                              double dot = 0.0;
                              for (std::size_t j = 0; j < m; ++j) dot += y[r * m + j] * go[r * m + j];
                              for (std::size_t j = 0; j < m; ++j)
                                gx[r * m + j] = (go[r * m + j] - y[r * m + j] * dot) / norms[r];
                            }
                            g.accumulate(x, gx);
                          });
}

Var row_dot(const Var& a, const Var& b) {
  require_same_shape(a, b, "row_dot");
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t n = av.rows(), m = av.cols();
  Tensor out({n, 1});
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += av[r * m + j] * bv[r * m + j];
    out[r] = s;
  }
  return a.graph().record("row_dot", std::move(out), {a, b}, [a, b, n, m](Graph& g, const Tensor& go) {
    const auto& av = a.value();
    const auto& bv = b.value();
    if (a.requires_grad()) {
      Tensor ga = Tensor::zeros_like(av);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < m; ++j) ga[r * m + j] = go[r] * bv[r * m + j];
      g.accumulate(a, ga);
    }
    if (b.requires_grad()) {
      Tensor gb = Tensor::zeros_like(bv);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < m; ++j) gb[r * m + j] = go[r] * av[r * m + j];
      g.accumulate(b, gb);
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const std::size_t n = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.value().rows() != n) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({n, total});
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& v = parts[p].value();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < widths[p]; ++j) out[r * total + offset + j] = v[r * widths[p] + j];
    offset += widths[p];
  }
  return parts.front().graph().record(
      "concat_cols", std::move(out), parts, [parts, widths, n, total](Graph& g, const Tensor& go) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < parts.size(); ++p) {
          if (parts[p].requires_grad()) {
            Tensor gp = Tensor::zeros_like(parts[p].value());
            for (std::size_t r = 0; r < n; ++r)
              for (std::size_t j = 0; j < widths[p]; ++j) gp[r * widths[p] + j] = go[r * total + offset + j];
            g.accumulate(parts[p], gp);
          }
          offset += widths[p];
        }
      });
}

Var dropout(const Var& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask = Tensor::zeros_like(x.value());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = keep(rng) ? keep_scale : 0.0;
  return mul(x, x.graph().constant(std::move(mask)));
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  const auto& lv = logits.value();
  const std::size_t n = lv.rows(), c = lv.cols();
  if (labels.size() != n) throw ShapeError("softmax_cross_entropy: one label per row required");
  Tensor probs = softmax_rows(lv);
  std::vector<int> y(labels.begin(), labels.end());
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (y[r] < 0 || static_cast<std::size_t>(y[r]) >= c) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(y[r]) + " outside [0," +
                              std::to_string(c) + ")");
    }
    double mx = lv[r * c];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, lv[r * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(lv[r * c + j] - mx);
    loss += (mx + std::log(z)) - lv[r * c + static_cast<std::size_t>(y[r])];
  }
  loss /= static_cast<double>(n);
  return logits.graph().record("softmax_cross_entropy", Tensor::scalar(loss), {logits},
                               [logits, probs, y, n, c](Graph& g, const Tensor& go) {
                                 Tensor gl = probs;
                                 for (std::size_t r = 0; r < n; ++r) gl[r * c + static_cast<std::size_t>(y[r])] -= 1.0;
                                 gl *= go[0] / static_cast<double>(n);
                                 g.accumulate(logits, gl);
                               });
}

Var bce_with_logits(const Var& logits, const Tensor& targets) {
  const auto& lv = logits.value();
  if (lv.size() != targets.size()) throw ShapeError("bce_with_logits: target count mismatch");
  for (double t : targets.values()) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("bce_with_logits: target outside [0,1]");
  }
  const double n = static_cast<double>(lv.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    // -[t log s(z) + (1-t) log(1 - s(z))] with log(1 - s(z)) = log s(-z)
    loss -= targets[i] * log_sigmoid(lv[i]) + (1.0 - targets[i]) * log_sigmoid(-lv[i]);
  }
  loss /= n;
  return logits.graph().record("bce_with_logits", Tensor::scalar(loss), {logits},
                               [logits, targets, n](Graph& g, const Tensor& go) {
                                 const auto& lv = logits.value();
                                 Tensor gl = Tensor::zeros_like(lv);
                                 for (std::size_t i = 0; i < lv.size(); ++i)
                                   gl[i] = (sigmoid(lv[i]) - targets[i]) * go[0] / n;
                                 g.accumulate(logits, gl);
                               });
}

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t n = logits.rows(), c = logits.cols();
  Tensor out = logits;
  for (std::size_t r = 0; r < n; ++r) {
    double mx = logits[r * c];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits[r * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[r * c + j] = std::exp(logits[r * c + j] - mx);
      z += out[r * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] /= z;
  }
  return out;
}

}  // namespace dcmi::ad
