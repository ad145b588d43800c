#include "ad/ops.hpp"

#include <cmath>

#include "core/image.hpp"
#include "core/kernels.hpp"

namespace svr::ad {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void accum(Tensor& g, const Tensor& d) {
  for (size_t i = 0; i < g.numel(); ++i) g[i] += d[i];
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Elementwise unary: f(x) -> y, d(x, y) -> dy/dx.
template <class F, class D>
Var unary(Tape& t, Var a, F f, D d) {
  const Tensor& x = t.val(a);
  Tensor y(x.shape());
  for (size_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  return t.node(std::move(y), {a.id},
                [d](Tape& tp, int id) {
                  const Tensor& g = tp.grad_by_id(id);
                  const int pa = tp.parents(id)[0];
                  if (!tp.requires_grad(Var{pa})) return;
                  const Tensor& x = tp.val(Var{pa});
                  const Tensor& y = tp.val(Var{id});
                  Tensor& ga = tp.grad_by_id(pa);
                  for (size_t i = 0; i < x.numel(); ++i) ga[i] += g[i] * d(x[i], y[i]);
                });
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.same_shape(xb), "add: shape mismatch");
  Tensor y(xa.shape());
  for (size_t i = 0; i < y.numel(); ++i) y[i] = xa[i] + xb[i];
  return t.node(std::move(y), {a.id, b.id}, [](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    for (int p : tp.parents(id))
      if (tp.requires_grad(Var{p})) accum(tp.grad_by_id(p), g);
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.same_shape(xb), "sub: shape mismatch");
  Tensor y(xa.shape());
  for (size_t i = 0; i < y.numel(); ++i) y[i] = xa[i] - xb[i];
  return t.node(std::move(y), {a.id, b.id}, [](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    if (tp.requires_grad(Var{ps[0]})) accum(tp.grad_by_id(ps[0]), g);
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      for (size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.same_shape(xb), "mul: shape mismatch");
  Tensor y(xa.shape());
  for (size_t i = 0; i < y.numel(); ++i) y[i] = xa[i] * xb[i];
  return t.node(std::move(y), {a.id, b.id}, [](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    const Tensor& xa = tp.val(Var{ps[0]});
    const Tensor& xb = tp.val(Var{ps[1]});
    if (tp.requires_grad(Var{ps[0]})) {
      Tensor& ga = tp.grad_by_id(ps[0]);
      for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * xb[i];
    }
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      for (size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * xa[i];
    }
  });
}

Var div(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.same_shape(xb), "div: shape mismatch");
  Tensor y(xa.shape());
  for (size_t i = 0; i < y.numel(); ++i) y[i] = xa[i] / xb[i];
  return t.node(std::move(y), {a.id, b.id}, [](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    const Tensor& xa = tp.val(Var{ps[0]});
    const Tensor& xb = tp.val(Var{ps[1]});
    if (tp.requires_grad(Var{ps[0]})) {
      Tensor& ga = tp.grad_by_id(ps[0]);
      for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / xb[i];
    }
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      for (size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i] * xa[i] / (xb[i] * xb[i]);
    }
  });
}

Var scale(Tape& t, Var a, double s) {
  return unary(t, a, [s](double x) { return x * s; },
               [s](double, double) { return s; });
}

Var add_scalar(Tape& t, Var a, double s) {
  return unary(t, a, [s](double x) { return x + s; },
               [](double, double) { return 1.0; });
}

Var relu(Tape& t, Var a) {
  return unary(t, a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Tape& t, Var a) {
  return unary(
      t, a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476)); },
      [](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865476));
        const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;
        return cdf + x * pdf;
      });
}

Var sigmoid(Tape& t, Var a) {
  return unary(t, a, [](double x) { return stable_sigmoid(x); },
               [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Tape& t, Var a) {
  return unary(t, a,
               [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
               [](double x, double) { return stable_sigmoid(x); });
}

Var sqrt_stable(Tape& t, Var a, double eps) {
  return unary(t, a, [eps](double x) { return std::sqrt(x + eps); },
               [](double, double y) { return 0.5 / y; });
}

Var matmul(Tape& t, Var a, Var b, bool trans_a, bool trans_b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.rank() == 2 && xb.rank() == 2, "matmul: rank-2 operands required");
  const int m = trans_a ? xa.dim(1) : xa.dim(0);
  const int k = trans_a ? xa.dim(0) : xa.dim(1);
  const int k2 = trans_b ? xb.dim(1) : xb.dim(0);
  const int n = trans_b ? xb.dim(0) : xb.dim(1);
  require(k == k2, "matmul: inner dimension mismatch");
  Tensor y({m, n});
  kernels::gemm(xa.data(), xb.data(), y.data(), m, k, n, trans_a, trans_b, 0.0);
  return t.node(std::move(y), {a.id, b.id}, [m, k, n, trans_a, trans_b](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    const Tensor& xa = tp.val(Var{ps[0]});
    const Tensor& xb = tp.val(Var{ps[1]});
    if (tp.requires_grad(Var{ps[0]})) {
      Tensor& ga = tp.grad_by_id(ps[0]);
      if (!trans_a) {
        // dA (m,k) = g * op(B)^T
        kernels::gemm(g.data(), xb.data(), ga.data(), m, n, k, false, !trans_b, 1.0);
      } else {
        // dA_stored (k,m) = op(B) * g^T
        kernels::gemm(xb.data(), g.data(), ga.data(), k, n, m, trans_b, true, 1.0);
      }
    }
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      if (!trans_b) {
        // dB (k,n) = op(A)^T * g
        kernels::gemm(xa.data(), g.data(), gb.data(), k, m, n, !trans_a, false, 1.0);
      } else {
        // dB_stored (n,k) = g^T * op(A)
        kernels::gemm(g.data(), xa.data(), gb.data(), n, m, k, true, trans_a, 1.0);
      }
    }
  });
}

Var add_rowvec(Tape& t, Var a, Var v) {
  const Tensor& xa = t.val(a);
  const Tensor& xv = t.val(v);
  require(xa.rank() == 2 && static_cast<int>(xv.numel()) == xa.dim(1),
          "add_rowvec: vector length must match columns");
  const int m = xa.dim(0), n = xa.dim(1);
  Tensor y({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y.at(i, j) = xa.at(i, j) + xv[static_cast<size_t>(j)];
  return t.node(std::move(y), {a.id, v.id}, [m, n](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    if (tp.requires_grad(Var{ps[0]})) accum(tp.grad_by_id(ps[0]), g);
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gv = tp.grad_by_id(ps[1]);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gv[static_cast<size_t>(j)] += g.at(i, j);
    }
  });
}

Var linear(Tape& t, Var x, Var w, Var bias) {
  return add_rowvec(t, matmul(t, x, w), bias);
}

Var softmax_rows(Tape& t, Var a) {
  const Tensor& x = t.val(a);
  require(x.rank() == 2, "softmax_rows: rank-2 input required");
  const int m = x.dim(0), n = x.dim(1);
  Tensor y({m, n});
  for (int i = 0; i < m; ++i) {
    double mx = x.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, x.at(i, j));
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = std::exp(x.at(i, j) - mx);
      y.at(i, j) = e;
      s += e;
    }
    for (int j = 0; j < n; ++j) y.at(i, j) /= s;
  }
  return t.node(std::move(y), {a.id}, [m, n](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    const Tensor& y = tp.val(Var{id});
    Tensor& ga = tp.grad_by_id(pa);
    for (int i = 0; i < m; ++i) {
      double gy = 0.0;
      for (int j = 0; j < n; ++j) gy += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < n; ++j) ga.at(i, j) += y.at(i, j) * (g.at(i, j) - gy);
    }
  });
}

Var layernorm_rows(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = t.val(x);
  require(xv.rank() == 2, "layernorm_rows: rank-2 input required");
  const int m = xv.dim(0), n = xv.dim(1);
  require(static_cast<int>(t.val(gain).numel()) == n &&
              static_cast<int>(t.val(bias).numel()) == n,
          "layernorm_rows: gain/bias length mismatch");
  const Tensor& gn = t.val(gain);
  const Tensor& bs = t.val(bias);
  Tensor y({m, n});
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += xv.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = xv.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j)
      y.at(i, j) = (xv.at(i, j) - mu) * inv * gn[static_cast<size_t>(j)] + bs[static_cast<size_t>(j)];
  }
  return t.node(std::move(y), {x.id, gain.id, bias.id}, [m, n, eps](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    const Tensor& xv = tp.val(Var{ps[0]});
    const Tensor& gn = tp.val(Var{ps[1]});
    const bool need_x = tp.requires_grad(Var{ps[0]});
    const bool need_gn = tp.requires_grad(Var{ps[1]});
    const bool need_bs = tp.requires_grad(Var{ps[2]});
    std::vector<double> xhat(static_cast<size_t>(n));
    for (int i = 0; i < m; ++i) {
      double mu = 0.0;
      for (int j = 0; j < n; ++j) mu += xv.at(i, j);
      mu /= n;
      double var = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = xv.at(i, j) - mu;
        var += d * d;
      }
      var /= n;
      const double inv = 1.0 / std::sqrt(var + eps);
      for (int j = 0; j < n; ++j) xhat[static_cast<size_t>(j)] = (xv.at(i, j) - mu) * inv;
      if (need_gn) {
        Tensor& gg = tp.grad_by_id(ps[1]);
        for (int j = 0; j < n; ++j)
          gg[static_cast<size_t>(j)] += g.at(i, j) * xhat[static_cast<size_t>(j)];
      }
      if (need_bs) {
        Tensor& gb = tp.grad_by_id(ps[2]);
        for (int j = 0; j < n; ++j) gb[static_cast<size_t>(j)] += g.at(i, j);
      }
      if (need_x) {
        Tensor& gx = tp.grad_by_id(ps[0]);
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double dxh = g.at(i, j) * gn[static_cast<size_t>(j)];
          s1 += dxh;
          s2 += dxh * xhat[static_cast<size_t>(j)];
        }
        s1 /= n;
        s2 /= n;
        for (int j = 0; j < n; ++j) {
          const double dxh = g.at(i, j) * gn[static_cast<size_t>(j)];
          gx.at(i, j) += inv * (dxh - s1 - xhat[static_cast<size_t>(j)] * s2);
        }
      }
    }
  });
}

Var sum(Tape& t, Var a) {
  const Tensor& x = t.val(a);
  Tensor y = Tensor::scalar(x.sum());
  return t.node(std::move(y), {a.id}, [](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const double g = tp.grad_by_id(id)[0];
    Tensor& ga = tp.grad_by_id(pa);
    for (size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

Var mean(Tape& t, Var a) {
  const Tensor& x = t.val(a);
  require(x.numel() > 0, "mean: empty tensor");
  Tensor y = Tensor::scalar(x.sum() / static_cast<double>(x.numel()));
  return t.node(std::move(y), {a.id}, [](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    Tensor& ga = tp.grad_by_id(pa);
    const double g = tp.grad_by_id(id)[0] / static_cast<double>(ga.numel());
    for (size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

Var dot(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.numel() == xb.numel(), "dot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < xa.numel(); ++i) s += xa[i] * xb[i];
  return t.node(Tensor::scalar(s), {a.id, b.id}, [](Tape& tp, int id) {
    const double g = tp.grad_by_id(id)[0];
    const auto& ps = tp.parents(id);
    const Tensor& xa = tp.val(Var{ps[0]});
    const Tensor& xb = tp.val(Var{ps[1]});
    if (tp.requires_grad(Var{ps[0]})) {
      Tensor& ga = tp.grad_by_id(ps[0]);
      for (size_t i = 0; i < ga.numel(); ++i) ga[i] += g * xb[i];
    }
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      for (size_t i = 0; i < gb.numel(); ++i) gb[i] += g * xa[i];
    }
  });
}

Var mse(Tape& t, Var a, Var b) {
  const Tensor& xa = t.val(a);
  const Tensor& xb = t.val(b);
  require(xa.numel() == xb.numel() && xa.numel() > 0, "mse: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < xa.numel(); ++i) {
    const double d = xa[i] - xb[i];
    s += d * d;
  }
  const double inv_n = 1.0 / static_cast<double>(xa.numel());
  return t.node(Tensor::scalar(s * inv_n), {a.id, b.id}, [inv_n](Tape& tp, int id) {
    const double g = tp.grad_by_id(id)[0];
    const auto& ps = tp.parents(id);
    const Tensor& xa = tp.val(Var{ps[0]});
    const Tensor& xb = tp.val(Var{ps[1]});
    const double c = 2.0 * inv_n * g;
    if (tp.requires_grad(Var{ps[0]})) {
      Tensor& ga = tp.grad_by_id(ps[0]);
      for (size_t i = 0; i < ga.numel(); ++i) ga[i] += c * (xa[i] - xb[i]);
    }
    if (tp.requires_grad(Var{ps[1]})) {
      Tensor& gb = tp.grad_by_id(ps[1]);
      for (size_t i = 0; i < gb.numel(); ++i) gb[i] -= c * (xa[i] - xb[i]);
    }
  });
}

Var l2_normalize(Tape& t, Var a, double eps) {
  const Tensor& x = t.val(a);
  double ss = eps;
  for (size_t i = 0; i < x.numel(); ++i) ss += x[i] * x[i];
  const double nrm = std::sqrt(ss);
  Tensor y(x.shape());
  for (size_t i = 0; i < x.numel(); ++i) y[i] = x[i] / nrm;
  return t.node(std::move(y), {a.id}, [nrm](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    const Tensor& x = tp.val(Var{pa});
    Tensor& ga = tp.grad_by_id(pa);
    double gx = 0.0;
    for (size_t i = 0; i < x.numel(); ++i) gx += g[i] * x[i];
    const double n3 = nrm * nrm * nrm;
    for (size_t i = 0; i < x.numel(); ++i) ga[i] += g[i] / nrm - x[i] * gx / n3;
  });
}

Var reshape(Tape& t, Var a, std::vector<int> shape) {
  Tensor y = t.val(a).reshaped(std::move(shape));
  return t.node(std::move(y), {a.id}, [](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& ga = tp.grad_by_id(pa);
    for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
}

Var slice_cols(Tape& t, Var a, int c0, int len) {
  const Tensor& x = t.val(a);
  require(x.rank() == 2, "slice_cols: rank-2 input required");
  const int m = x.dim(0), n = x.dim(1);
  require(c0 >= 0 && len > 0 && c0 + len <= n, "slice_cols: out of range");
  Tensor y({m, len});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < len; ++j) y.at(i, j) = x.at(i, c0 + j);
  return t.node(std::move(y), {a.id}, [m, n, c0, len](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& ga = tp.grad_by_id(pa);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < len; ++j) ga.at(i, c0 + j) += g.at(i, j);
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: empty list");
  const int m = t.val(parts[0]).dim(0);
  int n = 0;
  std::vector<int> widths;
  std::vector<int> parents;
  for (Var p : parts) {
    const Tensor& x = t.val(p);
    require(x.rank() == 2 && x.dim(0) == m, "concat_cols: row mismatch");
    widths.push_back(x.dim(1));
    parents.push_back(p.id);
    n += x.dim(1);
  }
  Tensor y({m, n});
  int off = 0;
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor& x = t.val(parts[pi]);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < widths[pi]; ++j) y.at(i, off + j) = x.at(i, j);
    off += widths[pi];
  }
  return t.node(std::move(y), std::move(parents), [m, widths](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    int off = 0;
    for (size_t pi = 0; pi < ps.size(); ++pi) {
      if (tp.requires_grad(Var{ps[pi]})) {
        Tensor& gp = tp.grad_by_id(ps[pi]);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < widths[pi]; ++j) gp.at(i, j) += g.at(i, off + j);
      }
      off += widths[pi];
    }
  });
}

Var concat_flat(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_flat: empty list");
  size_t total = 0;
  std::vector<int> parents;
  std::vector<size_t> sizes;
  for (Var p : parts) {
    sizes.push_back(t.val(p).numel());
    parents.push_back(p.id);
    total += t.val(p).numel();
  }
  Tensor y({static_cast<int>(total)});
  size_t off = 0;
  for (Var p : parts) {
    const Tensor& x = t.val(p);
    for (size_t i = 0; i < x.numel(); ++i) y[off + i] = x[i];
    off += x.numel();
  }
  return t.node(std::move(y), std::move(parents), [sizes](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    size_t off = 0;
    for (size_t pi = 0; pi < ps.size(); ++pi) {
      if (tp.requires_grad(Var{ps[pi]})) {
        Tensor& gp = tp.grad_by_id(ps[pi]);
        for (size_t i = 0; i < sizes[pi]; ++i) gp[i] += g[off + i];
      }
      off += sizes[pi];
    }
  });
}

namespace {
int img_channels(const Tensor& x) { return x.rank() == 3 ? x.dim(2) : 1; }
}  // namespace

Var im2col(Tape& t, Var img, int kh, int kw, int stride, int pad) {
  const Tensor& x = t.val(img);
  require(x.rank() == 2 || x.rank() == 3, "im2col: (H,W) or (H,W,C) required");
  const int h = x.dim(0), w = x.dim(1), c = img_channels(x);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  require(oh > 0 && ow > 0, "im2col: kernel larger than padded image");
  Tensor y({oh * ow, kh * kw * c});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const int r = oy * ow + ox;
      for (int ki = 0; ki < kh; ++ki)
        for (int kj = 0; kj < kw; ++kj) {
          const int iy = oy * stride - pad + ki;
          const int ix = ox * stride - pad + kj;
          for (int ch = 0; ch < c; ++ch) {
            double v = 0.0;
            if (iy >= 0 && iy < h && ix >= 0 && ix < w)
              v = x.data()[(static_cast<size_t>(iy) * w + ix) * c + ch];
            y.at(r, (ki * kw + kj) * c + ch) = v;
          }
        }
    }
  return t.node(std::move(y), {img.id}, [h, w, c, kh, kw, stride, pad, oh, ow](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& gi = tp.grad_by_id(pa);
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const int r = oy * ow + ox;
        for (int ki = 0; ki < kh; ++ki)
          for (int kj = 0; kj < kw; ++kj) {
            const int iy = oy * stride - pad + ki;
            const int ix = ox * stride - pad + kj;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ch = 0; ch < c; ++ch)
              gi.data()[(static_cast<size_t>(iy) * w + ix) * c + ch] +=
                  g.at(r, (ki * kw + kj) * c + ch);
          }
      }
  });
}

Var bilinear_resize(Tape& t, Var img, int out_h, int out_w) {
  const Tensor& x = t.val(img);
  require(x.rank() == 2 || x.rank() == 3, "bilinear_resize: image input required");
  const int h = x.dim(0), w = x.dim(1), c = img_channels(x);
  Tensor y = core::resize_bilinear(x, out_h, out_w);
  return t.node(std::move(y), {img.id}, [h, w, c, out_h, out_w](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& gi = tp.grad_by_id(pa);
    for (int i = 0; i < out_h; ++i) {
      const core::ResizeTap ty = core::resize_tap(i, h, out_h);
      for (int j = 0; j < out_w; ++j) {
        const core::ResizeTap tx = core::resize_tap(j, w, out_w);
        for (int ch = 0; ch < c; ++ch) {
          const double gv = g.data()[(static_cast<size_t>(i) * out_w + j) * c + ch];
          gi.data()[(static_cast<size_t>(ty.i0) * w + tx.i0) * c + ch] +=
              (1.0 - ty.f) * (1.0 - tx.f) * gv;
          gi.data()[(static_cast<size_t>(ty.i0) * w + tx.i1) * c + ch] +=
              (1.0 - ty.f) * tx.f * gv;
          gi.data()[(static_cast<size_t>(ty.i1) * w + tx.i0) * c + ch] +=
              ty.f * (1.0 - tx.f) * gv;
          gi.data()[(static_cast<size_t>(ty.i1) * w + tx.i1) * c + ch] += ty.f * tx.f * gv;
        }
      }
    }
  });
}

Var block_mean(Tape& t, Var img, int bh, int bw) {
  const Tensor& x = t.val(img);
  require(x.rank() == 2 || x.rank() == 3, "block_mean: image input required");
  const int h = x.dim(0), w = x.dim(1), c = img_channels(x);
  require(h % bh == 0 && w % bw == 0, "block_mean: size must divide evenly");
  const int oh = h / bh, ow = w / bw;
  std::vector<int> out_shape =
      x.rank() == 2 ? std::vector<int>{oh, ow} : std::vector<int>{oh, ow, c};
  Tensor y(out_shape);
  const double inv = 1.0 / (bh * bw);
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j)
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int di = 0; di < bh; ++di)
          for (int dj = 0; dj < bw; ++dj)
            s += x.data()[(static_cast<size_t>(i * bh + di) * w + (j * bw + dj)) * c + ch];
        y.data()[(static_cast<size_t>(i) * ow + j) * c + ch] = s * inv;
      }
  return t.node(std::move(y), {img.id}, [h, w, c, bh, bw, oh, ow, inv](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& gi = tp.grad_by_id(pa);
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        for (int ch = 0; ch < c; ++ch) {
          const double gv = g.data()[(static_cast<size_t>(i) * ow + j) * c + ch] * inv;
          for (int di = 0; di < bh; ++di)
            for (int dj = 0; dj < bw; ++dj)
              gi.data()[(static_cast<size_t>(i * bh + di) * w + (j * bw + dj)) * c + ch] += gv;
        }
  });
}

Var triplane_sample(Tape& t, Var planes, std::shared_ptr<const Tensor> points) {
  const Tensor& p = t.val(planes);
  require(p.rank() == 4 && p.dim(0) == 3, "triplane_sample: planes must be (3,h,w,c)");
  require(points && points->rank() == 2 && points->dim(1) == 3,
          "triplane_sample: points must be (n,3)");
  const int h = p.dim(1), w = p.dim(2), c = p.dim(3);
  const int n = points->dim(0);
  Tensor y({n, c});
  kernels::triplane_gather(p.data(), h, w, c, points->data(), n, y.data());
  return t.node(std::move(y), {planes.id}, [h, w, c, n, points](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& gp = tp.grad_by_id(pa);
    kernels::triplane_scatter(points->data(), n, g.data(), h, w, c, gp.data());
  });
}

Var composite_rays(Tape& t, Var sigma, Var rgb, int n_rays, int n_samples, double delta) {
  const Tensor& s = t.val(sigma);
  const Tensor& c = t.val(rgb);
  require(static_cast<int>(s.numel()) == n_rays * n_samples,
          "composite_rays: sigma size mismatch");
  require(c.rank() == 2 && c.dim(0) == n_rays * n_samples && c.dim(1) == 3,
          "composite_rays: rgb must be (P,3)");
  Tensor y({n_rays, 4});
  kernels::composite_forward(s.data(), c.data(), n_rays, n_samples, delta, y.data());
  return t.node(std::move(y), {sigma.id, rgb.id}, [n_rays, n_samples, delta](Tape& tp, int id) {
    const Tensor& g = tp.grad_by_id(id);
    const auto& ps = tp.parents(id);
    const Tensor& s = tp.val(Var{ps[0]});
    const Tensor& c = tp.val(Var{ps[1]});
    Tensor& gs = tp.grad_by_id(ps[0]);
    Tensor& gc = tp.grad_by_id(ps[1]);
    kernels::composite_backward(s.data(), c.data(), n_rays, n_samples, delta, g.data(),
                                gs.data(), gc.data());
  });
}

Var composite_over(Tape& t, Var rgba, const std::array<double, 3>& bg) {
  const Tensor& x = t.val(rgba);
  require(x.rank() == 2 && x.dim(1) == 4, "composite_over: (R,4) input required");
  const int r = x.dim(0);
  Tensor y({r, 3});
  for (int i = 0; i < r; ++i) {
    const double a = x.at(i, 3);
    for (int ch = 0; ch < 3; ++ch) y.at(i, ch) = x.at(i, ch) + (1.0 - a) * bg[static_cast<size_t>(ch)];
  }
  return t.node(std::move(y), {rgba.id}, [r, bg](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& ga = tp.grad_by_id(pa);
    for (int i = 0; i < r; ++i) {
      double da = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        ga.at(i, ch) += g.at(i, ch);
        da -= g.at(i, ch) * bg[static_cast<size_t>(ch)];
      }
      ga.at(i, 3) += da;
    }
  });
}

Var tokens_to_planes(Tape& t, Var tokens, int plane_size, int channels) {
  const Tensor& x = t.val(tokens);
  require(plane_size % 2 == 0, "tokens_to_planes: plane size must be even");
  const int q = plane_size / 2;
  require(x.rank() == 2 && x.dim(0) == 3 * q * q && x.dim(1) == 4 * channels,
          "tokens_to_planes: token grid mismatch");
  Tensor y({3, plane_size, plane_size, channels});
  const size_t plane_stride = static_cast<size_t>(plane_size) * plane_size * channels;
  for (int p = 0; p < 3; ++p)
    for (int pr = 0; pr < q; ++pr)
      for (int pc = 0; pc < q; ++pc) {
        const int row = (p * q + pr) * q + pc;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            for (int ch = 0; ch < channels; ++ch) {
              const size_t off = p * plane_stride +
                                 (static_cast<size_t>(2 * pr + dy) * plane_size + (2 * pc + dx)) *
                                     channels +
                                 ch;
              y[off] = x.at(row, (dy * 2 + dx) * channels + ch);
            }
      }
  return t.node(std::move(y), {tokens.id}, [q, plane_size, channels](Tape& tp, int id) {
    const int pa = tp.parents(id)[0];
    if (!tp.requires_grad(Var{pa})) return;
    const Tensor& g = tp.grad_by_id(id);
    Tensor& gt = tp.grad_by_id(pa);
    const size_t plane_stride = static_cast<size_t>(plane_size) * plane_size * channels;
    for (int p = 0; p < 3; ++p)
      for (int pr = 0; pr < q; ++pr)
        for (int pc = 0; pc < q; ++pc) {
          const int row = (p * q + pr) * q + pc;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              for (int ch = 0; ch < channels; ++ch) {
                const size_t off =
                    p * plane_stride +
                    (static_cast<size_t>(2 * pr + dy) * plane_size + (2 * pc + dx)) * channels +
                    ch;
                gt.at(row, (dy * 2 + dx) * channels + ch) += g[off];
              }
        }
  });
}

}  // namespace svr::ad
