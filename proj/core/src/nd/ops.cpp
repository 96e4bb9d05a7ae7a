#include "ctrtab/nd/ops.hpp"

#include <Eigen/Core>
#include <cmath>

#include "ctrtab/error.hpp"

namespace ctrtab::nd {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Tensor& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
MutMap view(Tensor& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

Tape& common_tape(const Var& a, const Var& b, const char* op) {
  if (!a.valid() || !b.valid()) throw Error(std::string(op) + ": operand has no tape");
  if (a.tape() != b.tape()) throw Error(std::string(op) + ": operands live on different tapes");
  return *a.tape();
}

Tape& tape_of(const Var& a, const char* op) {
  if (!a.valid()) throw Error(std::string(op) + ": operand has no tape");
  return *a.tape();
}

void accumulate(std::vector<Tensor>& adj, std::size_t id, Tensor g) {
  Tensor& slot = adj[id];
  if (slot.empty()) {
    slot = std::move(g);
    return;
  }
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += g[i];
}

// Column sums collapse a (m x n) gradient onto a broadcast (1 x n) operand.
Tensor column_sums(const Tensor& g) {
  Tensor out = Tensor::zeros(1, g.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) out[c] += g(r, c);
  return out;
}

enum class Broadcast { none, rhs_row, lhs_row };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols()) {
    if (b.rows() == 1) return Broadcast::rhs_row;
    if (a.rows() == 1) return Broadcast::lhs_row;
  }
  throw DimensionError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                       " are not broadcast-compatible");
}

Tensor broadcast_combine(const Tensor& a, const Tensor& b, Broadcast kind, double sign) {
  switch (kind) {
    case Broadcast::none: {
      Tensor out = a;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * b[i];
      return out;
    }
    case Broadcast::rhs_row: {
      Tensor out = a;
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += sign * b[c];
      return out;
    }
    case Broadcast::lhs_row: {
      Tensor out = Tensor::zeros(b.rows(), b.cols());
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) = a[c] + sign * b(r, c);
      return out;
    }
  }
  return {};
}

Var add_or_sub(const Var& a, const Var& b, double sign, const char* op) {
  Tape& tape = common_tape(a, b, op);
  const Broadcast kind = broadcast_kind(a.value(), b.value(), op);
  Tensor out = broadcast_combine(a.value(), b.value(), kind, sign);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib},
                     [ia, ib, kind, sign](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
                       if (t.needs_grad(ia)) accumulate(adj, ia, kind == Broadcast::lhs_row ? column_sums(g) : g);
                       if (t.needs_grad(ib)) {
                         Tensor gb = kind == Broadcast::rhs_row ? column_sums(g) : g;
                         if (sign != 1.0)
                           for (auto& v : gb.data()) v *= sign;
                         accumulate(adj, ib, std::move(gb));
                       }
                     });
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) { return x * sigmoid(x); }

double silu_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = common_tape(a, b, "matmul");
  Tensor out = matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor ga = Tensor::zeros(av.rows(), av.cols());
      if (!ga.empty() && g.cols() > 0) view(ga).noalias() = view(g) * view(bv).transpose();
      accumulate(adj, ia, std::move(ga));
    }
    if (t.needs_grad(ib)) {
      Tensor gb = Tensor::zeros(bv.rows(), bv.cols());
      if (!gb.empty() && g.rows() > 0) view(gb).noalias() = view(av).transpose() * view(g);
      accumulate(adj, ib, std::move(gb));
    }
  });
}

Var add(const Var& a, const Var& b) { return add_or_sub(a, b, 1.0, "add"); }

Var sub(const Var& a, const Var& b) { return add_or_sub(a, b, -1.0, "sub"); }

Var mul(const Var& a, const Var& b) {
  Tape& tape = common_tape(a, b, "mul");
  Tensor out = hadamard(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
    if (t.needs_grad(ia)) accumulate(adj, ia, hadamard(g, t.value(ib)));
    if (t.needs_grad(ib)) accumulate(adj, ib, hadamard(g, t.value(ia)));
  });
}

Var mul_row(const Var& x, const Var& row) {
  Tape& tape = common_tape(x, row, "mul_row");
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != xv.cols())
    throw DimensionError("mul_row: expected 1x" + std::to_string(xv.cols()) + " row, got " + to_string(rv.shape()));
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= rv[c];
  const std::size_t ix = x.id(), ir = row.id();
  return tape.record(std::move(out), {ix, ir}, [ix, ir](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
    const Tensor& xv = t.value(ix);
    const Tensor& rv = t.value(ir);
    if (t.needs_grad(ix)) {
      Tensor gx = g;
      for (std::size_t r = 0; r < gx.rows(); ++r)
        for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) *= rv[c];
      accumulate(adj, ix, std::move(gx));
    }
    if (t.needs_grad(ir)) accumulate(adj, ir, column_sums(hadamard(g, xv)));
  });
}

Var scale(const Var& a, double s) {
  Tape& tape = tape_of(a, "scale");
  const std::size_t ia = a.id();
  return tape.record(s * a.value(), {ia}, [ia, s](const Tape&, const Tensor& g, std::vector<Tensor>& adj) {
    accumulate(adj, ia, s * g);
  });
}

Var silu(const Var& x) {
  Tape& tape = tape_of(x, "silu");
  Tensor out = x.value();
  for (auto& v : out.data()) v = silu(v);
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {ix}, [ix](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
    const Tensor& xv = t.value(ix);
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= silu_derivative(xv[i]);
    accumulate(adj, ix, std::move(gx));
  });
}

Var mse(const Var& pred, const Var& target) {
  Tape& tape = common_tape(pred, target, "mse");
  require_same_shape(pred.value(), target.value(), "mse");
  const Tensor& p = pred.value();
  const Tensor& y = target.value();
  const double n = static_cast<double>(p.size());
  if (p.size() == 0) throw DimensionError("mse: empty operands");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - y[i];
    acc += d * d;
  }
  const std::size_t ip = pred.id(), iy = target.id();
  return tape.record(Tensor::scalar(acc / n), {ip, iy},
                     [ip, iy, n](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
                       const Tensor& pv = t.value(ip);
                       const Tensor& yv = t.value(iy);
                       Tensor d = pv - yv;
                       const double k = 2.0 * g[0] / n;
                       for (auto& v : d.data()) v *= k;
                       if (t.needs_grad(iy)) accumulate(adj, iy, -1.0 * d);
                       if (t.needs_grad(ip)) accumulate(adj, ip, std::move(d));
                     });
}

Var sum(const Var& x) {
  Tape& tape = tape_of(x, "sum");
  double acc = 0.0;
  for (double v : x.value().data()) acc += v;
  const std::size_t ix = x.id();
  return tape.record(Tensor::scalar(acc), {ix}, [ix](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
    accumulate(adj, ix, Tensor(t.value(ix).shape(), g[0]));
  });
}

Var sum_squares(const Var& x) {
  Tape& tape = tape_of(x, "sum_squares");
  const std::size_t ix = x.id();
  return tape.record(Tensor::scalar(frobenius_sq(x.value())), {ix},
                     [ix](const Tape& t, const Tensor& g, std::vector<Tensor>& adj) {
                       accumulate(adj, ix, (2.0 * g[0]) * t.value(ix));
                     });
}

Var linear(const Var& x, const Var& weight, const Var& bias) { return add(matmul(x, weight), bias); }

}  // namespace ctrtab::nd
