#pragma once

#include "ctrtab/nd/tape.hpp"

// Differentiable primitives. All operands must live on the same tape.
namespace ctrtab::nd {

Var matmul(const Var& a, const Var& b);

// a + b for equal shapes, or (m x n) + (1 x n) row broadcast in either order.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// (m x n) * (1 x n), each column scaled by the matching row entry.
Var mul_row(const Var& x, const Var& row);
Var scale(const Var& a, double s);

// x * sigmoid(x), element-wise.
Var silu(const Var& x);

// Mean of squared element-wise differences; returns a 1x1 tensor.
Var mse(const Var& pred, const Var& target);
Var sum(const Var& x);
Var sum_squares(const Var& x);

// Dense layer: x * weight + bias, weight (in x out), bias (1 x out).
Var linear(const Var& x, const Var& weight, const Var& bias);

double sigmoid(double x);
double silu(double x);
double silu_derivative(double x);

}  // namespace ctrtab::nd
