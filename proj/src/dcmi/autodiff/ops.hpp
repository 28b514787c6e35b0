#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "dcmi/autodiff/graph.hpp"

namespace dcmi::ad {

// Elementwise, identical shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var square(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var log(const Var& a);
Var exp(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);

// Forward identity; contributes no gradient to anything upstream.
Var stop_gradient(const Var& a);

// (n x k) * (k x m). Rank-1 operands are treated as a single row.
Var matmul(const Var& a, const Var& b);
// Adds a length-m vector to every row of an (n x m) matrix.
Var add_row(const Var& x, const Var& row);
// Multiplies every row of an (n x m) matrix elementwise by a length-m vector.
Var mul_row(const Var& x, const Var& row);
// Multiplies row r of x by the constant weights[r].
Var scale_rows(const Var& x, std::span<const double> weights);
// Row r of the result is row indices[r] of x.
Var gather_rows(const Var& x, std::span<const std::size_t> indices);
// Row r of the result is the mean of the embedding rows listed in bags[r].
Var embedding_bag_mean(const Var& table, const std::vector<std::vector<std::size_t>>& bags);
// Divides every row by its l2 norm (norm floored at 1e-12).
Var l2_normalize_rows(const Var& x);
// Per-row dot product of two (n x m) matrices; result is (n x 1).
Var row_dot(const Var& a, const Var& b);
// Horizontal concatenation of matrices with equal row counts.
Var concat_cols(const std::vector<Var>& parts);

// Inverted dropout: keeps each entry with probability 1 - rate and rescales
// survivors by 1 / (1 - rate). Identity when rate == 0.
Var dropout(const Var& x, double rate, std::mt19937_64& rng);

// Mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);
// Mean over all entries of the binary cross-entropy between sigmoid(logits)
// and (possibly soft) targets in [0, 1]. Targets are constants.
Var bce_with_logits(const Var& logits, const Tensor& targets);

// Value-only helpers.
Tensor softmax_rows(const Tensor& logits);
double sigmoid(double x);
double log_sigmoid(double x);

}  // namespace dcmi::ad
