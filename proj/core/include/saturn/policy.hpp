#pragma once

// Given-clause scoring: bilinear attention between a proof-state summary and each
// unprocessed clause, turned into a temperature softmax.

#include <span>
#include <vector>

#include "saturn/rng.hpp"
#include "saturn/tensor.hpp"

namespace saturn {

/// Mean of the processed-clause embeddings; the mean of `fallback` when `processed` is
/// empty; the zero vector when both are empty.
Vector state_summary(std::span<const Vector> processed, std::span<const Vector> fallback, std::size_t dim);

/// s_i = u_i . (W_a state). Throws ConfigError on an empty candidate list.
std::vector<double> score(std::span<const double> state, std::span<const Vector> candidates, const Tensor& w_a);

/// exp(s_i / t - m) / sum_j exp(s_j / t - m) with m = max_j s_j / t. Throws ConfigError
/// for t <= 0.
std::vector<double> softmax_t(std::span<const double> scores, double temperature);

/// log softmax_t(scores)[index], computed without forming the probabilities.
double log_softmax_t(std::span<const double> scores, double temperature, std::size_t index);

enum class SelectMode { Sample, Greedy };

/// Greedy: argmax, lowest index on ties. Sample: inverse-CDF draw from `rng`.
std::size_t select(std::span<const double> probabilities, SelectMode mode, Rng& rng);

}  // namespace saturn
