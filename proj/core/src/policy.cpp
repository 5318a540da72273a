#include "saturn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saturn/error.hpp"

namespace saturn {

Vector state_summary(std::span<const Vector> processed, std::span<const Vector> fallback, std::size_t dim) {
  const auto source = processed.empty() ? fallback : processed;
  Vector mean(dim, 0.0);
  if (source.empty()) return mean;
  for (const auto& v : source) axpy(1.0, v, mean);
  const double inv = 1.0 / static_cast<double>(source.size());
  for (auto& x : mean) x *= inv;
  return mean;
}

std::vector<double> score(std::span<const double> state, std::span<const Vector> candidates, const Tensor& w_a) {
  if (candidates.empty()) throw ConfigError("cannot score an empty candidate list");
  Vector query(w_a.rows, 0.0);
  gemv_acc(w_a, state, query);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& u : candidates) out.push_back(dot(u, query));
  return out;
}

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
}

}  // namespace

std::vector<double> softmax_t(std::span<const double> scores, double temperature) {
  check_temperature(temperature);
  if (scores.empty()) return {};
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s / temperature);
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] / temperature - m);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

double log_softmax_t(std::span<const double> scores, double temperature, std::size_t index) {
  check_temperature(temperature);
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s / temperature);
  double total = 0.0;
  for (double s : scores) total += std::exp(s / temperature - m);
  return scores[index] / temperature - m - std::log(total);
}

std::size_t select(std::span<const double> probabilities, SelectMode mode, Rng& rng) {
  if (probabilities.empty()) throw ConfigError("cannot select from an empty distribution");
  if (mode == SelectMode::Greedy) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i) {
      if (probabilities[i] > probabilities[best]) best = i;
    }
    return best;
  }
  const double r = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (r < acc) return i;
  }
  // Rounding left r above the cumulative sum; take the last index with mass.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

}  // namespace saturn
