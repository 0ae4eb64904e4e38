#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "epag/error.hpp"

namespace epag {

using Embedding = std::vector<double>;

struct LossConfig {
  double temperature = 0.2;
};

namespace detail {

inline double norm(const Embedding& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double checked_norm(const Embedding& v, const char* role) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n))
    raise(errc::zero_norm_embedding, std::string(role) + " embedding has zero or non-finite norm");
  return n;
}

inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size())
    raise(errc::length_mismatch, "embeddings have dimensions " + std::to_string(a.size()) +
                                     " and " + std::to_string(b.size()));
  return dot(a, b) / (checked_norm(a, "first") * checked_norm(b, "second"));
}

// log(sum_j exp(x_j)) with max subtraction
inline double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

struct NtXentResult {
  std::vector<double> per_sample;
  double mean = 0.0;
};

/// GraphCL contrastive loss over a batch of paired projections. Per sample:
///   l_i = -1/2 log softmax_j(sim(z1_i, z2_j)/tau)[i]
///         -1/2 log softmax_j(sim(z2_i, z1_j)/tau)[i]
/// Evaluated with max-subtracted log-sum-exp; tau = 0.2 already exponentiates
/// similarities by 5x.
inline NtXentResult nt_xent_loss(std::span<const Embedding> z1, std::span<const Embedding> z2,
                                 const LossConfig& cfg) {
  if (!(cfg.temperature > 0.0)) raise(errc::invalid_parameters, "temperature must be positive");
  if (z1.empty() || z1.size() != z2.size())
    raise(errc::length_mismatch, "nt_xent_loss needs equal-length nonempty batches (got " +
                                     std::to_string(z1.size()) + " and " + std::to_string(z2.size()) + ")");
  const std::size_t n = z1.size();
  // sim(z1_i, z2_j)/tau for all i,j
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = detail::cosine(z1[i], z2[j]) / cfg.temperature;

  NtXentResult result;
  result.per_sample.resize(n);
  std::vector<double> column(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) column[j] = a[j][i];
    const double row_term = detail::log_sum_exp(a[i]) - a[i][i];
    const double col_term = detail::log_sum_exp(column) - a[i][i];
    result.per_sample[i] = 0.5 * row_term + 0.5 * col_term;
    result.mean += result.per_sample[i];
  }
  result.mean /= static_cast<double>(n);
  return result;
}

/// D(p, stopgrad(z)) = -(p . z) / (|p| |z|). Stop-gradient is a training-time
/// annotation with no effect on the value.
inline double negative_cosine(const Embedding& p, const Embedding& z) {
  return -detail::cosine(p, z);
}

/// l = 1/2 D(p1, stopgrad(z2)) + 1/2 D(p2, stopgrad(z1)), in [-1, 1].
inline double simsiam_loss(const Embedding& p1, const Embedding& p2, const Embedding& z1,
                           const Embedding& z2) {
  return 0.5 * negative_cosine(p1, z2) + 0.5 * negative_cosine(p2, z1);
}

}  // namespace epag
