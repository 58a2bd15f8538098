#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace near {

// Paired proxy scores and accuracies for one benchmark. Lengths must match,
// n >= 2, no NaN.
struct PairedSample {
  std::vector<double> scores;
  std::vector<double> accuracies;

  PairedSample(std::vector<double> s, std::vector<double> a);
};

// Average ranks (1-based, ties averaged) of the values in descending order
// handled by ascending=false, ascending order otherwise.
std::vector<double> average_ranks(std::span<const double> values, bool ascending = true);

// Pearson correlation of the average-ranked data. Throws DegenerateSample if
// either list is constant.
double spearman_rho(const PairedSample& p);

// Kendall's tau-b via merge-sort inversion counting, O(n log n):
// (concordant - discordant) / sqrt((n0 - n1) (n0 - n2)) with the usual tie
// terms. Throws DegenerateSample if either list is constant.
double kendall_tau(const PairedSample& p);

// Monte-Carlo estimate of P(score_i > score_j | accuracy_i > accuracy_j)
// over `pairs` uniformly drawn ordered pairs. Pairs with equal accuracies are
// redrawn. Deterministic given the seed.
double pairwise_win_probability(const PairedSample& p, std::uint64_t pairs,
                                std::uint64_t seed);

// Per-method mean rank across tables, ranking methods within each table by
// descending correlation (ties averaged). Every table must contain the same
// method set, otherwise InconsistentMethods.
std::map<std::string, double> average_rank(
    const std::vector<std::map<std::string, double>>& tables);

}  // namespace near
