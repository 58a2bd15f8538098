#include "near/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "near/errors.hpp"
#include "near/rng.hpp"

namespace near {

PairedSample::PairedSample(std::vector<double> s, std::vector<double> a)
    : scores(std::move(s)), accuracies(std::move(a)) {
  if (scores.size() != accuracies.size()) {
    throw std::invalid_argument("paired sample lists differ in length");
  }
  if (scores.size() < 2) {
    throw std::invalid_argument("paired sample needs n >= 2");
  }
  for (double v : scores) {
    if (std::isnan(v)) throw NonFiniteInput("NaN in scores");
  }
  for (double v : accuracies) {
    if (std::isnan(v)) throw NonFiniteInput("NaN in accuracies");
  }
}

namespace {

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values, bool ascending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? values[a] < values[b] : values[a] > values[b];
  });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based ranks
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const PairedSample& p) {
  if (is_constant(p.scores) || is_constant(p.accuracies)) {
    throw DegenerateSample("constant list has no rank correlation");
  }
  const auto rx = average_ranks(p.scores);
  const auto ry = average_ranks(p.accuracies);

  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // ranks always average to this
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Counts strict inversions (a[i] > a[j] for i < j) while merge-sorting.
// Equal elements are taken from the left run first and contribute nothing.
std::uint64_t merge_count(std::vector<double>& a, std::vector<double>& buf,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);

  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      buf[k++] = a[j++];
      inv += mid - i;
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
  return inv;
}

std::uint64_t tie_pair_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::uint64_t pairs = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const std::uint64_t t = j - i + 1;
    pairs += t * (t - 1) / 2;
    i = j + 1;
  }
  return pairs;
}

}  // namespace

double kendall_tau(const PairedSample& p) {
  if (is_constant(p.scores) || is_constant(p.accuracies)) {
    throw DegenerateSample("constant list has no rank correlation");
  }
  const std::size_t n = p.scores.size();

  // Sort by x, breaking ties by y, so that (a) pairs inside an x-tie group
  // are never counted as inversions and (b) all cross-group pairs have
  // strictly increasing x.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (p.scores[a] != p.scores[b]) return p.scores[a] < p.scores[b];
    return p.accuracies[a] < p.accuracies[b];
  });

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = p.accuracies[order[i]];

  // Tie bookkeeping: n1 = tied-x pairs, n2 = tied-y pairs, n3 = pairs tied in
  // both (computed inside x-tie groups).
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && p.scores[order[j + 1]] == p.scores[order[i]]) ++j;
      const std::uint64_t t = j - i + 1;
      n1 += t * (t - 1) / 2;
      std::size_t a = i;
      while (a <= j) {
        std::size_t b = a;
        while (b + 1 <= j && y[b + 1] == y[a]) ++b;
        const std::uint64_t u = b - a + 1;
        n3 += u * (u - 1) / 2;
        a = b + 1;
      }
      i = j + 1;
    }
  }
  const std::uint64_t n2 = tie_pair_count(p.accuracies);

  std::vector<double> buf(n);
  const std::uint64_t discordant = merge_count(y, buf, 0, n);

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  // concordant - discordant = n0 - n1 - n2 + n3 - 2*discordant
  const double numerator = static_cast<double>(n0 - n1 - n2 + n3) -
                           2.0 * static_cast<double>(discordant);
  // One sqrt of the exact integer product, so tie-free concordant data yields
  // exactly 1.
  const double denom =
      std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  return numerator / denom;
}

double pairwise_win_probability(const PairedSample& p, std::uint64_t pairs,
                                std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  if (is_constant(p.accuracies)) {
    throw DegenerateSample("all accuracies equal; no ordered pairs exist");
  }
  const std::uint64_t n = p.accuracies.size();
  Rng rng(seed);
  std::uint64_t wins = 0;
  for (std::uint64_t k = 0; k < pairs; ++k) {
    std::size_t i, j;
    do {
      i = static_cast<std::size_t>(rng.next_below(n));
      j = static_cast<std::size_t>(rng.next_below(n));
    } while (p.accuracies[i] == p.accuracies[j]);
    if (p.accuracies[i] < p.accuracies[j]) std::swap(i, j);
    if (p.scores[i] > p.scores[j]) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(pairs);
}

std::map<std::string, double> average_rank(
    const std::vector<std::map<std::string, double>>& tables) {
  if (tables.empty()) throw std::invalid_argument("no tables");
  const auto& reference = tables.front();

  std::map<std::string, double> sums;
  for (const auto& [method, _] : reference) sums[method] = 0.0;

  for (const auto& table : tables) {
    if (table.size() != reference.size()) {
      throw InconsistentMethods("tables list different method sets");
    }
    std::vector<std::string> methods;
    std::vector<double> corr;
    for (const auto& [method, value] : table) {
      if (!reference.count(method)) {
        throw InconsistentMethods("method '" + method + "' missing from other tables");
      }
      methods.push_back(method);
      corr.push_back(value);
    }
    const auto ranks = average_ranks(corr, /*ascending=*/false);
    for (std::size_t i = 0; i < methods.size(); ++i) sums[methods[i]] += ranks[i];
  }

  for (auto& [_, v] : sums) v /= static_cast<double>(tables.size());
  return sums;
}

}  // namespace near
