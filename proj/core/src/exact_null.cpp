#include "impact/error.hpp"
#include "impact/rank_stats.hpp"

#include <limits>

namespace impact::stats {
namespace {

__extension__ typedef unsigned __int128 u128;

// C(n, k) or nullopt when it does not fit in 63 bits.
std::optional<std::uint64_t> checked_binomial(std::size_t n, std::size_t k) {
  if (k > n - k) k = n - k;
  u128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > static_cast<u128>(std::numeric_limits<std::int64_t>::max())) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

ExactNullDistribution::ExactNullDistribution(std::size_t n_a, std::size_t n_b, std::vector<std::uint64_t> counts)
    : n_a_(n_a), n_b_(n_b), counts_(std::move(counts)) {
  if (counts_.size() != n_a_ * n_b_ + 1)
    throw Error(errc::kInvalidArgument, "exact distribution needs n_A*n_B+1 counts");
  cumulative_.resize(counts_.size());
  std::uint64_t running = 0;
  for (std::size_t u = 0; u < counts_.size(); ++u) {
    running += counts_[u];
    cumulative_[u] = running;
  }
  total_ = running;
}

std::uint64_t ExactNullDistribution::count(std::int64_t u) const {
  if (u < 0 || static_cast<std::size_t>(u) >= counts_.size()) return 0;
  return counts_[static_cast<std::size_t>(u)];
}

double ExactNullDistribution::lower_tail(std::int64_t u) const {
  if (u < 0) return 0.0;
  if (static_cast<std::size_t>(u) >= cumulative_.size()) return 1.0;
  return static_cast<double>(static_cast<long double>(cumulative_[static_cast<std::size_t>(u)]) /
                             static_cast<long double>(total_));
}

ExactNullDistribution exact_null_distribution(std::size_t n_a, std::size_t n_b, std::size_t cap) {
  if (n_a < 1 || n_b < 1)
    throw Error(errc::kSizeAboveCap, "exact distribution needs n_A, n_B >= 1");
  if (n_a > cap || n_b > cap)
    throw Error(errc::kSizeAboveCap, "exact distribution limited to group sizes <= " + std::to_string(cap) +
                                         " (got n_A=" + std::to_string(n_a) + ", n_B=" + std::to_string(n_b) + ")");
  if (!checked_binomial(n_a + n_b, n_a))
    throw Error(errc::kSizeAboveCap, "exact distribution counts overflow 64 bits for these group sizes");

  // f(i, j) is the U-count polynomial for i members of A and j of B:
  //   f(i, j) = q^j f(i-1, j) + f(i, j-1), f(0, j) = f(i, 0) = 1.
  // The largest remaining element either belongs to A (beating all j B's) or B.
  std::vector<std::vector<std::uint64_t>> prev(n_b + 1, std::vector<std::uint64_t>{1});
  for (std::size_t i = 1; i <= n_a; ++i) {
    std::vector<std::vector<std::uint64_t>> cur(n_b + 1);
    cur[0] = {1};
    for (std::size_t j = 1; j <= n_b; ++j) {
      std::vector<std::uint64_t> poly(i * j + 1, 0);
      const auto& with_a = prev[j];
      for (std::size_t u = 0; u < with_a.size(); ++u) poly[u + j] += with_a[u];
      const auto& with_b = cur[j - 1];
      for (std::size_t u = 0; u < with_b.size(); ++u) poly[u] += with_b[u];
      cur[j] = std::move(poly);
    }
    prev = std::move(cur);
  }
  return ExactNullDistribution(n_a, n_b, std::move(prev[n_b]));
}

}  // namespace impact::stats
