#include "gridins/actuarial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gridins::actuarial {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_tail_level(double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::domain_error("risk measure: tail level must lie in (0,1)");
}

void require_samples(std::span<const double> samples) {
  if (samples.empty())
    throw std::domain_error("risk measure: empty sample vector");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Number of tail samples used when ties leave the strict tail empty.
int tail_count(double w, size_t n) {
  const int m = static_cast<int>(std::ceil(w * static_cast<double>(n) - 1e-9));
  return std::max(1, m);
}

}  // namespace

double value_at_risk(std::span<const double> samples, double tail_level) {
  require_samples(samples);
  require_tail_level(tail_level);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const double allowed = tail_level * static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;  // same candidate
    const double exceeders = static_cast<double>(n - i - 1);
    if (exceeders <= allowed) return sorted[i];
  }
  return sorted.back();
}

double tail_conditional_expectation(std::span<const double> samples,
                                    double tail_level) {
  const double var = value_at_risk(samples, tail_level);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  long count = 0;
  for (double v : sorted) {
    if (v > var) {
      sum += v;
      ++count;
    }
  }
  if (count > 0) return sum / static_cast<double>(count);
  // Ties at the top: average the top slice instead.
  const int m = tail_count(tail_level, sorted.size());
  sum = 0.0;
  for (size_t i = sorted.size() - m; i < sorted.size(); ++i) sum += sorted[i];
  return sum / static_cast<double>(m);
}

namespace {

void require_matrix(const LossMatrix& losses) {
  if (losses.tg_ids.empty())
    throw std::domain_error("premiums: no insured grids");
  if (losses.samples.size() != losses.tg_ids.size())
    throw std::invalid_argument("premiums: id/sample row mismatch");
  const size_t n = losses.samples.front().size();
  if (n == 0) throw std::domain_error("premiums: empty sample vectors");
  for (const auto& row : losses.samples)
    if (row.size() != n)
      throw std::invalid_argument("premiums: ragged sample matrix");
}

std::vector<double> pool_of(const LossMatrix& losses) {
  const size_t n = losses.samples.front().size();
  std::vector<double> pool(n, 0.0);
  for (const auto& row : losses.samples)
    for (size_t i = 0; i < n; ++i) pool[i] += row[i];
  return pool;
}

}  // namespace

std::vector<double> tce_premiums(const LossMatrix& losses, double tail_level) {
  require_matrix(losses);
  std::vector<double> out;
  out.reserve(losses.tg_ids.size());
  for (const auto& row : losses.samples)
    out.push_back(tail_conditional_expectation(row, tail_level));
  return out;
}

std::vector<double> allocated_tce_premiums(const LossMatrix& losses,
                                           double tail_level) {
  require_matrix(losses);
  require_tail_level(tail_level);
  const std::vector<double> pool = pool_of(losses);
  const double pool_var = value_at_risk(pool, tail_level);

  // Tail years: strict exceeders of the pool's value at risk, or the top
  // slice when ties leave none.
  std::vector<size_t> tail_years;
  for (size_t i = 0; i < pool.size(); ++i)
    if (pool[i] > pool_var) tail_years.push_back(i);
  if (tail_years.empty()) {
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (pool[a] != pool[b]) return pool[a] > pool[b];
      return a < b;
    });
    const int m = tail_count(tail_level, pool.size());
    tail_years.assign(order.begin(), order.begin() + m);
    std::sort(tail_years.begin(), tail_years.end());
  }

  std::vector<double> out(losses.tg_ids.size(), 0.0);
  for (size_t q = 0; q < losses.samples.size(); ++q) {
    double s = 0.0;
    for (size_t y : tail_years) s += losses.samples[q][y];
    out[q] = s / static_cast<double>(tail_years.size());
  }
  return out;
}

std::vector<double> coalitional_premiums(const LossMatrix& losses,
                                         double tail_level) {
  require_matrix(losses);
  const int y = losses.tg_count();
  if (y < 2)
    throw std::domain_error("coalitional premiums: need at least two grids");
  const std::vector<double> pool = pool_of(losses);
  const double buffer =
      tail_conditional_expectation(pool, tail_level) - mean_of(pool);
  std::vector<double> out;
  out.reserve(y);
  for (const auto& row : losses.samples)
    out.push_back(mean_of(row) + buffer / static_cast<double>(y));
  return out;
}

double shapley_value(int player_count,
                     const std::function<double(std::uint32_t)>& cost,
                     int player) {
  if (player_count < 1 || player_count > 20)
    throw std::domain_error(
        "shapley value: player count outside the exact-enumeration range 1..20");
  if (player < 0 || player >= player_count)
    throw std::invalid_argument("shapley value: player index out of range");

  // Weight of a coalition of size k among the other players:
  // k! (y-k-1)! / y!   (exact in 64-bit integers for y <= 20).
  std::vector<std::uint64_t> fact(player_count + 1, 1);
  for (int i = 1; i <= player_count; ++i)
    fact[i] = fact[i - 1] * static_cast<std::uint64_t>(i);
  std::vector<double> weight(player_count, 0.0);
  for (int k = 0; k < player_count; ++k)
    weight[k] = static_cast<double>(fact[k]) *
                static_cast<double>(fact[player_count - k - 1]) /
                static_cast<double>(fact[player_count]);

  const std::uint32_t full = (1u << player_count) - 1u;
  const std::uint32_t me = 1u << player;
  double value = 0.0;
  for (std::uint32_t subset = 0; subset <= full; ++subset) {
    if (subset & me) continue;
    const int k = std::popcount(subset);
    value += weight[k] * (cost(subset | me) - cost(subset));
  }
  return value;
}

std::vector<double> shapley_premiums(const LossMatrix& losses, double tail_level,
                                     std::span<const double> no_claim_probs) {
  require_matrix(losses);
  const int y = losses.tg_count();
  if (static_cast<int>(no_claim_probs.size()) != y)
    throw std::invalid_argument("shapley premiums: one no-claim probability per grid");
  for (double d : no_claim_probs)
    if (!(d >= 0.0 && d <= 1.0))
      throw std::domain_error("shapley premiums: no-claim probability outside [0,1]");
  if (y > 20)
    throw std::domain_error("shapley premiums: more than 20 grids");

  std::vector<double> var_by_tg(y);
  for (int q = 0; q < y; ++q)
    var_by_tg[q] = value_at_risk(losses.samples[q], tail_level);

  // Sum of members' value-at-risk per coalition mask.
  const std::uint32_t masks = 1u << y;
  std::vector<double> var_sum(masks, 0.0);
  for (std::uint32_t mask = 1; mask < masks; ++mask) {
    const int low = std::countr_zero(mask);
    var_sum[mask] = var_sum[mask & (mask - 1)] + var_by_tg[low];
  }

  // Binomial coefficients C(y, k).
  std::vector<double> choose(y + 1, 1.0);
  for (int k = 1; k <= y; ++k)
    choose[k] = choose[k - 1] * static_cast<double>(y - k + 1) /
                static_cast<double>(k);

  std::vector<double> out(y, 0.0);
  for (int q = 0; q < y; ++q) {
    const double d = no_claim_probs[q];
    std::vector<double> level_weight(y + 1, 0.0);
    for (int k = 0; k <= y; ++k)
      level_weight[k] =
          choose[k] * std::pow(d, k) * std::pow(1.0 - d, y - k);
    auto cost = [&](std::uint32_t mask) {
      return level_weight[std::popcount(mask)] * var_sum[mask];
    };
    out[q] = shapley_value(y, cost, q);
  }
  return out;
}

double base_indemnity(std::span<const double> tce_by_tg, int q, int k) {
  const int y = static_cast<int>(tce_by_tg.size());
  if (y < 2)
    throw std::domain_error(
        "base indemnity: undefined for fewer than two grids");
  if (q < 0 || q >= y) throw std::invalid_argument("base indemnity: bad grid index");
  if (k < 1 || k > y)
    throw std::domain_error("base indemnity: claim count outside 1..y");
  double total = 0.0;
  for (double t : tce_by_tg) total += t;
  const double own_share = static_cast<double>(y - k) / (y - 1);
  const double group_share = static_cast<double>(k - 1) / (y - 1);
  return own_share * tce_by_tg[q] + group_share * total;
}

double indemnity_scale_factor(std::span<const double> base_claims,
                              double outside_budget) {
  if (outside_budget < 0.0)
    throw std::domain_error("indemnity scale: negative budget");
  double claims = 0.0;
  for (double c : base_claims) {
    if (c < 0.0) throw std::domain_error("indemnity scale: negative claim");
    claims += c;
  }
  if (claims <= outside_budget || claims == 0.0) return 1.0;
  return outside_budget / claims;
}

IndemnitySchedule build_indemnity_schedule(std::span<const double> tce_by_tg,
                                           std::span<const double> premiums) {
  const int y = static_cast<int>(tce_by_tg.size());
  if (static_cast<int>(premiums.size()) != y)
    throw std::invalid_argument("indemnity schedule: premium vector mismatch");
  IndemnitySchedule sched;
  sched.base.resize(y);
  sched.scaled.resize(y);
  sched.scale_by_k.resize(y);
  sched.max_by_tg.assign(y, 0.0);

  for (int k = 1; k <= y; ++k) {
    auto& base_row = sched.base[k - 1];
    base_row.resize(y);
    for (int q = 0; q < y; ++q) base_row[q] = base_indemnity(tce_by_tg, q, k);

    // Worst-case claimant set: the k largest base payouts (ties by index).
    std::vector<int> order(y);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (base_row[a] != base_row[b]) return base_row[a] > base_row[b];
      return a < b;
    });
    std::vector<double> claims;
    double outside_budget = 0.0;
    std::vector<char> claimant(y, 0);
    for (int i = 0; i < k; ++i) claimant[order[i]] = 1;
    for (int q = 0; q < y; ++q) {
      if (claimant[q])
        claims.push_back(base_row[q]);
      else
        outside_budget += premiums[q];
    }
    const double scale = indemnity_scale_factor(claims, outside_budget);
    sched.scale_by_k[k - 1] = scale;
    auto& scaled_row = sched.scaled[k - 1];
    scaled_row.resize(y);
    for (int q = 0; q < y; ++q) {
      scaled_row[q] = scale * base_row[q];
      sched.max_by_tg[q] = std::max(sched.max_by_tg[q], scaled_row[q]);
    }
  }
  return sched;
}

std::vector<double> pi1_indemnities(std::span<const double> pi1_premiums,
                                    std::span<const double> pi2_indemnities) {
  if (pi1_premiums.size() != pi2_indemnities.size())
    throw std::invalid_argument("pi1 indemnities: vector size mismatch");
  double premium_mass = 0.0;
  for (double p : pi1_premiums) premium_mass += p;
  double indemnity_mass = 0.0;
  for (double g : pi2_indemnities) indemnity_mass += g;
  if (!(indemnity_mass > 0.0))
    throw std::domain_error("pi1 indemnities: zero reference indemnity mass");
  const double ratio = premium_mass / indemnity_mass;
  std::vector<double> out(pi1_premiums.size());
  for (size_t q = 0; q < out.size(); ++q)
    out[q] = ratio * pi2_indemnities[q];
  return out;
}

double risk_loading(double premium, std::span<const double> samples) {
  require_samples(samples);
  const double mean = mean_of(samples);
  if (!(mean > 0.0))
    throw std::domain_error("risk loading: zero expected loss");
  return premium / mean - 1.0;
}

double insolvency_probability(std::span<const double> samples, double indemnity) {
  require_samples(samples);
  long count = 0;
  for (double s : samples)
    if (s > indemnity) ++count;
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

PremiumReport build_premium_report(const LossMatrix& losses,
                                   const PremiumOptions& options) {
  require_matrix(losses);
  require_tail_level(options.tail_level);
  const int y = losses.tg_count();
  if (y < 2)
    throw std::domain_error(
        "premium report: mutual insurance needs at least two grids");
  if (losses.sample_count() < 2)
    throw std::domain_error("premium report: need at least two annual samples");
  for (const auto& row : losses.samples)
    for (double v : row)
      if (v < 0.0) throw std::domain_error("premium report: negative loss sample");

  PremiumReport rep;
  rep.tg_ids = losses.tg_ids;
  const int n = losses.sample_count();
  for (int q = 0; q < y; ++q) {
    const auto& row = losses.samples[q];
    const double m = mean_of(row);
    double var_acc = 0.0;
    for (double v : row) var_acc += (v - m) * (v - m);
    const double sd = std::sqrt(var_acc / static_cast<double>(n - 1));
    rep.mean.push_back(m);
    rep.sd.push_back(sd);
    rep.cov.push_back(m > 0.0 ? sd / m : kNan);
  }

  // No-claim probability per grid.
  rep.no_claim_probs.assign(y, 0.0);
  for (int q = 0; q < y; ++q) {
    if (options.delta_mode == DeltaMode::TailLevel) {
      rep.no_claim_probs[q] = 1.0 - options.tail_level;
    } else {
      long below = 0;
      for (double v : losses.samples[q])
        if (v <= options.ecdf_threshold) ++below;
      rep.no_claim_probs[q] =
          static_cast<double>(below) / static_cast<double>(n);
    }
  }

  std::vector<double> tce_by_tg(y);
  for (int q = 0; q < y; ++q)
    tce_by_tg[q] =
        tail_conditional_expectation(losses.samples[q], options.tail_level);

  std::vector<double> pi1 =
      options.pi1_mode == Pi1Mode::OwnTce
          ? tce_premiums(losses, options.tail_level)
          : allocated_tce_premiums(losses, options.tail_level);
  const PremiumRule pi2_rule =
      options.pi2_rule ? options.pi2_rule : PremiumRule(coalitional_premiums);
  std::vector<double> pi2 = pi2_rule(losses, options.tail_level);
  std::vector<double> pi3 =
      shapley_premiums(losses, options.tail_level, rep.no_claim_probs);

  const IndemnitySchedule sched2 = build_indemnity_schedule(tce_by_tg, pi2);
  const IndemnitySchedule sched3 = build_indemnity_schedule(tce_by_tg, pi3);
  std::vector<double> ind2 = sched2.max_by_tg;
  std::vector<double> ind3 = sched3.max_by_tg;
  double ind2_mass = 0.0;
  for (double g : ind2) ind2_mass += g;
  std::vector<double> ind1(y, 0.0);
  if (ind2_mass > 0.0) ind1 = pi1_indemnities(pi1, ind2);

  auto make_design = [&](const std::string& name,
                         const std::vector<double>& premium,
                         const std::vector<double>& indemnity) {
    DesignReport d;
    d.design = name;
    d.premium = premium;
    d.indemnity = indemnity;
    d.rlc.resize(y);
    d.insolvency.resize(y);
    for (int q = 0; q < y; ++q) {
      d.rlc[q] = rep.mean[q] > 0.0 ? premium[q] / rep.mean[q] - 1.0 : kNan;
      d.insolvency[q] =
          insolvency_probability(losses.samples[q], indemnity[q]);
    }
    return d;
  };
  rep.designs.push_back(make_design("pi1", pi1, ind1));
  rep.designs.push_back(make_design("pi2", pi2, ind2));
  rep.designs.push_back(make_design("pi3", pi3, ind3));
  return rep;
}

}  // namespace gridins::actuarial
