#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gridins::actuarial {

// Smallest sample value whose empirical exceedance probability is at most
// the tail level.
double value_at_risk(std::span<const double> samples, double tail_level);

// Mean of the samples strictly above the value at risk; when ties leave the
// strict tail empty, the mean of the top ceil(tail_level * n) samples.
double tail_conditional_expectation(std::span<const double> samples,
                                    double tail_level);

// Annual loss samples per insured grid.
struct LossMatrix {
  std::vector<std::string> tg_ids;
  std::vector<std::vector<double>> samples;  // [tg][year]

  int tg_count() const { return static_cast<int>(tg_ids.size()); }
  int sample_count() const {
    return samples.empty() ? 0 : static_cast<int>(samples[0].size());
  }
};

// Design 1: each grid pays its own tail conditional expectation.
std::vector<double> tce_premiums(const LossMatrix& losses, double tail_level);

// Optional variant of design 1: expected contribution to pooled tail events,
// scaled so the premiums sum to the pool's tail conditional expectation.
std::vector<double> allocated_tce_premiums(const LossMatrix& losses,
                                           double tail_level);

// Design 2 (default rule): own expected loss plus an even share of the
// pooled tail buffer.  Stand-in for externally defined coalitional designs.
std::vector<double> coalitional_premiums(const LossMatrix& losses,
                                         double tail_level);

using PremiumRule =
    std::function<std::vector<double>(const LossMatrix&, double)>;

// Exact Shapley value of `player` for a characteristic cost function given
// over subset bitmasks (bit q set = player q in the coalition).
double shapley_value(int player_count,
                     const std::function<double(std::uint32_t)>& cost,
                     int player);

// Design 3: per-grid Shapley premium of the claim-frequency-weighted games.
// no_claim_probs holds each grid's chance of a below-threshold year.
std::vector<double> shapley_premiums(const LossMatrix& losses, double tail_level,
                                     std::span<const double> no_claim_probs);

// Base payout for grid q when k of y grids claim at once: an affine blend of
// the grid's own tail expectation and the pool-wide sum.
double base_indemnity(std::span<const double> tce_by_tg, int q, int k);

// Scale factor that keeps the claimants' payouts within the non-claimants'
// premium budget.
double indemnity_scale_factor(std::span<const double> base_claims,
                              double outside_budget);

struct IndemnitySchedule {
  std::vector<std::vector<double>> base;    // [k-1][tg]
  std::vector<std::vector<double>> scaled;  // [k-1][tg]
  std::vector<double> scale_by_k;           // [k-1]
  std::vector<double> max_by_tg;            // redeemable payout per tg
};

// Builds the payout schedule for every claim count k, budgeting each k
// against the worst-case claimant set (the k largest base payouts).
IndemnitySchedule build_indemnity_schedule(std::span<const double> tce_by_tg,
                                           std::span<const double> premiums);

// Splits the pooled design-1 premium mass across grids in proportion to
// their design-2 payouts.
std::vector<double> pi1_indemnities(std::span<const double> pi1_premiums,
                                    std::span<const double> pi2_indemnities);

// Relative premium burden: premium over expected loss, minus one.
double risk_loading(double premium, std::span<const double> samples);

// Empirical chance that a loss sample strictly exceeds the payout.
double insolvency_probability(std::span<const double> samples, double indemnity);

enum class DeltaMode { TailLevel, EcdfThreshold };
enum class Pi1Mode { OwnTce, Allocated };

struct PremiumOptions {
  double tail_level = 0.1;
  DeltaMode delta_mode = DeltaMode::TailLevel;
  double ecdf_threshold = 0.0;  // used by DeltaMode::EcdfThreshold
  Pi1Mode pi1_mode = Pi1Mode::OwnTce;
  PremiumRule pi2_rule;  // defaults to coalitional_premiums
};

struct DesignReport {
  std::string design;  // "pi1", "pi2", "pi3"
  std::vector<double> premium;
  std::vector<double> indemnity;
  std::vector<double> rlc;        // NaN when expected loss is zero
  std::vector<double> insolvency;
};

struct PremiumReport {
  std::vector<std::string> tg_ids;
  std::vector<double> mean, sd, cov;  // cov = sd/mean, NaN when mean is zero
  std::vector<double> no_claim_probs;
  std::vector<DesignReport> designs;  // pi1, pi2, pi3
};

PremiumReport build_premium_report(const LossMatrix& losses,
                                   const PremiumOptions& options);

}  // namespace gridins::actuarial
