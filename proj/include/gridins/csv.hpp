#pragma once

#include <string>

#include "gridins/actuarial.hpp"
#include "gridins/opf.hpp"

namespace gridins::csv {

// 6 significant digits; NaN is written as "nan".
std::string format_number(double value);

// losses.csv: tg,year,loss — one row per grid and 1-based year.
void write_losses(const std::string& path, const opf::LossDistribution& losses);
actuarial::LossMatrix read_losses(const std::string& path);

// reliability.csv: scenario,elc,efc.
void write_reliability(const std::string& path, const std::string& scenario,
                       double elc, double efc);

// premiums.csv: tg,design,premium,indemnity,rlc,insolvency.
void write_premiums(const std::string& path,
                    const actuarial::PremiumReport& report);

// loss_stats.csv: tg,mean,sd,cov.
void write_loss_stats(const std::string& path,
                      const actuarial::PremiumReport& report);

// Generic reader for the simple comma-separated tables written above.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each as wide as the header
};

Table read_table(const std::string& path);

}  // namespace gridins::csv
