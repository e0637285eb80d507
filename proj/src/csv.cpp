#include "gridins/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gridins::csv {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_losses(const std::string& path, const opf::LossDistribution& losses) {
  auto out = open_out(path);
  out << "tg,year,loss\n";
  for (size_t t = 0; t < losses.tg_ids.size(); ++t)
    for (int y = 0; y < losses.years; ++y)
      out << losses.tg_ids[t] << ',' << (y + 1) << ','
          << format_number(losses.annual_losses[t][y]) << '\n';
  finish(out, path);
}

actuarial::LossMatrix read_losses(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open losses file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty losses file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tg,year,loss")
    throw std::runtime_error(path + ": expected header tg,year,loss");

  std::vector<std::string> tg_order;
  std::map<std::string, std::map<int, double>> by_tg;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": expected 3 fields");
    const std::string& tg = fields[0];
    int year = 0;
    double loss = 0.0;
    try {
      size_t pos = 0;
      year = std::stoi(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("trailing");
      loss = std::stod(fields[2], &pos);
      if (pos != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": malformed number");
    }
    if (year < 1)
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": year must be positive");
    auto& years = by_tg[tg];
    if (years.empty()) tg_order.push_back(tg);
    if (!years.emplace(year, loss).second)
      throw std::runtime_error(path + ": duplicate sample for " + tg +
                               " year " + std::to_string(year));
  }
  if (tg_order.empty()) throw std::runtime_error(path + ": no loss rows");

  const size_t n = by_tg[tg_order.front()].size();
  actuarial::LossMatrix matrix;
  matrix.tg_ids = tg_order;
  for (const auto& tg : tg_order) {
    const auto& years = by_tg[tg];
    if (years.size() != n)
      throw std::runtime_error(path + ": grid " + tg +
                               " has a different number of annual samples");
    std::vector<double> row_samples;
    row_samples.reserve(n);
    for (const auto& [year, loss] : years) row_samples.push_back(loss);
    matrix.samples.push_back(std::move(row_samples));
  }
  return matrix;
}

void write_reliability(const std::string& path, const std::string& scenario,
                       double elc, double efc) {
  auto out = open_out(path);
  out << "scenario,elc,efc\n";
  out << scenario << ',' << format_number(elc) << ',' << format_number(efc)
      << '\n';
  finish(out, path);
}

void write_premiums(const std::string& path,
                    const actuarial::PremiumReport& report) {
  auto out = open_out(path);
  out << "tg,design,premium,indemnity,rlc,insolvency\n";
  for (const auto& design : report.designs)
    for (size_t q = 0; q < report.tg_ids.size(); ++q)
      out << report.tg_ids[q] << ',' << design.design << ','
          << format_number(design.premium[q]) << ','
          << format_number(design.indemnity[q]) << ','
          << format_number(design.rlc[q]) << ','
          << format_number(design.insolvency[q]) << '\n';
  finish(out, path);
}

void write_loss_stats(const std::string& path,
                      const actuarial::PremiumReport& report) {
  auto out = open_out(path);
  out << "tg,mean,sd,cov\n";
  for (size_t q = 0; q < report.tg_ids.size(); ++q)
    out << report.tg_ids[q] << ',' << format_number(report.mean[q]) << ','
        << format_number(report.sd[q]) << ',' << format_number(report.cov[q])
        << '\n';
  finish(out, path);
}

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table table;
  table.header = split_csv_line(line);
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size())
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": wrong field count");
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace gridins::csv
