#include "cidal/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cidal/common.hpp"

namespace cidal {

namespace {

std::string real9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_metrics_row(const MetricsRecord& r) {
  std::string s = r.run_id;
  s += ',' + std::to_string(r.seed);
  s += ',' + std::to_string(r.time_step);
  s += ',' + std::to_string(r.epoch);
  s += ',' + std::to_string(r.domain_id);
  for (double v : {r.accuracy, r.loss_total, r.loss_ce_pseudo, r.loss_ce_buffer, r.loss_swd_target, r.loss_swd_buffer,
                   r.swd_current, r.swd_gmm_drift})
    s += ',' + real9(v);
  return s;
}

void write_metrics_rows(std::ostream& os, const std::vector<MetricsRecord>& records) {
  for (const auto& r : records) os << format_metrics_row(r) << '\n';
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write metrics to '" + path + "'");
  os << kMetricsHeader << '\n';
  write_metrics_rows(os, records);
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

std::vector<MetricsRecord> parse_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) throw ParseError("metrics CSV: missing or wrong header");
  std::vector<MetricsRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": expected 13 fields");
    try {
      MetricsRecord r;
      r.run_id = f[0];
      r.seed = std::stoull(f[1]);
      r.time_step = std::stoi(f[2]);
      r.epoch = std::stoi(f[3]);
      r.domain_id = std::stoi(f[4]);
      double* reals[] = {&r.accuracy,       &r.loss_total,      &r.loss_ce_pseudo, &r.loss_ce_buffer,
                         &r.loss_swd_target, &r.loss_swd_buffer, &r.swd_current,    &r.swd_gmm_drift};
      for (std::size_t i = 0; i < 8; ++i) *reals[i] = std::stod(f[5 + i]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParseError("metrics CSV line " + std::to_string(line_no) + ": malformed field");
    }
  }
  return out;
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return parse_metrics_csv(is);
}

CurveOutput emit_learning_curves(const std::vector<MetricsRecord>& records, const std::string& out_dir) {
  require(!records.empty(), "no records to plot");
  std::filesystem::create_directories(out_dir);

  // Global epoch index in order of first appearance of each (time_step, epoch).
  std::map<std::pair<int, int>, int> global;
  for (const auto& r : records) global.try_emplace({r.time_step, r.epoch}, static_cast<int>(global.size()));

  std::map<int, std::vector<const MetricsRecord*>> by_domain;
  for (const auto& r : records) by_domain[r.domain_id].push_back(&r);

  CurveOutput out;
  for (const auto& [domain, rows] : by_domain) {
    const auto path = (std::filesystem::path(out_dir) / ("curve_domain" + std::to_string(domain) + ".csv")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path + "'");
    os << "global_epoch,time_step,epoch,accuracy\n";
    for (const MetricsRecord* r : rows)
      os << global.at({r->time_step, r->epoch}) << ',' << r->time_step << ',' << r->epoch << ',' << real9(r->accuracy)
         << '\n';
    out.files.push_back(path);
  }
  out.notice = "no plotting backend built in; wrote per-domain series files only";
  return out;
}

}  // namespace cidal
