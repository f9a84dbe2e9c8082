#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cidal {

// One row per (epoch, evaluated domain).
struct MetricsRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  int time_step = 0;
  int epoch = 0;
  int domain_id = 0;
  double accuracy = 0.0;
  double loss_total = 0.0;
  double loss_ce_pseudo = 0.0;
  double loss_ce_buffer = 0.0;
  double loss_swd_target = 0.0;
  double loss_swd_buffer = 0.0;
  double swd_current = 0.0;
  double swd_gmm_drift = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "run_id,seed,time_step,epoch,domain_id,accuracy,loss_total,loss_ce_pseudo,loss_ce_buffer,"
    "loss_swd_target,loss_swd_buffer,swd_current,swd_gmm_drift";

// Reals use 9 significant digits; lines end with LF.
std::string format_metrics_row(const MetricsRecord& r);
void write_metrics_rows(std::ostream& os, const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path);

std::vector<MetricsRecord> parse_metrics_csv(std::istream& is);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

struct CurveOutput {
  std::vector<std::string> files;
  std::string notice;  // set when only data files were written
};

// Writes curve_domain<id>.csv per domain with columns
// global_epoch,time_step,epoch,accuracy. global_epoch counts epochs across
// the whole run, so each series is strictly increasing in it.
CurveOutput emit_learning_curves(const std::vector<MetricsRecord>& records, const std::string& out_dir);

}  // namespace cidal
