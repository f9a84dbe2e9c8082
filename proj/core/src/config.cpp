#include "cidal/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace cidal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("expected a real number, got '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("expected a real number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("expected an integer, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -(1LL << 31) || v > (1LL << 31) - 1) throw ValidationError("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

int to_count(const std::string& s, int min) {
  const int v = to_int(s);
  if (v < min) throw ValidationError("must be >= " + std::to_string(min) + ", got " + s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("expected true or false, got '" + s + "'");
}

std::vector<std::string> to_list(const std::string& s) {
  if (s.empty()) return {};
  auto items = split(s, ',');
  for (const auto& i : items)
    if (i.empty()) throw ValidationError("empty list element in '" + s + "'");
  return items;
}

template <typename F>
auto map_list(const std::string& s, F f) {
  std::vector<decltype(f(std::string()))> out;
  for (const auto& item : to_list(s)) out.push_back(f(item));
  return out;
}

std::vector<double> nonempty_reals(const std::string& s) {
  auto v = map_list(s, to_real);
  if (v.empty()) throw ValidationError("declared sweep must not be empty");
  return v;
}

Matrix to_matrix(const std::string& s) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(s, ';')) {
    std::vector<double> values;
    std::string tok;
    std::string r = row;
    std::replace(r.begin(), r.end(), ',', ' ');
    std::istringstream is(r);
    while (is >> tok) values.push_back(to_real(tok));
    if (values.empty()) throw ValidationError("empty matrix row in '" + s + "'");
    if (!rows.empty() && values.size() != rows.front().size())
      throw ValidationError("matrix rows have different lengths in '" + s + "'");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError("empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

StreamKind to_stream_kind(const std::string& s) {
  if (s == "moons") return StreamKind::moons;
  if (s == "blobs") return StreamKind::blobs;
  if (s == "idx") return StreamKind::idx;
  throw ValidationError("expected moons, blobs or idx, got '" + s + "'");
}

void set_idx_field(ExperimentConfig& c, const std::string& v, std::string IdxDomainFiles::*field) {
  const auto paths = to_list(v);
  if (c.stream.idx_domains.size() < paths.size()) c.stream.idx_domains.resize(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) c.stream.idx_domains[i].*field = paths[i];
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"stream.kind", [](auto& c, const auto& v) { c.stream.kind = to_stream_kind(v); }},
      {"stream.rotations", [](auto& c, const auto& v) { c.stream.rotations_deg = map_list(v, to_real); }},
      {"stream.noise",
       [](auto& c, const auto& v) {
         c.stream.noise = to_real(v);
         require(c.stream.noise >= 0.0, "noise must be >= 0");
       }},
      {"stream.n_train", [](auto& c, const auto& v) { c.stream.n_train = to_count(v, 2); }},
      {"stream.n_test", [](auto& c, const auto& v) { c.stream.n_test = to_count(v, 2); }},
      {"stream.imbalance", [](auto& c, const auto& v) { c.stream.imbalance = to_bool(v); }},
      {"stream.k", [](auto& c, const auto& v) { c.stream.k = to_count(v, 2); }},
      {"stream.means", [](auto& c, const auto& v) { c.stream.blob_means = to_matrix(v); }},
      {"stream.shifts", [](auto& c, const auto& v) { c.stream.blob_shifts = to_matrix(v); }},
      {"stream.cov_scale",
       [](auto& c, const auto& v) {
         c.stream.cov_scale = to_real(v);
         require(c.stream.cov_scale >= 0.0, "cov_scale must be >= 0");
       }},
      {"stream.idx_k", [](auto& c, const auto& v) { c.stream.idx_k = to_count(v, 2); }},
      {"stream.idx_train_images", [](auto& c, const auto& v) { set_idx_field(c, v, &IdxDomainFiles::train_images); }},
      {"stream.idx_train_labels", [](auto& c, const auto& v) { set_idx_field(c, v, &IdxDomainFiles::train_labels); }},
      {"stream.idx_test_images", [](auto& c, const auto& v) { set_idx_field(c, v, &IdxDomainFiles::test_images); }},
      {"stream.idx_test_labels", [](auto& c, const auto& v) { set_idx_field(c, v, &IdxDomainFiles::test_labels); }},
      {"seed",
       [](auto& c, const auto& v) {
         const long long s = to_integer(v);
         require(s >= 0, "seed must be >= 0");
         c.hyper.seed = static_cast<std::uint64_t>(s);
       }},
      {"lambda",
       [](auto& c, const auto& v) {
         c.hyper.lambda = to_real(v);
         require(c.hyper.lambda >= 0.0, "lambda must be >= 0");
       }},
      {"tau",
       [](auto& c, const auto& v) {
         c.hyper.tau = to_real(v);
         require(c.hyper.tau >= 0.0 && c.hyper.tau < 1.0, "tau must lie in [0, 1), got " + v);
       }},
      {"n_b", [](auto& c, const auto& v) { c.hyper.n_b = to_count(v, 0); }},
      {"n_p", [](auto& c, const auto& v) { c.hyper.n_p = to_count(v, 0); }},
      {"l_projections", [](auto& c, const auto& v) { c.hyper.l_projections = to_count(v, 1); }},
      {"epochs_source", [](auto& c, const auto& v) { c.hyper.epochs_source = to_count(v, 0); }},
      {"epochs_adapt", [](auto& c, const auto& v) { c.hyper.epochs_adapt = to_count(v, 0); }},
      {"batch_size", [](auto& c, const auto& v) { c.hyper.batch_size = to_count(v, 1); }},
      {"learning_rate",
       [](auto& c, const auto& v) {
         c.hyper.learning_rate = to_real(v);
         require(c.hyper.learning_rate > 0.0, "learning_rate must be > 0");
       }},
      {"adapt_learning_rate",
       [](auto& c, const auto& v) {
         c.hyper.adapt_learning_rate = to_real(v);
         require(c.hyper.adapt_learning_rate > 0.0, "adapt_learning_rate must be > 0");
       }},
      {"normalize_swd", [](auto& c, const auto& v) { c.hyper.normalize_swd = to_bool(v); }},
      {"model.encoder",
       [](auto& c, const auto& v) {
         c.arch.encoder_widths = map_list(v, [](const std::string& s) { return to_count(s, 1); });
         require(!c.arch.encoder_widths.empty(), "encoder needs at least one layer");
       }},
      {"model.classifier",
       [](auto& c, const auto& v) {
         c.arch.classifier_widths = map_list(v, [](const std::string& s) { return to_count(s, 1); });
       }},
      {"model.activation", [](auto& c, const auto& v) { c.arch.hidden = parse_activation(v); }},
      {"model.embedding_activation", [](auto& c, const auto& v) { c.arch.embedding = parse_activation(v); }},
      {"ablation.disable_buffer", [](auto& c, const auto& v) { c.disable_buffer = to_bool(v); }},
      {"ablation.lambda_override",
       [](auto& c, const auto& v) {
         c.lambda_override = to_real(v);
         require(*c.lambda_override >= 0.0, "lambda_override must be >= 0");
       }},
      {"ablation.tau_sweep",
       [](auto& c, const auto& v) {
         c.tau_sweep = nonempty_reals(v);
         for (double t : c.tau_sweep) require(t >= 0.0 && t < 1.0, "tau values must lie in [0, 1)");
       }},
      {"ablation.n_b_sweep",
       [](auto& c, const auto& v) {
         c.n_b_sweep = map_list(v, [](const std::string& s) { return to_count(s, 0); });
         require(!c.n_b_sweep.empty(), "declared sweep must not be empty");
       }},
      {"output_dir",
       [](auto& c, const auto& v) {
         require(!v.empty(), "output_dir must not be empty");
         c.output_dir = v;
       }},
      {"run_id",
       [](auto& c, const auto& v) {
         require(!v.empty() && v.find_first_of(",\"\n") == std::string::npos,
                 "run_id must be nonempty without commas or quotes");
         c.run_id = v;
       }},
  };
  return table;
}

}  // namespace

HyperParams ExperimentConfig::effective_hyper() const {
  HyperParams h = hyper;
  if (disable_buffer) h.n_b = 0;
  if (lambda_override) h.lambda = *lambda_override;
  return h;
}

void ExperimentConfig::validate() const {
  effective_hyper().validate();
  require(stream.domain_count() >= 1, "stream declares no domains");
  if (stream.kind == StreamKind::blobs) {
    require(stream.blob_means.rows() == stream.k, "stream.means must have stream.k rows");
    require(stream.blob_shifts.rows() >= 1 && stream.blob_shifts.cols() == stream.blob_means.cols(),
            "stream.shifts must have one row per domain with the width of stream.means");
  }
  if (stream.kind == StreamKind::idx) {
    for (const auto& f : stream.idx_domains)
      require(!f.train_images.empty() && !f.train_labels.empty() && !f.test_images.empty() && !f.test_labels.empty(),
              "idx streams need train/test image and label paths for every domain");
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(where + ": duplicate key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const Error& e) {
      throw ParseError(where + ": key '" + key + "': " + e.what());
    }
  }
  if (!seen.contains("stream.kind")) throw ParseError(origin + ": missing required key 'stream.kind'");
  if (c.stream.kind == StreamKind::blobs) {
    const StreamConfig blobs = default_blob_stream();
    if (!seen.contains("stream.means")) {
      if (seen.contains("stream.k") && c.stream.k != blobs.k)
        throw ParseError(origin + ": key 'stream.k' differs from the default blob layout; set stream.means");
      c.stream.k = blobs.k;
      c.stream.blob_means = blobs.blob_means;
    }
    if (!seen.contains("stream.shifts")) c.stream.blob_shifts = blobs.blob_shifts;
    if (!seen.contains("stream.cov_scale")) c.stream.cov_scale = blobs.cov_scale;
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace cidal
