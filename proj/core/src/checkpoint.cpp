#include "cidal/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace cidal {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Derived>
void write_values(std::ostream& os, const Eigen::DenseBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (r == 0 && c == 0 ? "" : " ") << real(m(r, c));
  }
  os << '\n';
}

void write_layer(std::ostream& os, const Layer& l) {
  os << "layer " << l.out_width() << ' ' << l.in_width() << ' ' << to_string(l.activation) << '\n';
  write_values(os, l.weight);
  write_values(os, l.bias.transpose());
}

void write_model(std::ostream& os, const ModelParams& m) {
  os << "model " << m.encoder.size() << ' ' << m.classifier.size() << '\n';
  for (const Layer& l : m.encoder) write_layer(os, l);
  for (const Layer& l : m.classifier) write_layer(os, l);
}

class Tokens {
 public:
  explicit Tokens(std::istream& is) : is_(is) {}

  std::string word(const char* what) {
    std::string s;
    if (!(is_ >> s)) fail(std::string("unexpected end of file, expected ") + what);
    ++count_;
    return s;
  }

  void expect(const std::string& keyword) {
    const std::string got = word(keyword.c_str());
    if (got != keyword) fail("expected '" + keyword + "', got '" + got + "'");
  }

  long long integer(const char* what) {
    const std::string s = word(what);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(std::string("bad integer for ") + what + ": '" + s + "'");
  }

  double number(const char* what) {
    const std::string s = word(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(std::string("bad real for ") + what + ": '" + s + "'");
  }

  template <typename Derived>
  void fill(Eigen::DenseBase<Derived>& m, const char* what) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = number(what);
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("checkpoint: " + msg + " (token " + std::to_string(count_) + ")");
  }

 private:
  std::istream& is_;
  std::size_t count_ = 0;
};

int count(Tokens& t, const char* what) {
  const long long v = t.integer(what);
  if (v < 0 || v > (1LL << 30)) t.fail(std::string("out-of-range ") + what);
  return static_cast<int>(v);
}

Layer read_layer(Tokens& t) {
  t.expect("layer");
  const int out = count(t, "layer output width");
  const int in = count(t, "layer input width");
  Layer l;
  try {
    l.activation = parse_activation(t.word("activation"));
  } catch (const ValidationError& e) {
    t.fail(e.what());
  }
  l.weight.resize(out, in);
  l.bias.resize(out);
  t.fill(l.weight, "weight");
  t.fill(l.bias, "bias");
  return l;
}

ModelParams read_model(Tokens& t) {
  t.expect("model");
  const int n_enc = count(t, "encoder layer count");
  const int n_cls = count(t, "classifier layer count");
  ModelParams m;
  for (int i = 0; i < n_enc; ++i) m.encoder.push_back(read_layer(t));
  for (int i = 0; i < n_cls; ++i) m.classifier.push_back(read_layer(t));
  m.validate();
  return m;
}

void read_header(Tokens& t) {
  t.expect(kCheckpointMagic);
  const long long version = t.integer("version");
  if (version != kCheckpointVersion) t.fail("unsupported version " + std::to_string(version));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

}  // namespace

void write_checkpoint(std::ostream& os, const TrainerState& state) {
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "time_step " << state.time_step << '\n';
  write_model(os, state.model);
  if (state.gmm.k > 0) {
    const GmmState& g = state.gmm;
    os << "gmm " << g.k << ' ' << g.dimension() << ' ' << real(g.reg_epsilon) << '\n';
    write_values(os, g.weights.transpose());
    write_values(os, g.means);
    for (const Matrix& c : g.covariances) write_values(os, c);
  }
  const ReplayBuffer& b = state.buffer;
  const auto d = b.empty() ? 0 : b.entries().front().input.size();
  os << "buffer " << b.per_task_budget() << ' ' << b.class_count() << ' ' << b.size() << ' ' << d << '\n';
  for (const BufferEntry& e : b.entries()) {
    os << "entry " << e.source_task << ' ' << e.pseudo_label << ' ' << real(e.distance_to_mean) << ' ';
    write_values(os, e.input.transpose());
  }
  os << "end\n";
}

TrainerState read_checkpoint(std::istream& is) {
  Tokens t(is);
  read_header(t);
  TrainerState s;
  t.expect("time_step");
  s.time_step = count(t, "time step");
  s.model = read_model(t);

  std::string section = t.word("section");
  if (section == "gmm") {
    GmmState& g = s.gmm;
    g.k = count(t, "component count");
    const int p = count(t, "mixture dimension");
    g.reg_epsilon = t.number("reg_epsilon");
    g.weights.resize(g.k);
    g.means.resize(g.k, p);
    t.fill(g.weights, "mixture weight");
    t.fill(g.means, "mixture mean");
    g.covariances.assign(static_cast<std::size_t>(g.k), Matrix(p, p));
    for (Matrix& c : g.covariances) t.fill(c, "covariance");
    try {
      g.validate();
    } catch (const ValidationError& e) {
      t.fail(e.what());
    }
    section = t.word("section");
  }
  if (section == "buffer") {
    const int n_b = count(t, "buffer budget");
    const int k = count(t, "buffer class count");
    const int n = count(t, "buffer entry count");
    const int d = count(t, "buffer input width");
    s.buffer = ReplayBuffer(n_b, std::max(k, 1));
    std::vector<BufferEntry> entries;
    for (int i = 0; i < n; ++i) {
      t.expect("entry");
      BufferEntry e;
      e.source_task = count(t, "entry task");
      e.pseudo_label = count(t, "entry label");
      e.distance_to_mean = t.number("entry distance");
      e.input.resize(d);
      t.fill(e.input, "entry input");
      entries.push_back(std::move(e));
    }
    // Re-append task by task so the budget invariants are re-checked.
    std::size_t i = 0;
    while (i < entries.size()) {
      const int task = entries[i].source_task;
      std::vector<BufferEntry> group;
      while (i < entries.size() && entries[i].source_task == task) group.push_back(entries[i++]);
      try {
        s.buffer.append(std::move(group), task);
      } catch (const ValidationError& e) {
        t.fail(e.what());
      }
    }
    section = t.word("section");
  }
  if (section != "end") t.fail("unexpected section '" + section + "'");
  return s;
}

void save_checkpoint(const std::string& path, const TrainerState& state) {
  auto os = open_out(path);
  write_checkpoint(os, state);
  if (!os) throw IoError("write failed for '" + path + "'");
}

TrainerState load_checkpoint(const std::string& path) {
  auto is = open_in(path);
  return read_checkpoint(is);
}

void save_model(const std::string& path, const ModelParams& model) {
  auto os = open_out(path);
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  write_model(os, model);
  os << "end\n";
  if (!os) throw IoError("write failed for '" + path + "'");
}

ModelParams load_model(const std::string& path) {
  auto is = open_in(path);
  Tokens t(is);
  read_header(t);
  ModelParams m = read_model(t);
  t.expect("end");
  return m;
}

}  // namespace cidal
