#include "etmpc/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "etmpc/errors.hpp"

namespace etmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Thrown inside value parsing; rewrapped with line and field.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitTokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool ParseDouble(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

double ToDouble(const std::string& s) {
  double v = 0.0;
  if (!ParseDouble(Trim(s), &v)) throw BadValue("expected a number, got '" + s + "'");
  return v;
}

long long ToInt(const std::string& s) {
  const std::string t = Trim(s);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw BadValue("expected an integer, got '" + s + "'");
  }
  return v;
}

bool ToBool(const std::string& s) {
  const std::string t = Trim(s);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw BadValue("expected true or false, got '" + s + "'");
}

bool IsRowsLiteral(const std::string& s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c)) &&
        std::string(".eE+-,; \t").find(c) == std::string::npos) {
      return false;
    }
  }
  return !Trim(s).empty();
}

// "1 2; 3 4" (commas also separate entries).
MatrixXd ParseRows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    const auto toks = SplitTokens(row);
    if (toks.empty()) {
      if (Trim(row).empty() && !rows.empty()) throw BadValue("empty matrix row");
      continue;
    }
    std::vector<double> r;
    for (const auto& t : toks) r.push_back(ToDouble(t));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw BadValue("empty matrix");
  MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw BadValue("matrix rows differ in length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

MatrixXd ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BadValue("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = SplitTokens(t);
    std::vector<double> r;
    bool numeric = true;
    for (const auto& tok : toks) {
      double v = 0.0;
      if (!ParseDouble(tok, &v)) {
        numeric = false;
        break;
      }
      r.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw BadValue("non-numeric entry in '" + path.string() + "'");
    }
    first = false;
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw BadValue("rows differ in length in '" + path.string() + "'");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw BadValue("no data in '" + path.string() + "'");
  MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

using Lookup = std::function<MatrixXd(const std::string&)>;

// Recursive descent over sums and products of matrix primaries.
class ExprParser {
 public:
  ExprParser(std::string text, Lookup lookup, std::filesystem::path dir)
      : s_(std::move(text)), lookup_(std::move(lookup)), dir_(std::move(dir)) {}

  MatrixXd Parse() {
    if (IsRowsLiteral(s_)) return ParseRows(s_);
    MatrixXd m = Sum();
    Skip();
    if (pos_ != s_.size()) throw BadValue("unexpected '" + s_.substr(pos_) + "'");
    return m;
  }

 private:
  void Skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool Eat(char c) {
    Skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  MatrixXd Sum() {
    MatrixXd m = Product();
    for (;;) {
      if (Eat('+')) {
        m = Add(m, Product(), 1.0);
      } else if (Eat('-')) {
        m = Add(m, Product(), -1.0);
      } else {
        return m;
      }
    }
  }

  static MatrixXd Add(const MatrixXd& a, const MatrixXd& b, double sign) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw BadValue("sum of matrices with different shapes");
    }
    return a + sign * b;
  }

  MatrixXd Product() {
    MatrixXd m = Unary();
    while (Eat('*')) {
      const MatrixXd r = Unary();
      if (m.size() == 1) {
        m = m(0, 0) * r;
      } else if (r.size() == 1) {
        m *= r(0, 0);
      } else if (m.cols() == r.rows()) {
        m = m * r;
      } else {
        throw BadValue("product of matrices with incompatible shapes");
      }
    }
    return m;
  }

  MatrixXd Unary() {
    if (Eat('-')) return -Unary();
    if (Eat('+')) return Unary();
    return Primary();
  }

  // Text up to the bracket matching the one just consumed.
  std::string Enclosed(char open, char close) {
    int depth = 1;
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      if (s_[pos_] == open) ++depth;
      if (s_[pos_] == close && --depth == 0) {
        return s_.substr(start, pos_++ - start);
      }
      ++pos_;
    }
    throw BadValue(std::string("missing '") + close + "'");
  }

  MatrixXd Primary() {
    Skip();
    if (pos_ >= s_.size()) throw BadValue("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprParser inner(Enclosed('(', ')'), lookup_, dir_);
      return inner.Parse();
    }
    if (c == '[') {
      ++pos_;
      return Bracket(Enclosed('[', ']'));
    }
    if (c == '@') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::filesystem::path p(s_.substr(start, pos_ - start));
      return ReadCsv(p.is_absolute() ? p : dir_ / p);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw BadValue("bad number");
      pos_ += end - begin;
      return MatrixXd::Constant(1, 1, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = s_.substr(start, pos_ - start);
      if (Eat('(')) return Function(name, Enclosed('(', ')'));
      return lookup_(name);
    }
    throw BadValue(std::string("unexpected '") + c + "'");
  }

  MatrixXd Bracket(const std::string& inner) {
    const std::string t = Trim(inner);
    if (t.empty() || t[0] != '[') return ParseRows(t);
    // [[a, b], [c, d]]
    std::string rows;
    std::size_t i = 0;
    while (i < t.size()) {
      if (t[i] == '[') {
        const auto close = t.find(']', i);
        if (close == std::string::npos) throw BadValue("missing ']'");
        if (!rows.empty()) rows += ';';
        rows += t.substr(i + 1, close - i - 1);
        i = close + 1;
      } else if (t[i] == ',' || std::isspace(static_cast<unsigned char>(t[i]))) {
        ++i;
      } else {
        throw BadValue("unexpected '" + std::string(1, t[i]) + "' in nested list");
      }
    }
    return ParseRows(rows);
  }

  MatrixXd Function(const std::string& name, const std::string& args) {
    auto ints = [&](std::size_t lo, std::size_t hi) {
      std::vector<long long> v;
      for (const auto& tok : SplitTokens(args)) v.push_back(ToInt(tok));
      if (v.size() < lo || v.size() > hi) throw BadValue(name + ": wrong number of arguments");
      for (auto n : v) {
        if (n < 1) throw BadValue(name + ": sizes must be >= 1");
      }
      return v;
    };
    if (name == "eye") {
      const auto n = ints(1, 1);
      return MatrixXd::Identity(n[0], n[0]);
    }
    if (name == "zeros" || name == "ones") {
      const auto n = ints(1, 2);
      const long long c = n.size() == 2 ? n[1] : n[0];
      return MatrixXd::Constant(n[0], c, name == "ones" ? 1.0 : 0.0);
    }
    if (name == "diag") {
      const MatrixXd v = IsRowsLiteral(args) ? ParseRows(args)
                                             : ExprParser(args, lookup_, dir_).Parse();
      const VectorXd flat = v.reshaped();
      return flat.asDiagonal();
    }
    throw BadValue("unknown function '" + name + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
  Lookup lookup_;
  std::filesystem::path dir_;
};

struct Entry {
  std::string value;
  int line = 0;
};

// Section -> key -> entry, with bookkeeping for unknown keys.
class Document {
 public:
  Document(std::istream& in, std::filesystem::path dir) : dir_(std::move(dir)) {
    static const std::set<std::string> kSections{"model", "cost", "etm", "scenario"};
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string t = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (t.empty()) continue;
      if (t.front() == '[' && t.back() == ']') {
        section = Trim(t.substr(1, t.size() - 2));
        if (!kSections.count(section)) throw ConfigError("unknown section", line, section);
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
      const std::string key = Trim(t.substr(0, eq));
      if (key.empty()) throw ConfigError("empty key", line);
      if (section.empty()) throw ConfigError("key outside any section", line, key);
      auto& sec = entries_[section];
      if (sec.count(key)) throw ConfigError("duplicate key", line, key);
      sec[key] = {Trim(t.substr(eq + 1)), line};
    }
  }

  bool Has(const std::string& sec, const std::string& key) const {
    const auto it = entries_.find(sec);
    return it != entries_.end() && it->second.count(key);
  }

  const Entry& Get(const std::string& sec, const std::string& key) {
    if (!Has(sec, key)) throw ConfigError("missing required key in [" + sec + "]", 0, key);
    used_.insert(sec + "." + key);
    return entries_.at(sec).at(key);
  }

  template <typename F>
  auto Value(const std::string& sec, const std::string& key, F convert) {
    const Entry& e = Get(sec, key);
    try {
      return convert(e.value);
    } catch (const BadValue& err) {
      throw ConfigError(err.what(), e.line, key);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError(err.what(), e.line, key);
    }
  }

  template <typename F, typename T>
  T Optional(const std::string& sec, const std::string& key, F convert, T fallback) {
    return Has(sec, key) ? static_cast<T>(Value(sec, key, convert)) : fallback;
  }

  MatrixXd Matrix(const std::string& sec, const std::string& key) {
    const Entry& e = Get(sec, key);
    if (active_.count(sec + "." + key)) throw ConfigError("circular reference", e.line, key);
    active_.insert(sec + "." + key);
    Lookup lookup = [this, sec, &e](const std::string& name) -> MatrixXd {
      if (!Has(sec, name) || entries_.at(sec).at(name).line >= e.line) {
        throw BadValue("'" + name + "' is not a matrix defined earlier in [" + sec + "]");
      }
      return Matrix(sec, name);
    };
    MatrixXd m;
    try {
      m = ExprParser(e.value, lookup, dir_).Parse();
    } catch (const BadValue& err) {
      active_.erase(sec + "." + key);
      throw ConfigError(err.what(), e.line, key);
    }
    active_.erase(sec + "." + key);
    return m;
  }

  MatrixXd Shaped(const std::string& sec, const std::string& key, int rows, int cols) {
    MatrixXd m = Matrix(sec, key);
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream msg;
      msg << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
      throw ConfigError(msg.str(), Line(sec, key), key);
    }
    return m;
  }

  VectorXd Vector(const std::string& sec, const std::string& key, int n) {
    const MatrixXd m = Matrix(sec, key);
    if (m.rows() != 1 && m.cols() != 1) throw ConfigError("expected a vector", Line(sec, key), key);
    if (m.size() != n) {
      throw ConfigError("expected " + std::to_string(n) + " entries, got " +
                            std::to_string(m.size()),
                        Line(sec, key), key);
    }
    return m.reshaped();
  }

  int Line(const std::string& sec, const std::string& key) const {
    return entries_.at(sec).at(key).line;
  }

  void RejectUnused() const {
    for (const auto& [sec, keys] : entries_) {
      for (const auto& [key, e] : keys) {
        if (!used_.count(sec + "." + key)) {
          throw ConfigError("unknown key in [" + sec + "]", e.line, key);
        }
      }
    }
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::map<std::string, Entry>> entries_;
  std::set<std::string> used_;
  std::set<std::string> active_;
};

int PositiveInt(const std::string& s) {
  const long long v = ToInt(s);
  if (v < 1) throw BadValue("expected a positive integer");
  return static_cast<int>(v);
}

std::vector<int> IntList(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : SplitTokens(s)) out.push_back(PositiveInt(tok));
  if (out.empty()) throw BadValue("empty list");
  return out;
}

std::vector<VectorXd> RowsOf(const MatrixXd& m) {
  std::vector<VectorXd> out;
  for (int i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

DisturbanceSignal MakeDisturbance(const ScenarioConfig& c) {
  const double d = std::sqrt(c.d_sq);
  const auto& s = c.disturbance;
  if (s.kind == "zero") return DisturbanceSignal::Zero(c.n_w);
  if (s.kind == "sinusoid") {
    return DisturbanceSignal::Sinusoid(c.n_w, s.amplitude, s.frequency, s.phase, d);
  }
  if (s.kind == "random") {
    return DisturbanceSignal::BoundedRandom(c.n_w, s.amplitude, d,
                                            c.seed ^ 0x9e3779b97f4a7c15ULL);
  }
  if (s.kind == "table") return DisturbanceSignal::Table(s.table, d);
  throw ParameterError("unknown disturbance kind '" + s.kind + "'");
}

SchedulingSignal MakeScheduling(const ScenarioConfig& c) {
  const auto& s = c.scheduling;
  if (s.kind == "random") return SchedulingSignal::Random(c.num_vertices(), c.seed);
  if (s.kind == "constant") return SchedulingSignal::Constant(SchedulingWeights(s.weights));
  if (s.kind == "sinusoid") return SchedulingSignal::Sinusoid(c.num_vertices(), s.frequency);
  throw ParameterError("unknown scheduling kind '" + s.kind + "'");
}

PolytopicModel MakeModel(const ScenarioConfig& c) {
  std::vector<VertexMatrices> vs;
  for (int v = 0; v < c.num_vertices(); ++v) vs.push_back({c.A[v], c.A_delay[v], c.B[v]});
  return PolytopicModel(c.delays, std::move(vs), c.D, c.u_sat, std::sqrt(c.d_sq));
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string FmtMatrix(const MatrixXd& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += Fmt(m(i, j));
    }
  }
  return out;
}

bool IsSpd(const MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

std::vector<TriggerMode> parse_mode_list(const std::string& text) {
  std::vector<TriggerMode> out;
  for (const auto& tok : SplitTokens(text)) {
    TriggerMode m;
    try {
      m = parse_trigger_mode(tok);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what(), 0, "mode");
    }
    for (auto seen : out) {
      if (seen == m) throw ConfigError("mode '" + tok + "' listed twice", 0, "mode");
    }
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no trigger mode selected", 0, "mode");
  return out;
}

ScenarioConfig parse_scenario(std::istream& in, const std::string& source_dir) {
  Document doc(in, source_dir);
  ScenarioConfig c;
  auto dbl = [](const std::string& s) { return ToDouble(s); };

  c.n_x = doc.Value("model", "n_x", PositiveInt);
  c.n_u = doc.Value("model", "n_u", PositiveInt);
  c.delays = doc.Optional("model", "delays", IntList, std::vector<int>{1});
  for (std::size_t i = 1; i < c.delays.size(); ++i) {
    if (c.delays[i] <= c.delays[i - 1]) {
      throw ConfigError("delays must be strictly increasing", doc.Line("model", "delays"),
                        "delays");
    }
  }
  const int L = doc.Value("model", "vertices", PositiveInt);
  const MatrixXd D = doc.Matrix("model", "D");
  c.n_w = doc.Optional("model", "n_w", PositiveInt, static_cast<int>(D.cols()));
  if (D.rows() != c.n_x || D.cols() != c.n_w) {
    throw ConfigError("expected " + std::to_string(c.n_x) + "x" + std::to_string(c.n_w),
                      doc.Line("model", "D"), "D");
  }
  c.D = D;
  for (int v = 1; v <= L; ++v) {
    const std::string sv = std::to_string(v);
    c.A.push_back(doc.Shaped("model", "A" + sv, c.n_x, c.n_x));
    c.B.push_back(doc.Shaped("model", "B" + sv, c.n_x, c.n_u));
    std::vector<MatrixXd> ad;
    for (std::size_t r = 1; r <= c.delays.size(); ++r) {
      std::string key = "Ad" + sv + "_" + std::to_string(r);
      if (c.delays.size() == 1 && !doc.Has("model", key) && doc.Has("model", "Ad" + sv)) {
        key = "Ad" + sv;
      }
      ad.push_back(doc.Shaped("model", key, c.n_x, c.n_x));
    }
    c.A_delay.push_back(std::move(ad));
  }
  c.u_sat = doc.Value("model", "u_sat", dbl);
  c.d_sq = doc.Value("model", "d_sq", dbl);

  c.Q = doc.Shaped("cost", "Q", c.n_x, c.n_x);
  c.R = doc.Shaped("cost", "R", c.n_u, c.n_u);
  c.varphi = doc.Value("cost", "varphi", dbl);
  c.delta = doc.Value("cost", "delta", dbl);
  c.invariance_form = doc.Optional("cost", "invariance_form", parse_invariance_form,
                                   InvarianceForm::kContractive);

  c.mu = doc.Value("etm", "mu", dbl);
  c.theta = doc.Value("etm", "theta", dbl);
  c.epsilon = doc.Value("etm", "epsilon", dbl);
  c.beta0 = doc.Value("etm", "beta0", dbl);
  if (doc.Has("etm", "mode")) c.modes = doc.Value("etm", "mode", parse_mode_list);

  c.x0 = doc.Vector("scenario", "x0", c.n_x);
  if (doc.Has("scenario", "pre_history")) {
    const MatrixXd h = doc.Matrix("scenario", "pre_history");
    if (h.cols() != c.n_x) {
      throw ConfigError("each row must hold one state of size " + std::to_string(c.n_x),
                        doc.Line("scenario", "pre_history"), "pre_history");
    }
    c.pre_history = RowsOf(h);
  }
  c.steps = doc.Optional("scenario", "steps", PositiveInt, c.steps);
  auto& dist = c.disturbance;
  dist.kind = doc.Optional("scenario", "disturbance", Trim, dist.kind);
  dist.amplitude = doc.Optional("scenario", "disturbance_amplitude", dbl, dist.amplitude);
  dist.frequency = doc.Optional("scenario", "disturbance_frequency", dbl, dist.frequency);
  dist.phase = doc.Optional("scenario", "disturbance_phase", dbl, dist.phase);
  if (doc.Has("scenario", "disturbance_table")) {
    const MatrixXd t = doc.Matrix("scenario", "disturbance_table");
    if (t.cols() != c.n_w) {
      throw ConfigError("each row must hold one disturbance of size " + std::to_string(c.n_w),
                        doc.Line("scenario", "disturbance_table"), "disturbance_table");
    }
    dist.table = RowsOf(t);
  }
  auto& sched = c.scheduling;
  sched.kind = doc.Optional("scenario", "scheduling", Trim, sched.kind);
  if (doc.Has("scenario", "scheduling_weights")) {
    sched.weights = doc.Vector("scenario", "scheduling_weights", L);
  }
  sched.frequency = doc.Optional("scenario", "scheduling_frequency", dbl, sched.frequency);
  c.seed = doc.Optional(
      "scenario", "seed",
      [](const std::string& s) {
        const long long v = ToInt(s);
        if (v < 0) throw BadValue("seed must be >= 0");
        return static_cast<std::uint64_t>(v);
      },
      c.seed);
  c.sample_time = doc.Optional("scenario", "sample_time", dbl, c.sample_time);
  c.zeta = doc.Optional("scenario", "zeta", dbl, c.zeta);
  c.warm_start = doc.Optional("scenario", "warm_start", ToBool, c.warm_start);
  c.audit_feasibility =
      doc.Optional("scenario", "audit_feasibility", ToBool, c.audit_feasibility);

  static const std::set<std::string> kDisturbances{"zero", "sinusoid", "random", "table"};
  static const std::set<std::string> kSchedules{"random", "constant", "sinusoid"};
  if (!kDisturbances.count(dist.kind)) {
    throw ConfigError("unknown kind '" + dist.kind + "'", doc.Line("scenario", "disturbance"),
                      "disturbance");
  }
  if (dist.kind == "table" && dist.table.empty()) {
    throw ConfigError("table disturbance needs disturbance_table", 0, "disturbance_table");
  }
  if (!kSchedules.count(sched.kind)) {
    throw ConfigError("unknown kind '" + sched.kind + "'", doc.Line("scenario", "scheduling"),
                      "scheduling");
  }
  if (sched.kind == "constant" && sched.weights.size() == 0) {
    throw ConfigError("constant scheduling needs scheduling_weights", 0, "scheduling_weights");
  }
  doc.RejectUnused();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(in, dir.empty() ? "." : dir.string());
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
  out << "[model]\n";
  out << "n_x = " << c.n_x << "\n";
  out << "n_u = " << c.n_u << "\n";
  out << "n_w = " << c.n_w << "\n";
  out << "delays =";
  for (int d : c.delays) out << " " << d;
  out << "\n";
  out << "vertices = " << c.num_vertices() << "\n";
  for (int v = 0; v < c.num_vertices(); ++v) {
    const std::string sv = std::to_string(v + 1);
    out << "A" << sv << " = " << FmtMatrix(c.A[v]) << "\n";
    for (std::size_t r = 0; r < c.A_delay[v].size(); ++r) {
      out << "Ad" << sv << "_" << r + 1 << " = " << FmtMatrix(c.A_delay[v][r]) << "\n";
    }
    out << "B" << sv << " = " << FmtMatrix(c.B[v]) << "\n";
  }
  out << "D = " << FmtMatrix(c.D) << "\n";
  out << "u_sat = " << Fmt(c.u_sat) << "\n";
  out << "d_sq = " << Fmt(c.d_sq) << "\n";

  out << "\n[cost]\n";
  out << "Q = " << FmtMatrix(c.Q) << "\n";
  out << "R = " << FmtMatrix(c.R) << "\n";
  out << "varphi = " << Fmt(c.varphi) << "\n";
  out << "delta = " << Fmt(c.delta) << "\n";
  out << "invariance_form = " << to_string(c.invariance_form) << "\n";

  out << "\n[etm]\n";
  out << "mode = ";
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    out << (i ? "," : "") << to_string(c.modes[i]);
  }
  out << "\n";
  out << "mu = " << Fmt(c.mu) << "\n";
  out << "theta = " << Fmt(c.theta) << "\n";
  out << "epsilon = " << Fmt(c.epsilon) << "\n";
  out << "beta0 = " << Fmt(c.beta0) << "\n";

  out << "\n[scenario]\n";
  out << "x0 = " << FmtMatrix(c.x0.transpose()) << "\n";
  if (!c.pre_history.empty()) {
    MatrixXd h(c.pre_history.size(), c.n_x);
    for (std::size_t i = 0; i < c.pre_history.size(); ++i) h.row(i) = c.pre_history[i];
    out << "pre_history = " << FmtMatrix(h) << "\n";
  }
  out << "steps = " << c.steps << "\n";
  out << "disturbance = " << c.disturbance.kind << "\n";
  out << "disturbance_amplitude = " << Fmt(c.disturbance.amplitude) << "\n";
  out << "disturbance_frequency = " << Fmt(c.disturbance.frequency) << "\n";
  out << "disturbance_phase = " << Fmt(c.disturbance.phase) << "\n";
  if (!c.disturbance.table.empty()) {
    MatrixXd t(c.disturbance.table.size(), c.n_w);
    for (std::size_t i = 0; i < c.disturbance.table.size(); ++i) t.row(i) = c.disturbance.table[i];
    out << "disturbance_table = " << FmtMatrix(t) << "\n";
  }
  out << "scheduling = " << c.scheduling.kind << "\n";
  if (c.scheduling.weights.size() > 0) {
    out << "scheduling_weights = " << FmtMatrix(c.scheduling.weights.transpose()) << "\n";
  }
  out << "scheduling_frequency = " << Fmt(c.scheduling.frequency) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "sample_time = " << Fmt(c.sample_time) << "\n";
  out << "zeta = " << Fmt(c.zeta) << "\n";
  out << "warm_start = " << (c.warm_start ? "true" : "false") << "\n";
  out << "audit_feasibility = " << (c.audit_feasibility ? "true" : "false") << "\n";
}

std::vector<ValidationCheck> validate_scenario(const ScenarioConfig& c) {
  std::vector<ValidationCheck> out;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    out.push_back({name, ok, detail});
  };
  auto range = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };

  check("mu in (0, 1)", c.mu > 0.0 && c.mu < 1.0, "mu = " + range(c.mu));
  check("theta in (0, 1)", c.theta > 0.0 && c.theta < 1.0, "theta = " + range(c.theta));
  const double inv_mu = c.mu > 0.0 ? 1.0 / c.mu : std::numeric_limits<double>::infinity();
  check("epsilon >= 1/mu", c.epsilon >= inv_mu,
        "epsilon = " + range(c.epsilon) + ", 1/mu = " + range(inv_mu));
  check("beta0 >= 0", c.beta0 >= 0.0, "beta0 = " + range(c.beta0));
  check("delta in (0, 1 - mu)", c.delta > 0.0 && c.delta < 1.0 - c.mu,
        "delta = " + range(c.delta) + ", 1 - mu = " + range(1.0 - c.mu));
  check("varphi > 0", c.varphi > 0.0, "varphi = " + range(c.varphi));
  check("u_sat > 0", c.u_sat > 0.0, "u_sat = " + range(c.u_sat));
  check("d_sq > 0", c.d_sq > 0.0, "d_sq = " + range(c.d_sq));
  check("steps >= 1", c.steps >= 1, "steps = " + std::to_string(c.steps));
  check("zeta > 0", c.zeta > 0.0, "zeta = " + range(c.zeta));
  check("sample_time > 0", c.sample_time > 0.0, "sample_time = " + range(c.sample_time));
  check("single delay channel", c.delays.size() == 1,
        std::to_string(c.delays.size()) + " delay channel(s)");

  std::string dim_problem;
  auto expect = [&](const std::string& what, const MatrixXd& m, int r, int cc) {
    if (dim_problem.empty() && (m.rows() != r || m.cols() != cc)) {
      dim_problem = what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(r) + "x" + std::to_string(cc);
    }
  };
  if (c.num_vertices() == 0) dim_problem = "no vertices";
  if (c.A_delay.size() != c.A.size() || c.B.size() != c.A.size()) {
    dim_problem = "vertex matrix counts differ";
  }
  for (int v = 0; v < c.num_vertices() && dim_problem.empty(); ++v) {
    const std::string sv = std::to_string(v + 1);
    expect("A" + sv, c.A[v], c.n_x, c.n_x);
    expect("B" + sv, c.B[v], c.n_x, c.n_u);
    if (c.A_delay[v].size() != c.delays.size()) dim_problem = "Ad" + sv + " count";
    for (std::size_t r = 0; r < c.A_delay[v].size(); ++r) {
      expect("Ad" + sv + "_" + std::to_string(r + 1), c.A_delay[v][r], c.n_x, c.n_x);
    }
  }
  expect("D", c.D, c.n_x, c.n_w);
  expect("Q", c.Q, c.n_x, c.n_x);
  expect("R", c.R, c.n_u, c.n_u);
  expect("x0", c.x0, c.n_x, 1);
  if (!c.pre_history.empty() && !c.delays.empty() &&
      static_cast<int>(c.pre_history.size()) != c.delays.back()) {
    if (dim_problem.empty()) {
      dim_problem = "pre_history needs " + std::to_string(c.delays.back()) + " states";
    }
  }
  for (const auto& x : c.pre_history) expect("pre_history row", x, c.n_x, 1);
  if (c.scheduling.kind == "constant") {
    expect("scheduling_weights", c.scheduling.weights, c.num_vertices(), 1);
  }
  for (const auto& w : c.disturbance.table) expect("disturbance_table row", w, c.n_w, 1);
  const bool dims_ok = dim_problem.empty();
  check("matrix dimensions", dims_ok, dims_ok ? "consistent" : dim_problem);

  check("Q symmetric positive definite", IsSpd(c.Q), "");
  check("R symmetric positive definite", IsSpd(c.R), "");

  if (!dims_ok || !(c.d_sq > 0.0) || !(c.u_sat > 0.0)) {
    check("disturbance budget", false, "not checked (model invalid)");
    check("scheduling weights", false, "not checked (model invalid)");
    return out;
  }
  try {
    const PolytopicModel model = MakeModel(c);
    const auto budget = validate_disturbance_budget(MakeDisturbance(c), model, c.steps);
    check("disturbance budget", budget.within_bound,
          "sup |w|^2 = " + range(budget.worst_sq_norm) + ", d^2 = " + range(c.d_sq));
  } catch (const Error& e) {
    check("disturbance budget", false, e.what());
  }
  try {
    MakeScheduling(c);
    check("scheduling weights", true, c.scheduling.kind);
  } catch (const Error& e) {
    check("scheduling weights", false, e.what());
  }
  return out;
}

Scenario ScenarioConfig::build(TriggerMode mode) const {
  std::string failed;
  for (const auto& chk : validate_scenario(*this)) {
    if (chk.passed) continue;
    if (!failed.empty()) failed += "; ";
    failed += chk.name + (chk.detail.empty() ? "" : " (" + chk.detail + ")");
  }
  if (!failed.empty()) throw ConfigError("invalid scenario: " + failed);
  try {
    Scenario s(MakeModel(*this), CostConfig(Q, R, varphi, delta, d_sq),
               EtmConfig(mu, theta, epsilon, beta0), x0);
    s.pre_history = pre_history;
    s.steps = steps;
    s.mode = mode;
    s.disturbance = MakeDisturbance(*this);
    s.scheduling = MakeScheduling(*this);
    s.invariance_form = invariance_form;
    s.warm_start = warm_start;
    s.audit_feasibility = audit_feasibility;
    s.validate();
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
}

}  // namespace etmpc
