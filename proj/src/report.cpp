#include "etmpc/report.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace etmpc {
namespace {

constexpr int kPrecision = 12;

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(kPrecision) << v;
  return s.str();
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool IsInteger(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  if (tr.steps.empty()) return;
  const int nx = static_cast<int>(tr.steps.front().x.size());
  const int nu = static_cast<int>(tr.steps.front().u.size());
  out << "k";
  for (int i = 1; i <= nx; ++i) out << ",x_" << i;
  for (int i = 1; i <= nu; ++i) out << ",u_" << i;
  for (int i = 1; i <= nu; ++i) out << ",sat_u_" << i;
  out << ",beta,trigger,gamma,normF,normPhi\n";
  for (const auto& s : tr.steps) {
    const auto& t = tr.triggers.at(s.active);
    out << s.k;
    for (int i = 0; i < nx; ++i) out << "," << Num(s.x(i));
    for (int i = 0; i < nu; ++i) out << "," << Num(s.u(i));
    for (int i = 0; i < nu; ++i) out << "," << Num(s.u_sat(i));
    out << "," << Num(s.beta) << "," << (s.triggered ? 1 : 0) << "," << Num(t.gamma) << ","
        << Num(t.gains.F.norm()) << "," << Num(t.gains.Phi.norm()) << "\n";
  }
}

void write_triggers_csv(std::ostream& out, const Trajectory& tr) {
  out << "k,gamma,iterations,relative_gap,min_eigenvalue,audited,audit_passed,"
         "audit_min_eigenvalue\n";
  for (const auto& t : tr.triggers) {
    out << t.k << "," << Num(t.gamma) << "," << t.diagnostics.iterations << ","
        << Num(t.diagnostics.relative_gap) << "," << Num(t.min_block_eigenvalue) << ","
        << (t.audited ? 1 : 0) << "," << (t.audit_passed ? 1 : 0) << ","
        << Num(t.audited ? t.audit_min_eigenvalue : 0.0) << "\n";
  }
}

void write_beta_csv(std::ostream& out, const Trajectory& tr) {
  out << "k,beta\n";
  for (int k = 0; k <= tr.num_steps(); ++k) out << k << "," << Num(tr.beta_at(k)) << "\n";
}

void write_gamma_csv(std::ostream& out, const Trajectory& tr) {
  out << "k,gamma\n";
  for (const auto& s : tr.steps) out << s.k << "," << Num(tr.triggers.at(s.active).gamma) << "\n";
}

void write_gain_norms_csv(std::ostream& out, const Trajectory& tr) {
  out << "k,normF,normPhi\n";
  for (const auto& g : gain_norm_series(tr)) {
    out << g.k << "," << Num(g.F) << "," << Num(g.Phi) << "\n";
  }
}

void write_histogram_csv(std::ostream& out, const TriggerStatistics& stats) {
  out << "interval,count\n";
  for (const auto& [interval, count] : stats.histogram) out << interval << "," << count << "\n";
}

void write_metrics(std::ostream& out, const std::string& mode, const RunMetrics& m) {
  out << "mode = " << mode << "\n";
  out << "steps = " << m.stats.steps << "\n";
  out << "triggers = " << m.stats.triggers << "\n";
  out << "triggering_ratio = " << Num(m.stats.ratio) << "\n";
  out << "average_interval = " << Num(m.stats.average_interval) << "\n";
  out << "steps_per_trigger = " << Num(m.stats.steps_per_trigger) << "\n";
  out << "settling_step = " << (m.settling_step ? std::to_string(*m.settling_step) : "none")
      << "\n";
  out << "settling_time = " << (m.settling_step ? Num(m.settling_time) : "none") << "\n";
  out << "first_gamma = " << Num(m.first_gamma) << "\n";
  out << "last_gamma = " << Num(m.last_gamma) << "\n";
  out << "min_beta = " << Num(m.min_beta) << "\n";
  out << "max_decrease_relative = " << Num(m.max_decrease_relative) << "\n";
  out << "decrease_violations = " << m.decrease_violations << "\n";
  out << "max_invariance_ratio = " << Num(m.max_invariance_ratio) << "\n";
  out << "invariance_violations = " << m.invariance_violations << "\n";
  out << "audits = " << m.audits << "\n";
  out << "audits_passed = " << m.audits_passed << "\n";
  out << "min_block_eigenvalue = " << Num(m.min_block_eigenvalue) << "\n";
  out << "max_relative_gap = " << Num(m.max_relative_gap) << "\n";
  out << "max_saturation_ratio = " << Num(m.max_saturation_ratio) << "\n";
  out << "failed_solves = " << m.failed_solves << "\n";
  out << "certified = " << (m.certified ? "true" : "false") << "\n";
}

std::map<std::string, std::string> read_metrics(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    out[Trim(t.substr(0, eq))] = Trim(t.substr(eq + 1));
  }
  return out;
}

void write_summary(std::ostream& out,
                   const std::vector<std::pair<std::string, RunMetrics>>& runs) {
  constexpr int kLabel = 26;
  constexpr int kCol = 12;
  out << std::left << std::setw(kLabel) << "Metric";
  for (const auto& [mode, m] : runs) out << std::right << std::setw(kCol) << mode;
  out << "\n";
  auto row = [&](const std::string& label, auto value) {
    out << std::left << std::setw(kLabel) << label;
    for (const auto& [mode, m] : runs) out << std::right << std::setw(kCol) << value(m);
    out << "\n";
  };
  auto fixed = [](double v, int prec) {
    if (std::isnan(v)) return std::string("n/a");
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  row("Triggering ratio", [&](const RunMetrics& m) { return fixed(100.0 * m.stats.ratio, 2) + "%"; });
  row("Average interval (steps)",
      [&](const RunMetrics& m) { return fixed(m.stats.average_interval, 2); });
  row("Steps per trigger", [&](const RunMetrics& m) { return fixed(m.stats.steps_per_trigger, 2); });
  row("Triggers", [](const RunMetrics& m) { return std::to_string(m.stats.triggers); });
  row("Settling step k_s", [](const RunMetrics& m) {
    return m.settling_step ? std::to_string(*m.settling_step) : std::string("none");
  });
  row("Certified", [](const RunMetrics& m) { return std::string(m.certified ? "yes" : "no"); });
}

std::vector<GoldenMismatch> compare_metrics(const std::map<std::string, std::string>& golden,
                                            const std::map<std::string, std::string>& actual,
                                            double rel_tol) {
  std::vector<GoldenMismatch> out;
  for (const auto& [key, expected] : golden) {
    const auto it = actual.find(key);
    if (it == actual.end()) {
      out.push_back({key, expected, "<missing>"});
      continue;
    }
    const std::string& got = it->second;
    bool ok = expected == got;
    if (!ok && !IsInteger(expected)) {
      try {
        const double e = std::stod(expected);
        const double a = std::stod(got);
        ok = std::abs(e - a) <= rel_tol * std::abs(e) + 1e-9;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) out.push_back({key, expected, got});
  }
  return out;
}

}  // namespace etmpc
