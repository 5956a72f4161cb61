#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "etmpc/config.hpp"
#include "etmpc/errors.hpp"
#include "support/generators.hpp"

namespace etmpc {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using testing::SourcePath;

std::string SurrogateText() {
  std::ifstream in(SourcePath("scenarios/surrogate.cfg"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Replaces the line `key = ...` (first occurrence) with `line`.
std::string WithLine(const std::string& text, const std::string& key, const std::string& line) {
  return std::regex_replace(text, std::regex("(^|\n)" + key + " = [^\n]*"), "$1" + line,
                            std::regex_constants::format_first_only);
}

ScenarioConfig Parse(const std::string& text, const std::string& dir = ".") {
  std::istringstream in(text);
  return parse_scenario(in, dir);
}

int LineOf(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  std::string l;
  for (int n = 1; std::getline(in, l); ++n) {
    if (l.rfind(needle, 0) == 0) return n;
  }
  return -1;
}

TEST(ParseScenario, Surrogate) {
  const auto c = testing::SurrogateConfig();
  EXPECT_EQ(c.n_x, 2);
  EXPECT_EQ(c.num_vertices(), 2);
  EXPECT_EQ(c.delays, std::vector<int>{1});
  MatrixXd A1(2, 2);
  A1 << 0.85, 0.12, -0.04, 0.78;
  EXPECT_EQ(c.A[0], A1);
  EXPECT_TRUE(c.A[1].isApprox(0.9 * A1, 1e-15));
  EXPECT_EQ(c.B[1], c.B[0]);
  EXPECT_EQ(c.D, 0.1 * MatrixXd::Identity(2, 2));
  EXPECT_DOUBLE_EQ(c.Q(1, 1), 0.01);
  EXPECT_EQ(c.Q(0, 1), 0.0);
  EXPECT_EQ(c.modes.size(), 3u);
  EXPECT_EQ(c.disturbance.kind, "sinusoid");
  EXPECT_EQ(c.x0, Eigen::Vector2d(1.2, 0.9));
}

TEST(ParseScenario, MatrixSyntaxVariantsAgree) {
  const auto base = SurrogateText();
  const auto ref = Parse(base).A[0];
  for (const std::string v :
       {"A1 = [[0.85, 0.12], [-0.04, 0.78]]", "A1 = 0.85, 0.12; -0.04, 0.78",
        "A1 = diag(0.85 0.78) + [[0, 0.12], [-0.04, 0]]",
        "A1 = 0.5 * (2 * [[0.85, 0.12], [-0.04, 0.78]])",
        "A1 = eye(2) * [[0.85, 0.12], [-0.04, 0.78]] + zeros(2, 2)"}) {
    EXPECT_TRUE(Parse(WithLine(base, "A1", v)).A[0].isApprox(ref, 1e-15)) << v;
  }
  EXPECT_EQ(Parse(WithLine(base, "D", "D = 0.1 * (ones(2, 2) - [[0, 1], [1, 0]])")).D,
            Parse(base).D);
}

TEST(ParseScenario, CommentsAndWhitespace) {
  auto text = WithLine(SurrogateText(), "u_sat", "  u_sat   =   0.4   # clamp");
  EXPECT_DOUBLE_EQ(Parse(text).u_sat, 0.4);
}

TEST(ParseScenario, CsvReferencesResolveNextToTheFile) {
  const fs::path dir = fs::temp_directory_path() / "etmpc_config_csv";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "a1.csv");
    f << "c1,c2\n0.85,0.12\n-0.04,0.78\n";
  }
  const auto text = WithLine(SurrogateText(), "A1", "A1 = @a1.csv");
  {
    std::ofstream f(dir / "s.cfg");
    f << text;
  }
  const auto c = load_scenario((dir / "s.cfg").string());
  EXPECT_EQ(c.A[0], testing::SurrogateConfig().A[0]);
  EXPECT_THROW(Parse(WithLine(SurrogateText(), "A1", "A1 = @missing.csv"), dir.string()),
               ConfigError);
  fs::remove_all(dir);
}

TEST(ParseScenario, ErrorsCarryLineAndField) {
  const auto base = SurrogateText();
  struct Case {
    std::string text;
    std::string field;
    int line;
  };
  const auto shape = WithLine(base, "B1", "B1 = 0.1 0.25");
  const auto unknown = WithLine(base, "u_sat", "u_sat = 0.4\nspeed = 3");
  const auto dup = WithLine(base, "u_sat", "u_sat = 0.4\nu_sat = 0.5");
  const auto bad = WithLine(base, "Ad1", "Ad1 = 0.04 0; 0.02 zz");
  for (const auto& c : {Case{shape, "B1", LineOf(shape, "B1 =")},
                        Case{unknown, "speed", LineOf(unknown, "speed")},
                        Case{dup, "u_sat", LineOf(dup, "u_sat = 0.5")},
                        Case{bad, "Ad1", LineOf(bad, "Ad1 =")}}) {
    try {
      Parse(c.text);
      ADD_FAILURE() << "expected ConfigError for " << c.field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), c.field) << e.what();
      EXPECT_EQ(e.line(), c.line) << e.what();
    }
  }
}

TEST(ParseScenario, MissingKeyNamesTheField) {
  const auto text = std::regex_replace(SurrogateText(), std::regex("\nvarphi = [^\n]*"), "");
  try {
    Parse(text);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "varphi");
  }
}

TEST(ParseScenario, UnknownSectionIsRejected) {
  EXPECT_THROW(Parse(SurrogateText() + "\n[plots]\nstyle = dark\n"), ConfigError);
}

TEST(ModeList, Parsing) {
  EXPECT_EQ(parse_mode_list("adaptive, static"),
            (std::vector<TriggerMode>{TriggerMode::kAdaptive, TriggerMode::kStatic}));
  EXPECT_EQ(parse_mode_list("periodic"), std::vector<TriggerMode>{TriggerMode::kPeriodic});
  EXPECT_THROW(parse_mode_list(""), ConfigError);
  EXPECT_THROW(parse_mode_list("adaptive,adaptive"), ConfigError);
  EXPECT_THROW(parse_mode_list("fast"), ConfigError);
}

TEST(WriteScenario, RoundTripIsExact) {
  auto c = testing::SurrogateConfig();
  c.pre_history = {Eigen::Vector2d(1.0 / 3.0, -0.1)};
  std::stringstream ss;
  write_scenario(ss, c);
  const auto back = parse_scenario(ss);
  EXPECT_EQ(back.A, c.A);
  EXPECT_EQ(back.A_delay, c.A_delay);
  EXPECT_EQ(back.B, c.B);
  EXPECT_EQ(back.D, c.D);
  EXPECT_EQ(back.Q, c.Q);
  EXPECT_EQ(back.R, c.R);
  EXPECT_EQ(back.x0, c.x0);
  EXPECT_EQ(back.pre_history, c.pre_history);
  EXPECT_EQ(back.modes, c.modes);
  EXPECT_EQ(back.mu, c.mu);
  EXPECT_EQ(back.epsilon, c.epsilon);
  EXPECT_EQ(back.d_sq, c.d_sq);
  EXPECT_EQ(back.disturbance.kind, c.disturbance.kind);
  EXPECT_EQ(back.disturbance.amplitude, c.disturbance.amplitude);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.steps, c.steps);
  std::stringstream again;
  write_scenario(again, back);
  std::stringstream first;
  write_scenario(first, c);
  EXPECT_EQ(again.str(), first.str());
}

bool AllPass(const std::vector<ValidationCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

bool Failed(const std::vector<ValidationCheck>& checks, const std::string& name) {
  for (const auto& c : checks) {
    if (c.name == name) return !c.passed;
  }
  ADD_FAILURE() << "no check named " << name;
  return false;
}

TEST(ValidateScenario, ReferenceParametersPass) {
  const auto checks = validate_scenario(testing::SurrogateConfig());
  EXPECT_TRUE(AllPass(checks));
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(ValidateScenario, RejectsOutOfRangeParameters) {
  auto c = testing::SurrogateConfig();
  c.epsilon = 1.0;
  EXPECT_TRUE(Failed(validate_scenario(c), "epsilon >= 1/mu"));
  c = testing::SurrogateConfig();
  c.delta = 0.2;
  EXPECT_TRUE(Failed(validate_scenario(c), "delta in (0, 1 - mu)"));
  c = testing::SurrogateConfig();
  c.disturbance.amplitude = 0.05;
  EXPECT_TRUE(Failed(validate_scenario(c), "disturbance budget"));
  c = testing::SurrogateConfig();
  c.Q(0, 0) = -1;
  EXPECT_TRUE(Failed(validate_scenario(c), "Q symmetric positive definite"));
  c = testing::SurrogateConfig();
  c.A[1] = MatrixXd::Identity(3, 3);
  EXPECT_TRUE(Failed(validate_scenario(c), "matrix dimensions"));
}

TEST(ValidateScenario, DetailsUseShortNumbers) {
  auto c = testing::SurrogateConfig();
  c.mu = 1.5;
  for (const auto& check : validate_scenario(c)) {
    if (check.name == "mu in (0, 1)") EXPECT_EQ(check.detail, "mu = 1.5");
  }
}

TEST(Build, InvalidScenarioRaisesConfigError) {
  auto c = testing::SurrogateConfig();
  c.epsilon = 1.0;
  EXPECT_THROW(c.build(TriggerMode::kAdaptive), ConfigError);
}

TEST(Build, ProducesTheConfiguredScenario) {
  const auto c = testing::SurrogateConfig();
  const auto sc = c.build(TriggerMode::kStatic);
  EXPECT_EQ(sc.mode, TriggerMode::kStatic);
  EXPECT_EQ(sc.steps, 50);
  EXPECT_EQ(sc.model.num_vertices(), 2);
  EXPECT_DOUBLE_EQ(sc.etm.epsilon(), 1.12);
  EXPECT_NEAR(sc.disturbance.at(1)(0), 0.01 * std::sin(1.0), 1e-15);
}

TEST(HeaterTemplate, NeedsUserData) {
  if (fs::exists(SourcePath("scenarios/heater_data/A1.csv"))) GTEST_SKIP();
  EXPECT_THROW(load_scenario(SourcePath("scenarios/heater.cfg")), ConfigError);
}

}  // namespace
}  // namespace etmpc
