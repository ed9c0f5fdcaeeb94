#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr discarded unless asked for.
CliRun run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(QBIC_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      c.comments.push_back(line);
    } else if (c.header.empty()) {
      c.header = split(line);
    } else {
      c.rows.push_back(split(line));
    }
  }
  return c;
}

std::size_t column(const Csv& c, const std::string& name) {
  for (std::size_t i = 0; i < c.header.size(); ++i) {
    if (c.header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

const std::vector<std::string>* row_for(const Csv& c, const std::string& label) {
  for (const auto& r : c.rows) {
    if (!r.empty() && r[0] == label) return &r;
  }
  return nullptr;
}

}  // namespace

TEST(Cli, SolvePrintsReferenceSpectrum) {
  const CliRun r = run("solve");
  ASSERT_EQ(r.status, 0);
  const Csv c = parse_csv(r.out);
  ASSERT_EQ(c.rows.size(), 12u);
  const std::size_t re = column(c, "re_e"), sheet = column(c, "sheet");
  const auto* p2 = row_for(c, "P2");
  ASSERT_NE(p2, nullptr);
  EXPECT_NEAR(std::stod((*p2)[re]), -1.34500463, 1e-7);
  EXPECT_EQ((*p2)[sheet], "I");
  const auto* q4 = row_for(c, "Q4");
  ASSERT_NE(q4, nullptr);
  EXPECT_EQ((*q4)[sheet], "II");
}

TEST(Cli, CsvAndJsonCarryTheSameValues) {
  const Csv c = parse_csv(run("solve").out);
  const CliRun j = run("--format json solve");
  ASSERT_EQ(j.status, 0);
  const auto doc = nlohmann::json::parse(j.out);
  ASSERT_EQ(doc["rows"].size(), c.rows.size());
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const auto& row = doc["rows"][i];
    for (std::size_t k = 0; k < c.header.size(); ++k) {
      const auto& v = row[c.header[k]];
      if (v.is_number()) {
        const double x = v.template get<double>();
        EXPECT_NEAR(std::stod(c.rows[i][k]), x, 5e-9 + 1e-8 * std::abs(x)) << c.header[k];
      } else {
        EXPECT_EQ(c.rows[i][k], v.get<std::string>()) << c.header[k];
      }
    }
  }
  EXPECT_EQ(doc["meta"]["tp"].get<double>(), 0.345);
}

TEST(Cli, OutputIsDeterministic) {
  const std::string args = "--ed -0.7 sweep --param ed --from -0.7 --to 0.7 --steps 57";
  const CliRun a = run(args), b = run(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run("--format json wavefunction --state Q2 --xmax 30").out,
            run("--format json wavefunction --state Q2 --xmax 30").out);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto path = std::filesystem::temp_directory_path() / "qbic_cli_test.cfg";
  {
    std::ofstream f(path);
    f << "# run parameters\ng = 0.2\ned = 0.5\nformat = json\n";
  }
  const CliRun r = run("--config " + path.string() + " --ed 0.4 solve");
  std::filesystem::remove(path);
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["meta"]["g"].get<double>(), 0.2);
  EXPECT_EQ(doc["meta"]["ed"].get<double>(), 0.4);
}

TEST(Cli, PrintConfigRoundTrips) {
  const CliRun r = run("--g 0.15 --tol 1e-13 sweep --param g --from 0.1 --to 0.2 --steps 5 --print-config");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("g=0.15"), std::string::npos);
  EXPECT_NE(r.out.find("tol=1e-13"), std::string::npos);
  EXPECT_NE(r.out.find("command=sweep"), std::string::npos);
}

TEST(Cli, EvolveDecoupledDotStaysPut) {
  const CliRun r = run("--g 0 evolve --length 40 --tmax 60 --dt 2");
  ASSERT_EQ(r.status, 0);
  const Csv c = parse_csv(r.out);
  ASSERT_FALSE(c.rows.empty());
  const std::size_t s = column(c, "survival");
  for (const auto& row : c.rows) EXPECT_NEAR(std::stod(row[s]), 1.0, 1e-8);
}

TEST(Cli, EvolveWarnsPastReflectionHorizon) {
  const CliRun r = run("evolve --length 10 --tmax 1000", true);
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("warning:"), std::string::npos);
  EXPECT_NE(r.out.find("reflection horizon"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("bogus").status, 2);
  EXPECT_EQ(run("--g -1 solve").status, 2);
  EXPECT_EQ(run("--format xml solve").status, 2);
  EXPECT_EQ(run("wavefunction --state Q2 --xmax 200000").status, 2);
  EXPECT_EQ(run("sweep --param ed --from 0 --to 1 --steps 1").status, 2);
  EXPECT_EQ(run("sweep --param th --from 0 --to 1 --steps 5").status, 2);
  EXPECT_EQ(run("evolve --initial state:ZZ").status, 2);
  EXPECT_EQ(run("scaling --state P1").status, 2);
  EXPECT_EQ(run("--config /nonexistent/qbic.cfg solve").status, 2);
}

TEST(Cli, UnwritableOutputExitsOne) {
  EXPECT_EQ(run("--out /nonexistent/dir/spectrum.csv solve").status, 1);
}

TEST(Cli, LargeXmaxAllowedWithFlag) {
  const CliRun r = run("--format json wavefunction --state P1 --xmax 100001 --allow-large-xmax");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["rows"].size(), 200003u);
}
