#include <gtest/gtest.h>

#include "qbic/config.hpp"

using namespace qbic;

TEST(ExactDecimal, ShortestRoundTrip) {
  EXPECT_EQ(exact_decimal(0.345), "0.345");
  EXPECT_EQ(exact_decimal(1.0), "1");
  EXPECT_EQ(exact_decimal(-1.3450046399654), "-1.3450046399654");
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) {
    EXPECT_EQ(std::stod(exact_decimal(v)), v);
  }
}

TEST(FlatConfig, SkipsCommentsAndBlankLines) {
  const auto kv = parse_flat_config("# header\n\n  g = 0.2  \n--ed=1.5\n\tformat\t=\tjson\r\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"g", "0.2"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"ed", "1.5"}));
  EXPECT_EQ(kv[2], (std::pair<std::string, std::string>{"format", "json"}));
}

TEST(FlatConfig, Errors) {
  EXPECT_THROW(parse_flat_config("g 0.2\n"), DomainError);
  EXPECT_THROW(parse_flat_config("= 3\n"), DomainError);
  EXPECT_THROW(RunConfig::from_text("g = abc\n"), DomainError);
  EXPECT_THROW(RunConfig::from_text("g = 0.2x\n"), DomainError);
  EXPECT_THROW(RunConfig::from_text("format = xml\n"), DomainError);
  EXPECT_THROW(RunConfig::from_text("seedless = maybe\n"), DomainError);
  EXPECT_THROW(RunConfig::from_text("th = -1\n"), DomainError);
}

TEST(RunConfig, DefaultsAreTheReferenceParameters) {
  const RunConfig c = RunConfig::from_text("");
  EXPECT_EQ(c.params, ModelParams(1.0, 0.345, 0.1, 0.3));
  EXPECT_EQ(c.output_format, OutputFormat::csv);
  EXPECT_FALSE(c.tol.has_value());
}

TEST(RunConfig, TextRoundTrip) {
  RunConfig c;
  c.command = "sweep";
  c.params = ModelParams(1.25, 0.1 + 0.2, 0.07, -1.3450046399654);
  c.output_format = OutputFormat::json;
  c.output_path = "out/run.json";
  c.tol = 1e-13;
  c.options["param"] = "ed";
  c.options["points"] = "501";
  const RunConfig back = RunConfig::from_text(c.to_text());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.params.tp_h(), 0.1 + 0.2);
}
