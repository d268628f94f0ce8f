// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "stylefield/config.hpp"
#include "stylefield/error.hpp"

namespace stylefield {
namespace {

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  auto c = RunConfig::parse("# comment\nseed = 9\n  style_weight=12.5  # trailing\n\nvariant = single_level+adain\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.style_weight, 12.5);
  EXPECT_EQ(c.variant, "single_level+adain");
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    RunConfig::parse("foo = 1\n");
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'foo'"), std::string::npos);
  }
}

TEST(Config, BadValuesAreRejected) {
  RunConfig c;
  EXPECT_THROW(c.set("seed", "abc"), ConfigError);
  EXPECT_THROW(c.set("stage1_lr", "0"), ConfigError);
  EXPECT_THROW(c.set("samples_per_ray", "2.5"), ConfigError);
  EXPECT_THROW(RunConfig::parse("seed 3\n"), ConfigError);
  EXPECT_THROW(RunConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST(Config, TextRoundTripAndHash) {
  RunConfig c;
  c.set("grid_rank", "3");
  c.set("encoder_resize", "true");
  auto back = RunConfig::parse(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.hash(), c.hash());
  back.set("seed", "1");
  EXPECT_NE(back.hash(), c.hash());
  const std::string text = c.to_text();
  EXPECT_EQ(RunConfig::keys().size(), static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));
}

}  // namespace
}  // namespace stylefield
