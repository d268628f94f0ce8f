// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "stylefield/checkpoint.hpp"
#include "stylefield/error.hpp"

namespace stylefield {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary | std::ios::trunc) << s; }

class CheckpointFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("stylefield_ckpt_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Checkpoint sample() const {
    Checkpoint c;
    c.stage = "stage1";
    c.seed = 42;
    c.config_hash = 0xdeadbeefcafeull;
    c.put("scene.grid.plane0", torch::randn({1, 2, 3, 4}));
    c.put("mlfa.low.0.bias", torch::randn({5}));
    c.put("scalar", torch::tensor(3.5f));
    return c;
  }

  fs::path dir_;
};

TEST_F(CheckpointFiles, RoundTripPreservesEverything) {
  auto c = sample();
  c.save(dir_ / "a");
  auto back = Checkpoint::load(dir_ / "a");
  EXPECT_EQ(back.stage, "stage1");
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.config_hash, 0xdeadbeefcafeull);
  ASSERT_EQ(back.records().size(), 3u);
  for (const auto& r : c.records()) EXPECT_TRUE(torch::equal(back.get(r.name), c.get(r.name))) << r.name;
  EXPECT_EQ(back.get("scalar").dim(), 0);
  back.save(dir_ / "b");
  EXPECT_EQ(slurp(dir_ / "a" / Checkpoint::kBlobName), slurp(dir_ / "b" / Checkpoint::kBlobName));
  EXPECT_EQ(slurp(dir_ / "a" / Checkpoint::kManifestName), slurp(dir_ / "b" / Checkpoint::kManifestName));
}

TEST_F(CheckpointFiles, CorruptedBlobFailsChecksum) {
  sample().save(dir_);
  auto blob = slurp(dir_ / Checkpoint::kBlobName);
  blob[5] = static_cast<char>(blob[5] ^ 0x40);
  spit(dir_ / Checkpoint::kBlobName, blob);
  try {
    Checkpoint::load(dir_);
    FAIL() << "expected a checksum error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

TEST_F(CheckpointFiles, TruncatedBlobIsRejected) {
  sample().save(dir_);
  auto blob = slurp(dir_ / Checkpoint::kBlobName);
  spit(dir_ / Checkpoint::kBlobName, blob.substr(0, blob.size() - 4));
  EXPECT_THROW(Checkpoint::load(dir_), ConfigError);
}

TEST_F(CheckpointFiles, DuplicateNamesAreRejected) {
  sample().save(dir_);
  auto manifest = slurp(dir_ / Checkpoint::kManifestName);
  const auto first = manifest.find("tensor ");
  const auto line = manifest.substr(first, manifest.find('\n', first) - first + 1);
  spit(dir_ / Checkpoint::kManifestName, manifest + line);
  try {
    Checkpoint::load(dir_);
    FAIL() << "expected a duplicate error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST_F(CheckpointFiles, MissingFilesAndBadHeaders) {
  EXPECT_THROW(Checkpoint::load(dir_), ConfigError);
  sample().save(dir_);
  auto manifest = slurp(dir_ / Checkpoint::kManifestName);
  spit(dir_ / Checkpoint::kManifestName, "stylefield-checkpoint 99\n" + manifest.substr(manifest.find('\n') + 1));
  EXPECT_THROW(Checkpoint::load(dir_), ConfigError);
}

TEST(Checkpoint, PutReplacesAndPrefixesFilter) {
  Checkpoint c;
  c.put("a.x", torch::zeros({2}));
  c.put("a.x", torch::ones({3}));
  c.put("b.y", torch::ones({1}));
  EXPECT_EQ(c.records().size(), 2u);
  EXPECT_EQ(c.get("a.x").size(0), 3);
  EXPECT_EQ(c.names_with_prefix("a."), std::vector<std::string>{"a.x"});
  c.erase_prefix("a.");
  EXPECT_FALSE(c.contains("a.x"));
  EXPECT_THROW(c.get("a.x"), ConfigError);
  EXPECT_THROW(c.put("has space", torch::zeros({1})), ValidationError);
}

}  // namespace
}  // namespace stylefield
