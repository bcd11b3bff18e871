// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "memaudit/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

namespace memaudit {
namespace {

TinyNet<float> perturbed(TinyNetConfig c) {
  TinyNet<float> net(c);
  // Values that stress an exact round trip.
  net.params()[0] = 1e-38f;
  net.params()[1] = -0.0f;
  net.params()[2] = 3.4e38f;
  return net;
}

TEST(CheckpointTest, StreamRoundTripIsBitExact) {
  TinyNetConfig c = TinyNetConfig::t1_scaled(4, 5, 77);
  c.input_mean = 0.4f;
  const TinyNet<float> net = perturbed(c);
  std::stringstream buf;
  save_checkpoint(net, buf);
  const TinyNet<float> back = load_checkpoint(buf);
  EXPECT_EQ(back.config(), net.config());
  ASSERT_EQ(back.param_count(), net.param_count());
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    ASSERT_EQ(std::bit_cast<std::uint32_t>(back.params()[i]), std::bit_cast<std::uint32_t>(net.params()[i]));
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "memaudit_ckpt_test.bin").string();
  const TinyNet<float> net(TinyNetConfig::t1(2, 5));
  save_checkpoint(net, path);
  const TinyNet<float> back = load_checkpoint(path);
  EXPECT_EQ(back.config().variant, TinyNetVariant::kT1);
  EXPECT_TRUE(std::equal(net.params().begin(), net.params().end(), back.params().begin()));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), InputError);
}

TEST(CheckpointTest, ConfigJsonRoundTrip) {
  const TinyNetConfig c = TinyNetConfig::t2(20, 9);
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  auto j = config_to_json(c);
  j.erase("convs");
  EXPECT_THROW(config_from_json(j), InputError);
}

TEST(CheckpointTest, CorruptInputs) {
  const TinyNet<float> net(TinyNetConfig::t1_scaled(2));
  std::stringstream buf;
  save_checkpoint(net, buf);
  const std::string good = buf.str();

  std::istringstream magic("NOTACKPTxxxxxxxx");
  EXPECT_THROW(load_checkpoint(magic), InputError);

  std::string bad_version = good;
  bad_version[8] = 7;
  std::istringstream v(bad_version);
  EXPECT_THROW(load_checkpoint(v), InputError);

  std::istringstream truncated(good.substr(0, good.size() - 3));
  EXPECT_THROW(load_checkpoint(truncated), InputError);

  std::istringstream header_only(good.substr(0, 14));
  EXPECT_THROW(load_checkpoint(header_only), InputError);
}

}  // namespace
}  // namespace memaudit
