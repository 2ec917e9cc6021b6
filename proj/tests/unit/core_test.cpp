// Copyright 2026 The E-Motion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>

#include "emotion/core/binary_io.hpp"
#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"

namespace emotion {
namespace {

TEST(RandomSource, SameSeedAndStreamRepeat) {
  RandomSource a(5, 9), b(5, 9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_bits(), b.next_bits());
  EXPECT_EQ(RandomSource(5, 9).normal_at(17), RandomSource(5, 9).normal_at(17));
}

TEST(RandomSource, StreamsAndForksDiffer) {
  const RandomSource base(1, 2);
  std::set<std::uint64_t> firsts{base.bits_at(0), RandomSource(1, 3).bits_at(0),
                                 RandomSource(2, 2).bits_at(0), base.fork(0).bits_at(0),
                                 base.fork(1).bits_at(0)};
  EXPECT_EQ(firsts.size(), 5u);
  EXPECT_EQ(base.fork(4).bits_at(3), base.fork(4).bits_at(3));
}

TEST(RandomSource, UniformStaysInOpenInterval) {
  const RandomSource r(0, 0);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = r.uniform_at(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomSource, NormalMoments) {
  const RandomSource r(123, 4);
  const int n = 200000;
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal_at(static_cast<std::uint64_t>(i));
    m += z;
    m2 += z * z;
  }
  m /= n;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n - m * m, 1.0, 0.02);
}

TEST(RandomSource, BelowIsUnbiasedEnough) {
  RandomSource r(8, 8);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) ++counts[r.below(3)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(ByteIo, RoundTripsValues) {
  io::ByteWriter w;
  w.put_magic("TEST");
  w.put<std::uint16_t>(0xBEEF);
  w.put<std::int64_t>(-42);
  w.put<double>(3.25);
  w.put<float>(-0.5f);
  const io::Bytes bytes = w.take();
  ASSERT_EQ(bytes.size(), 4u + 2 + 8 + 8 + 4);
  EXPECT_EQ(bytes[4], 0xEF);  // little-endian
  io::ByteReader r(bytes);
  r.expect_magic("TEST");
  EXPECT_EQ(r.get<std::uint16_t>(), 0xBEEF);
  EXPECT_EQ(r.get<std::int64_t>(), -42);
  EXPECT_EQ(r.get<double>(), 3.25);
  EXPECT_EQ(r.get<float>(), -0.5f);
  EXPECT_NO_THROW(r.expect_end());
}

TEST(ByteIo, TruncationReportsOffset) {
  io::ByteWriter w;
  w.put_magic("ABCD");
  w.put<std::uint8_t>(1);
  const io::Bytes bytes = w.take();
  io::ByteReader r(bytes);
  r.expect_magic("ABCD");
  try {
    r.get<std::uint32_t>();
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_EQ(e.kind(), "format");
  }
}

TEST(ByteIo, BadMagicAndTrailingBytes) {
  const io::Bytes bytes{'N', 'O', 'P', 'E', 0};
  io::ByteReader r(bytes);
  EXPECT_THROW(r.expect_magic("EVT1"), FormatError);
  io::ByteReader r2(bytes);
  r2.expect_magic("NOPE");
  EXPECT_THROW(r2.expect_end(), FormatError);
}

TEST(ByteIo, FileRoundTripAndChecksum) {
  const auto dir = std::filesystem::temp_directory_path() / "emotion_core_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const io::Bytes data{1, 2, 3, 250};
  io::write_file(dir / "blob.bin", data);
  EXPECT_EQ(io::read_file(dir / "blob.bin"), data);
  EXPECT_THROW(io::read_file(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir.parent_path());
  // FNV-1a reference values.
  EXPECT_EQ(io::fnv1a64({}), 0xcbf29ce484222325ull);
  const io::Bytes a{'a'};
  EXPECT_EQ(io::fnv1a64(a), 0xaf63dc4c8601ec8cull);
}

TEST(Errors, CarryKindAndField) {
  const ValidationError v("training.batch", "must be positive");
  EXPECT_EQ(v.kind(), "validation");
  EXPECT_EQ(v.field(), "training.batch");
  EXPECT_EQ(StalenessError("x").kind(), "staleness");
  EXPECT_EQ(TimeoutError("x").kind(), "timeout");
  EXPECT_EQ(ParameterError("x").kind(), "parameter");
}

}  // namespace
}  // namespace emotion
