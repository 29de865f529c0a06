/* Copyright 2026 The qcascade Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "qcascade/kernels.h"

#include <bit>
#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "../oracles.h"
#include "qcascade/qtensor.h"
#include "test_support.h"

namespace qcascade {
namespace {

using kernels::KernelSet;

class KernelTest : public ::testing::TestWithParam<const KernelSet*> {};

std::vector<std::uint64_t> planes_of(const std::vector<std::uint8_t>& patch, std::size_t words) {
  std::vector<std::uint64_t> planes(kActivationBits * words, 0);
  for (std::size_t k = 0; k < patch.size(); ++k) {
    for (int p = 0; p < kActivationBits; ++p) {
      if ((patch[k] >> p) & 1u) planes[p * words + k / 64] |= std::uint64_t{1} << (k % 64);
    }
  }
  return planes;
}

TEST_P(KernelTest, ConvPatchMatchesNaiveDotProduct) {
  const KernelSet& k = *GetParam();
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t len = 1 + rng() % 700;
    const std::size_t outs = 1 + rng() % 9;
    const std::size_t words = kernels::words_for_bits(len);
    std::vector<std::uint8_t> patch(len);
    std::int32_t patch_sum = 0;
    for (auto& c : patch) {
      c = static_cast<std::uint8_t>(rng() % 32);
      patch_sum += c;
    }
    std::vector<std::uint64_t> rows(outs * words, 0);
    std::vector<std::int32_t> expect(outs, 0);
    for (std::size_t o = 0; o < outs; ++o) {
      for (std::size_t i = 0; i < len; ++i) {
        const bool plus = rng() & 1u;
        if (plus) rows[o * words + i / 64] |= std::uint64_t{1} << (i % 64);
        expect[o] += plus ? patch[i] : -patch[i];
      }
    }
    const auto planes = planes_of(patch, words);
    std::vector<std::int32_t> out(outs * 3, -777);
    k.conv_patch(planes.data(), words, rows.data(), outs, patch_sum, out.data(), 3);
    for (std::size_t o = 0; o < outs; ++o) {
      ASSERT_EQ(out[o * 3], expect[o]) << "trial " << trial << " len " << len << " o " << o;
      ASSERT_EQ(out[o * 3 + 1], -777);
    }
  }
}

TEST_P(KernelTest, ThresholdCountsSatisfiedSteps) {
  const KernelSet& k = *GetParam();
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 1500; ++trial) {
    const ThresholdParams t = testing::random_thresholds(1, rng, 1000);
    const std::size_t n = rng() % 67;
    std::vector<std::int32_t> acc(n);
    std::uniform_int_distribution<std::int32_t> d(-1200, 1200);
    for (auto& a : acc) a = d(rng);
    // Hit the thresholds themselves and their neighbours too.
    for (std::size_t i = 0; i < n; i += 3) acc[i] = t.channel(0)[rng() % 31] + int(rng() % 3) - 1;
    std::vector<std::uint8_t> out(n);
    k.threshold(acc.data(), n, t.channel(0).data(), out.data());
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_EQ(out[i], oracle::threshold(acc[i], t.channel(0))) << "acc " << acc[i];
    }
  }
}

TEST_P(KernelTest, ThresholdHandlesExtremes) {
  const KernelSet& k = *GetParam();
  std::vector<std::int32_t> t(31);
  for (int i = 0; i < 31; ++i) t[i] = i - 15;
  const std::vector<std::int32_t> acc{INT32_MIN, -16, -15, 0, 15, 16, INT32_MAX};
  std::vector<std::uint8_t> out(acc.size());
  k.threshold(acc.data(), acc.size(), t.data(), out.data());
  EXPECT_EQ(out, (std::vector<std::uint8_t>{0, 0, 1, 16, 31, 31, 31}));
}

TEST_P(KernelTest, SignedSumExactOnIntegerInputs) {
  const KernelSet& k = *GetParam();
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t n = rng() % 600;
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(static_cast<int>(rng() % 63) - 31);
    std::vector<std::uint64_t> row(kernels::words_for_bits(n) + 1, 0);
    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool plus = rng() & 1u;
      if (plus) row[i / 64] |= std::uint64_t{1} << (i % 64);
      expect += plus ? x[i] : -x[i];
    }
    ASSERT_EQ(k.signed_sum(x.data(), n, row.data()), expect) << "n " << n;
  }
}

INSTANTIATE_TEST_SUITE_P(Isa, KernelTest, ::testing::ValuesIn(testing::kernel_sets()),
                         [](const auto& info) { return std::string(kernels::isa_name(info.param->isa)); });

TEST(KernelVariants, SignedSumBitIdenticalAcrossIsas) {
  const auto sets = testing::kernel_sets();
  if (sets.size() < 2) GTEST_SKIP() << "only the scalar kernels are available";
  std::mt19937_64 rng(404);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng() % 1100;
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    std::vector<std::uint64_t> row(kernels::words_for_bits(n) + 1);
    for (auto& w : row) w = rng();
    if (n % 64) row[n / 64] &= (std::uint64_t{1} << (n % 64)) - 1;
    const double a = sets[0]->signed_sum(x.data(), n, row.data());
    const double b = sets[1]->signed_sum(x.data(), n, row.data());
    ASSERT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)) << "n " << n;
  }
}

TEST(KernelVariants, Dispatch) {
  EXPECT_EQ(kernels::scalar_kernels().isa, kernels::Isa::kScalar);
  EXPECT_TRUE(kernels::isa_available(kernels::Isa::kScalar));
  const bool avx = kernels::isa_available(kernels::Isa::kAvx2);
  EXPECT_EQ(avx, kernels::avx2_kernels() != nullptr);
  EXPECT_EQ(kernels::best_kernels().isa, avx ? kernels::Isa::kAvx2 : kernels::Isa::kScalar);
  if (!avx) EXPECT_THROW(kernels::kernels_for(kernels::Isa::kAvx2), std::runtime_error);
}

}  // namespace
}  // namespace qcascade
