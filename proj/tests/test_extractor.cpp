#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sdiqrng/extractor.hpp"
#include "sdiqrng/rng.hpp"

using namespace sdiqrng;
using namespace sdiqrng::extractor;

namespace {

ExtractorConfig make_cfg(std::int64_t l, std::int64_t m, std::int64_t b,
                         Rng& rng, std::int64_t t = 1,
                         double eps_hash = 1e-12) {
  ExtractorConfig cfg;
  cfg.l = l;
  cfg.m = m;
  cfg.b = b;
  cfg.h = m * b;
  cfg.t = t;
  cfg.eps_hash = eps_hash;
  cfg.seed = BitVec::random(static_cast<std::size_t>(l + cfg.h - 1), rng);
  return cfg;
}

BitVec sample_slice(const BitVec& input, std::int64_t round, std::int64_t b) {
  BitVec s(static_cast<std::size_t>(b));
  for (std::int64_t k = 0; k < b; ++k)
    s.set(static_cast<std::size_t>(k),
          input.get(static_cast<std::size_t>(round * b + k)));
  return s;
}

}  // namespace

TEST_CASE("bitvec: msb byte order round trip") {
  Rng rng(31);
  for (std::size_t nbits : {1u, 7u, 8u, 9u, 63u, 64u, 65u, 1000u}) {
    const BitVec v = BitVec::random(nbits, rng);
    const auto bytes = v.to_msb_bytes();
    CHECK(bytes.size() == (nbits + 7) / 8);
    const BitVec back = BitVec::from_msb_bytes(bytes, nbits);
    CHECK(back == v);
  }
  // First logical bit is the MSB of the first byte.
  BitVec v(9);
  v.set(0, true);
  CHECK(v.to_msb_bytes()[0] == 0x80);
  v.set(8, true);
  CHECK(v.to_msb_bytes()[1] == 0x80);
}

TEST_CASE("derive_output_length and inverse mode") {
  CHECK(derive_output_length(102.0, std::exp2(-50.0)).l == 4);
  CHECK(derive_output_length(100.5, 1.0).l == 102);  // floor(kappa + 2)
  const double kappa = 183 * 3.354;
  CHECK(derive_output_length(kappa, 2.33e-16).l == 511);
  const auto clamped = derive_output_length(10.0, 1e-12);
  CHECK(clamped.l == 0);
  CHECK(clamped.clamped);
  CHECK_THROWS(derive_output_length(0.0, 0.5));
  CHECK_THROWS(derive_output_length(10.0, 0.0));

  // eps_hash implied by l = 512 sits within a factor 2 of 2.33e-16.
  const double implied = eps_hash_for_length(512, kappa);
  CHECK(implied / 2.33e-16 > 0.5);
  CHECK(implied / 2.33e-16 < 2.0);
  // Round trip: forward(inverse(l)) recovers l when l is attainable.
  CHECK(derive_output_length(kappa, implied).l == 512);
}

TEST_CASE("toeplitz: zero seed and 1x2 example") {
  Rng rng(32);
  ExtractorConfig cfg = make_cfg(8, 2, 8, rng);
  cfg.seed = BitVec(static_cast<std::size_t>(cfg.l + cfg.h - 1));
  const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
  const BitVec out = toeplitz_hash(cfg, input);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK_FALSE(out.get(i));

  // l=1, h=2, seed=[1,0]: T = [seed[1], seed[0]] = [0, 1]; input [1,1] -> 1.
  ExtractorConfig tiny;
  tiny.l = 1;
  tiny.h = 2;
  tiny.m = 1;
  tiny.b = 2;
  tiny.t = 1;
  tiny.eps_hash = 0.5;
  tiny.seed = BitVec(2);
  tiny.seed.set(0, true);
  BitVec in(2);
  in.set(0, true);
  in.set(1, true);
  CHECK(toeplitz_hash_naive(tiny, in).get(0) == true);
  CHECK(toeplitz_hash(tiny, in).get(0) == true);
  // input [0,1] picks T[0][1] = seed[0] = 1.
  BitVec in2(2);
  in2.set(1, true);
  CHECK(toeplitz_hash_naive(tiny, in2).get(0) == true);
  // input [1,0] picks T[0][0] = seed[1] = 0.
  BitVec in3(2);
  in3.set(0, true);
  CHECK(toeplitz_hash_naive(tiny, in3).get(0) == false);
}

TEST_CASE("toeplitz kernels match the naive oracle exactly") {
  Rng rng(33);
  int clmul_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t l = 1 + static_cast<std::int64_t>(rng.uniform() * 64);
    const std::int64_t b = 1 + static_cast<std::int64_t>(rng.uniform() * 16);
    const std::int64_t max_m = std::max<std::int64_t>(1, 128 / b);
    std::int64_t m = 1 + static_cast<std::int64_t>(rng.uniform() *
                                                   static_cast<double>(max_m));
    while (m * b < l) ++m;  // keep l <= h
    ExtractorConfig cfg = make_cfg(l, m, b, rng);
    const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    const BitVec expect = toeplitz_hash_naive(cfg, input);

    const ToeplitzHasher table(cfg, ToeplitzHasher::Kernel::Table);
    CHECK(table.hash(input) == expect);
    if (ToeplitzHasher::clmul_supported()) {
      const ToeplitzHasher clmul(cfg, ToeplitzHasher::Kernel::Clmul);
      CHECK(clmul.hash(input) == expect);
      ++clmul_cases;
    }
  }
  if (ToeplitzHasher::clmul_supported()) CHECK(clmul_cases == 1000);
}

TEST_CASE("streaming accumulation equals the block hash") {
  Rng rng(34);
  // Degenerate stream: m = 1.
  {
    ExtractorConfig cfg = make_cfg(6, 1, 14, rng);
    const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    BitVec acc(static_cast<std::size_t>(cfg.l));
    streaming_accumulate(cfg, input, 0, acc);
    CHECK(acc == toeplitz_hash_naive(cfg, input));
  }
  // m = 4, b = 14, l = 8.
  {
    ExtractorConfig cfg = make_cfg(8, 4, 14, rng);
    const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    BitVec acc(static_cast<std::size_t>(cfg.l));
    const ToeplitzHasher hasher(cfg);
    for (std::int64_t k = 0; k < cfg.m; ++k)
      hasher.accumulate_sample(sample_slice(input, k, cfg.b), k, acc);
    CHECK(acc == toeplitz_hash_naive(cfg, input));
  }
  // Randomized geometries, production-size included.
  for (int i = 0; i < 20; ++i) {
    const std::int64_t b = 2 + static_cast<std::int64_t>(rng.uniform() * 14);
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.uniform() * 40);
    const std::int64_t l =
        1 + static_cast<std::int64_t>(rng.uniform() *
                                      static_cast<double>(m * b));
    ExtractorConfig cfg = make_cfg(l, m, b, rng);
    const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    const ToeplitzHasher hasher(cfg);
    BitVec acc(static_cast<std::size_t>(cfg.l));
    for (std::int64_t k = 0; k < cfg.m; ++k)
      hasher.accumulate_sample(sample_slice(input, k, cfg.b), k, acc);
    CHECK(acc == hasher.hash(input));
  }
  // Out-of-range round index is rejected.
  ExtractorConfig cfg = make_cfg(8, 4, 14, rng);
  const ToeplitzHasher hasher(cfg);
  BitVec acc(8);
  BitVec sample(14);
  CHECK_THROWS(hasher.accumulate_sample(sample, 4, acc));
  CHECK_THROWS(hasher.accumulate_sample(sample, -1, acc));
}

TEST_CASE("gf(2) linearity of the hash and of streams") {
  Rng rng(35);
  ExtractorConfig cfg = make_cfg(48, 8, 12, rng);
  const ToeplitzHasher hasher(cfg);
  for (int i = 0; i < 1000; ++i) {
    BitVec a = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    const BitVec b = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
    const BitVec ha = hasher.hash(a);
    const BitVec hb = hasher.hash(b);
    a ^= b;  // a now holds a xor b
    BitVec hxor = hasher.hash(a);
    hxor ^= ha;
    hxor ^= hb;
    for (std::size_t j = 0; j < hxor.size(); ++j) CHECK_FALSE(hxor.get(j));
  }
}

TEST_CASE("production block: kernels and streaming agree at 512x2562") {
  Rng rng(36);
  ExtractorConfig cfg = make_cfg(512, 183, 14, rng, 2500, 2.33e-16);
  const BitVec input = BitVec::random(static_cast<std::size_t>(cfg.h), rng);
  const BitVec expect = toeplitz_hash_naive(cfg, input);
  const ToeplitzHasher table(cfg, ToeplitzHasher::Kernel::Table);
  CHECK(table.hash(input) == expect);
  if (ToeplitzHasher::clmul_supported()) {
    const ToeplitzHasher clmul(cfg, ToeplitzHasher::Kernel::Clmul);
    CHECK(clmul.hash(input) == expect);
  }
  BitVec acc(static_cast<std::size_t>(cfg.l));
  for (std::int64_t k = 0; k < cfg.m; ++k)
    table.accumulate_sample(sample_slice(input, k, cfg.b), k, acc);
  CHECK(acc == expect);
}

TEST_CASE("uniformity smoke: monobit proportion of hashed output") {
  Rng rng(37);
  ExtractorConfig cfg = make_cfg(512, 183, 14, rng, 1, 2.33e-16);
  const ToeplitzHasher hasher(cfg);
  const std::size_t blocks = 19532;  // ~1e7 output bits
  std::vector<std::uint64_t> in(static_cast<std::size_t>((cfg.h + 63) / 64));
  std::vector<std::uint64_t> acc(hasher.acc_words());
  std::uint64_t ones = 0;
  const std::uint64_t total = blocks * static_cast<std::uint64_t>(cfg.l);
  for (std::size_t i = 0; i < blocks; ++i) {
    for (auto& w : in) w = rng();
    in.back() &= (std::uint64_t{1} << (cfg.h & 63)) - 1;
    hasher.hash_block(in.data(), acc.data());
    for (auto w : acc) ones += std::popcount(w);
  }
  const double prop = static_cast<double>(ones) / static_cast<double>(total);
  const double four_sigma = 4.0 * 0.5 / std::sqrt(static_cast<double>(total));
  CHECK(std::abs(prop - 0.5) < four_sigma);
}

TEST_CASE("composable security arithmetic") {
  const auto s = composable_epsilon(2500, 2.33e-16, 183, 5e-19, 512, 2562);
  CHECK(s.eps_l == doctest::Approx(3.245e-16).epsilon(1e-3));
  CHECK(s.eps_total == doctest::Approx(8.1125e-13).epsilon(1e-3));
  CHECK(s.compression_r == doctest::Approx(0.1998).epsilon(1e-3));
  CHECK(s.big_l == 1280000);

  const auto z = composable_epsilon(0, 2.33e-16, 183, 5e-19, 512, 2562);
  CHECK(z.eps_total == 0.0);
  CHECK(z.big_l == 0);

  const auto d = composable_epsilon(5000, 2.33e-16, 183, 5e-19, 512, 2562);
  CHECK(d.eps_total == doctest::Approx(2.0 * s.eps_total).epsilon(1e-12));
  CHECK(d.big_l == 2 * s.big_l);
}

TEST_CASE("rate accounting") {
  const auto r = rates(125e6, 125e6, 3.354, 14, 512.0 / 2562.0, 0.008);
  CHECK(r.r_g_bps == doctest::Approx(0.419e9).epsilon(5e-3));
  CHECK(r.r_s_bps == doctest::Approx(0.350e9).epsilon(5e-3));
  CHECK(r.r_avg_bps == doctest::Approx(0.347e9).epsilon(5e-3));

  CHECK(rates(125e6, 125e6, 3.354, 14, 0.2, 1.0).r_avg_bps == 0.0);
  // A slow hasher becomes the bottleneck.
  const auto slow = rates(125e6, 62.5e6, 3.354, 14, 0.2, 0.008);
  CHECK(slow.r_s_bps == doctest::Approx(0.5 * rates(125e6, 125e6, 3.354, 14,
                                                    0.2, 0.008)
                                                  .r_s_bps)
                            .epsilon(1e-12));
}

TEST_CASE("seed and bitstream files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sdiqrng_test_io";
  fs::create_directories(dir);
  Rng rng(38);

  const std::size_t nbits = 512 + 2562 - 1;
  const BitVec seed = BitVec::random(nbits, rng);
  write_bits_file(dir / "seed.bin", seed);
  const BitVec back = read_seed_file(dir / "seed.bin", nbits);
  CHECK(back == seed);

  // Wrong length rejected.
  CHECK_THROWS(read_seed_file(dir / "seed.bin", nbits + 8));

  // Nonzero trailing pad bits rejected.
  auto bytes = seed.to_msb_bytes();
  bytes.back() |= 0x01;  // nbits % 8 == 1, so the low bits are padding
  {
    std::FILE* f = std::fopen((dir / "bad.bin").c_str(), "wb");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
  }
  CHECK_THROWS(read_seed_file(dir / "bad.bin", nbits));

  const BitVec stream = BitVec::random(4096, rng);
  write_bits_file(dir / "bits.bin", stream);
  CHECK(read_bits_file(dir / "bits.bin") == stream);
  fs::remove_all(dir);
}
