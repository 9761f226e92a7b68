#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sdiqrng/rng.hpp"

namespace sdiqrng::extractor {

/// Packed bit vector. Logical bit i lives in word i/64 at position i%64;
/// the wire format (bytes) is MSB-first within each byte, so conversions go
/// through from_msb_bytes / to_msb_bytes. Bits beyond size() are kept zero.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits) : words_((nbits + 63) / 64, 0),
                                       nbits_(nbits) {}

  static BitVec from_msb_bytes(std::span<const std::uint8_t> bytes,
                               std::size_t nbits);
  static BitVec random(std::size_t nbits, Rng& rng);

  std::vector<std::uint8_t> to_msb_bytes() const;

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  /// Appends `nbits` bits from packed words (low bit first).
  void append_bits(std::span<const std::uint64_t> words, std::size_t nbits);

  BitVec& operator^=(const BitVec& o);
  bool operator==(const BitVec& o) const = default;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }
  std::size_t word_count() const { return words_.size(); }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t nbits_ = 0;
};

/// Toeplitz extractor geometry. The matrix convention is
///   T[i][j] = seed[i - j + h - 1],
/// i.e. the first seed bits fill the top-right diagonal band.
struct ExtractorConfig {
  std::int64_t l = 0;       // output bits per hash
  std::int64_t h = 0;       // input bits per hash, h = m * b
  std::int64_t m = 0;       // samples per hash
  std::int64_t b = 0;       // bits per sample
  std::int64_t t = 0;       // hash cycles per output string
  double eps_hash = 0.0;
  BitVec seed;              // exactly l + h - 1 bits

  void validate() const;
};

struct OutputLength {
  std::int64_t l = 0;
  bool clamped = false;  // formula was non-positive, floored at 0
};

/// l = floor(kappa + 2 - log2(1/eps_hash^2)), floored at zero.
OutputLength derive_output_length(double kappa, double eps_hash);

/// Inverse mode: the eps_hash implied by a chosen output length,
/// eps_hash = 2^((l - 2 - kappa)/2). Audits externally fixed block sizes.
double eps_hash_for_length(std::int64_t l, double kappa);

/// Bit-by-bit GF(2) matrix-vector product; the reference oracle.
BitVec toeplitz_hash_naive(const ExtractorConfig& cfg, const BitVec& input);

/// Word-wide Toeplitz hashing. Kernels: Table (precomputed per-byte XOR
/// windows) and Clmul (carry-less multiply), selected at runtime by default.
/// Per-sample streaming accumulation mirrors the FPGA AND/XOR dataflow and is
/// bit-exact against the block hash.
class ToeplitzHasher {
 public:
  enum class Kernel { Auto, Table, Clmul };

  explicit ToeplitzHasher(ExtractorConfig cfg, Kernel kernel = Kernel::Auto);

  const ExtractorConfig& config() const { return cfg_; }
  bool uses_clmul() const { return clmul_; }

  BitVec hash(const BitVec& input) const;

  /// Hot path: input as ceil(h/64) packed words, acc as ceil(l/64) words.
  void hash_block(const std::uint64_t* in_words, std::uint64_t* acc) const;

  /// XORs the contribution of one b-bit sample into the l-bit accumulator.
  void accumulate_sample(const BitVec& sample, std::int64_t round_index,
                         BitVec& acc) const;

  std::size_t acc_words() const { return acc_words_; }

  static bool clmul_supported();

 private:
  void build_table();
  void hash_block_table(const std::uint64_t* in_words,
                        std::uint64_t* acc) const;
  void hash_block_clmul(const std::uint64_t* in_words,
                        std::uint64_t* acc) const;

  ExtractorConfig cfg_;
  std::vector<std::uint64_t> seed_words_;  // padded for unaligned windows
  std::vector<std::uint64_t> table_;
  std::size_t acc_words_ = 0;
  std::size_t in_words_ = 0;
  std::uint64_t top_mask_ = 0;
  bool clmul_ = false;
};

/// Free-function convenience wrappers.
BitVec toeplitz_hash(const ExtractorConfig& cfg, const BitVec& input);
void streaming_accumulate(const ExtractorConfig& cfg, const BitVec& sample,
                          std::int64_t round_index, BitVec& acc);

struct SecuritySummary {
  double eps_l = 0.0;        // eps_hash + m * eps_fail
  double eps_total = 0.0;    // t * eps_l
  double compression_r = 0.0;
  std::int64_t big_l = 0;    // t * l
};

SecuritySummary composable_epsilon(std::int64_t t, double eps_hash,
                                   std::int64_t m, double eps_fail,
                                   std::int64_t l, std::int64_t h);

struct Rates {
  double r_g_bps = 0.0;    // QRG generation rate, R_sample * kappa_per_sample
  double r_s_bps = 0.0;    // extraction rate, min(R_sample, R_hash) * b * r
  double r_avg_bps = 0.0;  // (1 - eps_C) * R_S
};

Rates rates(double r_sample_hz, double r_hash_hz, double kappa_per_sample,
            int b, double compression_r, double eps_c);

/// Seed file: packed MSB-first bits, trailing pad bits must be zero.
BitVec read_seed_file(const std::filesystem::path& path, std::size_t nbits);
void write_bits_file(const std::filesystem::path& path, const BitVec& bits);
BitVec read_bits_file(const std::filesystem::path& path);

}  // namespace sdiqrng::extractor
