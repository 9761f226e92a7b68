#include "sdiqrng/extractor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#if defined(__x86_64__) && defined(__PCLMUL__)
#include <immintrin.h>
#define SDIQRNG_HAVE_CLMUL 1
#endif

namespace sdiqrng::extractor {
namespace {

std::uint64_t top_mask_for(std::int64_t nbits) {
  const int rem = static_cast<int>(nbits & 63);
  return rem == 0 ? ~std::uint64_t{0} : ((std::uint64_t{1} << rem) - 1);
}

/// acc[0..acc_words) ^= seed bits [off, off + 64*acc_words). The seed word
/// array must be padded so that index (off>>6) + acc_words is readable.
void xor_window(const std::uint64_t* seed_words, std::size_t off,
                std::uint64_t* acc, std::size_t acc_words) {
  const std::size_t q = off >> 6;
  const unsigned r = static_cast<unsigned>(off & 63);
  if (r == 0) {
    for (std::size_t w = 0; w < acc_words; ++w) acc[w] ^= seed_words[q + w];
  } else {
    for (std::size_t w = 0; w < acc_words; ++w) {
      acc[w] ^= (seed_words[q + w] >> r) |
                (seed_words[q + w + 1] << (64 - r));
    }
  }
}

}  // namespace

BitVec BitVec::from_msb_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t nbits) {
  if (bytes.size() * 8 < nbits)
    throw std::invalid_argument("BitVec: byte buffer shorter than bit count");
  BitVec v(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    const bool bit = (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
    if (bit) v.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  return v;
}

BitVec BitVec::random(std::size_t nbits, Rng& rng) {
  BitVec v(nbits);
  for (auto& w : v.words_) w = rng();
  if (!v.words_.empty()) v.words_.back() &= top_mask_for(nbits);
  return v;
}

std::vector<std::uint8_t> BitVec::to_msb_bytes() const {
  std::vector<std::uint8_t> out((nbits_ + 7) / 8, 0);
  for (std::size_t i = 0; i < nbits_; ++i) {
    if (get(i)) out[i >> 3] |= static_cast<std::uint8_t>(1u << (7 - (i & 7)));
  }
  return out;
}

void BitVec::append_bits(std::span<const std::uint64_t> words,
                         std::size_t nbits) {
  if (words.size() * 64 < nbits)
    throw std::invalid_argument("BitVec: word buffer shorter than bit count");
  const std::size_t old = nbits_;
  nbits_ = old + nbits;
  words_.resize((nbits_ + 63) / 64, 0);
  const unsigned shift = static_cast<unsigned>(old & 63);
  std::size_t w = old >> 6;
  if (shift == 0) {
    for (std::size_t k = 0; k * 64 < nbits; ++k) words_[w + k] = words[k];
  } else {
    for (std::size_t k = 0; k * 64 < nbits; ++k) {
      words_[w + k] |= words[k] << shift;
      if (w + k + 1 < words_.size()) words_[w + k + 1] = words[k] >> (64 - shift);
    }
  }
  if (!words_.empty()) words_.back() &= top_mask_for(static_cast<std::int64_t>(nbits_));
}

BitVec& BitVec::operator^=(const BitVec& o) {
  if (o.nbits_ != nbits_)
    throw std::invalid_argument("BitVec: XOR of mismatched lengths");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

void ExtractorConfig::validate() const {
  if (l <= 0 || h <= 0 || l > h)
    throw std::invalid_argument("ExtractorConfig: need 0 < l <= h");
  if (m <= 0 || b <= 0 || m * b != h)
    throw std::invalid_argument("ExtractorConfig: need h = m * b");
  if (b > 64)
    throw std::invalid_argument("ExtractorConfig: sample width above 64 bits");
  if (static_cast<std::int64_t>(seed.size()) != l + h - 1)
    throw std::invalid_argument("ExtractorConfig: seed length must be l+h-1");
  if (t < 0) throw std::invalid_argument("ExtractorConfig: t must be >= 0");
}

OutputLength derive_output_length(double kappa, double eps_hash) {
  if (!(eps_hash > 0.0 && eps_hash <= 1.0))
    throw std::invalid_argument("derive_output_length: eps_hash outside (0, 1]");
  if (!(kappa > 0.0))
    throw std::invalid_argument("derive_output_length: kappa must be > 0");
  const double raw = kappa + 2.0 + 2.0 * std::log2(eps_hash);
  OutputLength out;
  if (raw <= 0.0) {
    out.l = 0;
    out.clamped = true;
  } else {
    out.l = static_cast<std::int64_t>(std::floor(raw));
  }
  return out;
}

double eps_hash_for_length(std::int64_t l, double kappa) {
  return std::exp2((static_cast<double>(l) - 2.0 - kappa) / 2.0);
}

BitVec toeplitz_hash_naive(const ExtractorConfig& cfg, const BitVec& input) {
  cfg.validate();
  if (static_cast<std::int64_t>(input.size()) != cfg.h)
    throw std::invalid_argument("toeplitz_hash: input length must equal h");
  BitVec out(static_cast<std::size_t>(cfg.l));
  for (std::int64_t i = 0; i < cfg.l; ++i) {
    bool bit = false;
    for (std::int64_t j = 0; j < cfg.h; ++j) {
      bit ^= cfg.seed.get(static_cast<std::size_t>(i - j + cfg.h - 1)) &
             input.get(static_cast<std::size_t>(j));
    }
    out.set(static_cast<std::size_t>(i), bit);
  }
  return out;
}

ToeplitzHasher::ToeplitzHasher(ExtractorConfig cfg, Kernel kernel)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  acc_words_ = static_cast<std::size_t>((cfg_.l + 63) / 64);
  in_words_ = static_cast<std::size_t>((cfg_.h + 63) / 64);
  top_mask_ = top_mask_for(cfg_.l);
  const auto seed_span = cfg_.seed.words();
  seed_words_.assign(seed_span.begin(), seed_span.end());
  seed_words_.resize(seed_words_.size() + acc_words_ + 2, 0);
  switch (kernel) {
    case Kernel::Auto:
      clmul_ = clmul_supported();
      break;
    case Kernel::Clmul:
      if (!clmul_supported())
        throw std::runtime_error("ToeplitzHasher: clmul not available");
      clmul_ = true;
      break;
    case Kernel::Table:
      clmul_ = false;
      break;
  }
  if (!clmul_) build_table();
}

bool ToeplitzHasher::clmul_supported() {
#if defined(SDIQRNG_HAVE_CLMUL)
  return __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
#else
  return false;
#endif
}

void ToeplitzHasher::build_table() {
  // One 16-entry block per 4-bit input position. The nibble granularity
  // keeps the whole table L2-resident at production geometry (~0.7 MB for
  // 512 x 2562), which the byte-per-position variant does not.
  const std::size_t n_pos = static_cast<std::size_t>((cfg_.h + 3) / 4);
  table_.assign(n_pos * 16 * acc_words_, 0);
  for (std::size_t pos = 0; pos < n_pos; ++pos) {
    std::uint64_t* base = table_.data() + pos * 16 * acc_words_;
    for (unsigned v = 1; v < 16; ++v) {
      const unsigned low = v & (~v + 1);
      const unsigned d = static_cast<unsigned>(std::countr_zero(low));
      const std::int64_t j = static_cast<std::int64_t>(pos * 4 + d);
      std::uint64_t* entry = base + v * acc_words_;
      const std::uint64_t* prev = base + (v ^ low) * acc_words_;
      std::copy(prev, prev + acc_words_, entry);
      if (j < cfg_.h) {
        xor_window(seed_words_.data(),
                   static_cast<std::size_t>(cfg_.h - 1 - j), entry,
                   acc_words_);
      }
    }
  }
}

void ToeplitzHasher::hash_block_table(const std::uint64_t* in_words,
                                      std::uint64_t* acc) const {
  const std::size_t n_pos = static_cast<std::size_t>((cfg_.h + 3) / 4);
  const std::uint64_t* tab = table_.data();
  if (acc_words_ == 8) {
    // Production width: keep the accumulator in registers and stay
    // branchless (the all-zero entry is a harmless XOR with zeros).
    std::uint64_t a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    std::uint64_t a4 = 0, a5 = 0, a6 = 0, a7 = 0;
    for (std::size_t pos = 0; pos < n_pos; ++pos) {
      const unsigned nibble = static_cast<unsigned>(
          (in_words[pos >> 4] >> ((pos & 15) * 4)) & 0xF);
      const std::uint64_t* entry = tab + (pos * 16 + nibble) * 8;
      a0 ^= entry[0];
      a1 ^= entry[1];
      a2 ^= entry[2];
      a3 ^= entry[3];
      a4 ^= entry[4];
      a5 ^= entry[5];
      a6 ^= entry[6];
      a7 ^= entry[7];
    }
    acc[0] = a0;
    acc[1] = a1;
    acc[2] = a2;
    acc[3] = a3;
    acc[4] = a4;
    acc[5] = a5;
    acc[6] = a6;
    acc[7] = a7 & top_mask_;
    return;
  }
  std::fill(acc, acc + acc_words_, 0);
  for (std::size_t pos = 0; pos < n_pos; ++pos) {
    const unsigned nibble =
        static_cast<unsigned>((in_words[pos >> 4] >> ((pos & 15) * 4)) & 0xF);
    if (nibble == 0) continue;
    const std::uint64_t* entry = tab + (pos * 16 + nibble) * acc_words_;
    for (std::size_t w = 0; w < acc_words_; ++w) acc[w] ^= entry[w];
  }
  acc[acc_words_ - 1] &= top_mask_;
}

void ToeplitzHasher::hash_block_clmul(const std::uint64_t* in_words,
                                      std::uint64_t* acc) const {
#if defined(SDIQRNG_HAVE_CLMUL)
  // Output bits are the window [h-1, h-1+l) of the carry-less product
  // S(x) * I(x), where S is the seed polynomial and I the input polynomial.
  const std::size_t lo_word = static_cast<std::size_t>((cfg_.h - 1) >> 6);
  const std::size_t hi_word =
      static_cast<std::size_t>((cfg_.h - 1 + cfg_.l - 1) >> 6);
  const unsigned shift = static_cast<unsigned>((cfg_.h - 1) & 63);
  const std::size_t base = lo_word == 0 ? 0 : lo_word - 1;
  const std::size_t nbuf = hi_word - base + 2;
  std::uint64_t stack_buf[64];
  std::vector<std::uint64_t> heap_buf;
  std::uint64_t* buf = stack_buf;
  if (nbuf > std::size(stack_buf)) {
    heap_buf.resize(nbuf);
    buf = heap_buf.data();
  }
  std::fill(buf, buf + nbuf, 0);
  const std::size_t ns = static_cast<std::size_t>((cfg_.l + cfg_.h - 2) / 64) + 1;
  for (std::size_t b = 0; b < in_words_; ++b) {
    const std::uint64_t iv = in_words[b];
    if (iv == 0) continue;
    const __m128i vi = _mm_cvtsi64_si128(static_cast<long long>(iv));
    const std::size_t a_lo = base > b ? base - b : 0;
    const std::size_t a_hi = std::min(ns - 1, hi_word - b);
    for (std::size_t a = a_lo; a <= a_hi; ++a) {
      const __m128i vs =
          _mm_cvtsi64_si128(static_cast<long long>(seed_words_[a]));
      const __m128i prod = _mm_clmulepi64_si128(vs, vi, 0x00);
      const std::size_t k = a + b - base;
      buf[k] ^= static_cast<std::uint64_t>(_mm_cvtsi128_si64(prod));
      buf[k + 1] ^= static_cast<std::uint64_t>(_mm_extract_epi64(prod, 1));
    }
  }
  const std::size_t first = lo_word - base;
  if (shift == 0) {
    for (std::size_t w = 0; w < acc_words_; ++w) acc[w] = buf[first + w];
  } else {
    for (std::size_t w = 0; w < acc_words_; ++w) {
      acc[w] = (buf[first + w] >> shift) | (buf[first + w + 1] << (64 - shift));
    }
  }
  acc[acc_words_ - 1] &= top_mask_;
#else
  (void)in_words;
  (void)acc;
  throw std::runtime_error("clmul kernel not compiled in");
#endif
}

void ToeplitzHasher::hash_block(const std::uint64_t* in_words,
                                std::uint64_t* acc) const {
  if (clmul_)
    hash_block_clmul(in_words, acc);
  else
    hash_block_table(in_words, acc);
}

BitVec ToeplitzHasher::hash(const BitVec& input) const {
  if (static_cast<std::int64_t>(input.size()) != cfg_.h)
    throw std::invalid_argument("toeplitz_hash: input length must equal h");
  std::vector<std::uint64_t> acc(acc_words_, 0);
  hash_block(input.words().data(), acc.data());
  BitVec out;
  out.append_bits(acc, static_cast<std::size_t>(cfg_.l));
  return out;
}

void ToeplitzHasher::accumulate_sample(const BitVec& sample,
                                       std::int64_t round_index,
                                       BitVec& acc) const {
  if (static_cast<std::int64_t>(sample.size()) != cfg_.b)
    throw std::invalid_argument("accumulate_sample: sample width must be b");
  if (round_index < 0 || round_index >= cfg_.m)
    throw std::out_of_range("accumulate_sample: round index outside [0, m)");
  if (static_cast<std::int64_t>(acc.size()) != cfg_.l)
    throw std::invalid_argument("accumulate_sample: accumulator width must be l");
  std::uint64_t bits = sample.words().empty() ? 0 : sample.words()[0];
  while (bits != 0) {
    const int d = std::countr_zero(bits);
    bits &= bits - 1;
    const std::int64_t j = round_index * cfg_.b + d;
    xor_window(seed_words_.data(), static_cast<std::size_t>(cfg_.h - 1 - j),
               acc.words().data(), acc_words_);
  }
  acc.words()[acc_words_ - 1] &= top_mask_;
}

BitVec toeplitz_hash(const ExtractorConfig& cfg, const BitVec& input) {
  return ToeplitzHasher(cfg).hash(input);
}

void streaming_accumulate(const ExtractorConfig& cfg, const BitVec& sample,
                          std::int64_t round_index, BitVec& acc) {
  ToeplitzHasher hasher(cfg, ToeplitzHasher::Kernel::Auto);
  hasher.accumulate_sample(sample, round_index, acc);
}

SecuritySummary composable_epsilon(std::int64_t t, double eps_hash,
                                   std::int64_t m, double eps_fail,
                                   std::int64_t l, std::int64_t h) {
  if (t < 0 || m < 1 || l <= 0 || h < l)
    throw std::invalid_argument("composable_epsilon: bad geometry");
  if (!(eps_hash >= 0.0 && eps_hash <= 1.0) ||
      !(eps_fail >= 0.0 && eps_fail <= 1.0))
    throw std::invalid_argument("composable_epsilon: eps outside [0, 1]");
  SecuritySummary s;
  s.eps_l = eps_hash + static_cast<double>(m) * eps_fail;
  s.eps_total = static_cast<double>(t) * s.eps_l;
  s.compression_r = static_cast<double>(l) / static_cast<double>(h);
  s.big_l = t * l;
  return s;
}

Rates rates(double r_sample_hz, double r_hash_hz, double kappa_per_sample,
            int b, double compression_r, double eps_c) {
  if (!(r_sample_hz > 0.0) || !(r_hash_hz > 0.0))
    throw std::invalid_argument("rates: rates must be > 0");
  Rates r;
  r.r_g_bps = r_sample_hz * kappa_per_sample;
  r.r_s_bps = std::min(r_sample_hz, r_hash_hz) * static_cast<double>(b) *
              compression_r;
  r.r_avg_bps = (1.0 - eps_c) * r.r_s_bps;
  return r;
}

BitVec read_seed_file(const std::filesystem::path& path, std::size_t nbits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open seed file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::size_t want = (nbits + 7) / 8;
  if (bytes.size() != want)
    throw std::runtime_error("seed file has wrong length: expected " +
                             std::to_string(want) + " bytes, got " +
                             std::to_string(bytes.size()));
  for (std::size_t i = nbits; i < bytes.size() * 8; ++i) {
    if ((bytes[i >> 3] >> (7 - (i & 7))) & 1u)
      throw std::runtime_error("seed file has nonzero trailing pad bits");
  }
  return BitVec::from_msb_bytes(bytes, nbits);
}

void write_bits_file(const std::filesystem::path& path, const BitVec& bits) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output: " + path.string());
  const auto bytes = bits.to_msb_bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

BitVec read_bits_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bitstream: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return BitVec::from_msb_bytes(bytes, bytes.size() * 8);
}

}  // namespace sdiqrng::extractor
