#include "scolab/good_code.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "scolab/rng.hpp"

namespace scolab {

namespace {

void check_k(int k) {
  if (k < 2 || k > kMaxCodeK)
    throw InvalidInput("code: k must lie in [2, " + std::to_string(kMaxCodeK) + "]");
}

std::vector<std::uint64_t> fill_table(int k, const std::vector<std::uint64_t>& parity) {
  const std::uint64_t size = std::uint64_t{1} << k;
  std::vector<std::uint64_t> table(size);
  table[0] = 0;
  // table[j] = table[j without its lowest bit] ^ row(lowest bit)
  for (std::uint64_t j = 1; j < size; ++j) {
    const int low = std::countr_zero(j);
    table[j] = table[j & (j - 1)] ^ ((std::uint64_t{1} << low) | (parity[low] << k));
  }
  return table;
}

int min_weight(const std::vector<std::uint64_t>& table) {
  int best = std::numeric_limits<int>::max();
  for (std::size_t j = 1; j < table.size(); ++j) best = std::min(best, std::popcount(table[j]));
  return best;
}

}  // namespace

std::uint64_t BinaryCode::encode_bits(std::uint64_t message) const {
  std::uint64_t p = 0;
  for (int i = 0; i < k; ++i)
    if ((message >> i) & 1u) p ^= parity[i];
  return (message & message_mask()) | (p << k);
}

std::uint64_t BinaryCode::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const int row_bytes = (k + 7) / 8;
  for (std::uint64_t row : parity)
    for (int b = 0; b < row_bytes; ++b) {
      h ^= (row >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  return h;
}

BinaryCode code_from_parity(int k, std::vector<std::uint64_t> parity, std::uint64_t seed) {
  check_k(k);
  if (parity.size() != static_cast<std::size_t>(k))
    throw InvalidInput("code: parity matrix must have k rows");
  const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  for (std::uint64_t row : parity)
    if (row & ~mask) throw InvalidInput("code: parity row wider than k bits");

  BinaryCode code;
  code.k = k;
  code.parity = std::move(parity);
  code.table = fill_table(k, code.parity);
  code.min_distance = min_weight(code.table);
  code.rho = static_cast<double>(code.min_distance) / (2.0 * k);
  code.seed = seed;
  code.attempts = 1;
  return code;
}

BinaryCode build_code(int k, double target_rho, std::uint64_t seed, int max_retries) {
  check_k(k);
  if (!(target_rho > 0.0 && target_rho < 0.5))
    throw InvalidInput("build_code: target rho must lie in (0, 1/2)");
  if (max_retries < 1) throw InvalidInput("build_code: max_retries must be positive");

  const int required = static_cast<int>(std::ceil(target_rho * 2.0 * k - 1e-12));
  const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  double best_rho = 0.0;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(attempt), kTagCode);
    std::vector<std::uint64_t> parity(k);
    for (auto& row : parity) row = rng() & mask;
    BinaryCode code = code_from_parity(k, std::move(parity), seed);
    code.attempts = attempt + 1;
    best_rho = std::max(best_rho, code.rho);
    if (code.min_distance >= required) return code;
  }
  throw CodeConstructionError("build_code: no code with relative distance >= " +
                                  std::to_string(target_rho) + " after " +
                                  std::to_string(max_retries) + " attempts (best " +
                                  std::to_string(best_rho) + ")",
                              best_rho);
}

double verify_relative_distance(const BinaryCode& code) {
  if (code.table.size() != code.size()) throw InvalidInput("verify: codeword table not populated");
  return static_cast<double>(min_weight(code.table)) / code.length();
}

std::uint64_t message_bits(std::span<const double> v) {
  if (v.size() > 64) throw InvalidInput("message_bits: message too long");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == -1.0)
      bits |= std::uint64_t{1} << i;
    else if (v[i] != 1.0)
      throw InvalidInput("message_bits: entries must be +1 or -1");
  }
  return bits;
}

Vec bits_to_signs(std::uint64_t word, int n) {
  Vec out(n);
  for (int b = 0; b < n; ++b) out[b] = ((word >> b) & 1u) ? -1.0 : 1.0;
  return out;
}

Vec encode(const BinaryCode& code, std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(code.k)) throw InvalidInput("encode: message length != k");
  bool all_zero = true;
  for (double x : v) all_zero = all_zero && x == 0.0;
  if (all_zero) return Vec(code.length(), 0.0);
  return bits_to_signs(code.encode_bits(message_bits(v)), code.length());
}

Vec normalized_codeword(const BinaryCode& code, std::uint64_t j) {
  Vec x = bits_to_signs(code.table.empty() ? code.encode_bits(j) : code.table[j], code.length());
  const double s = 1.0 / std::sqrt(static_cast<double>(code.length()));
  for (double& e : x) e *= s;
  return x;
}

SignedDot::SignedDot(std::span<const double> x, double scale, int bit_offset)
    : nbytes_(static_cast<int>((x.size() + 7) / 8)), offset_(bit_offset) {
  lut_.assign(static_cast<std::size_t>(nbytes_) * 256, 0.0);
  for (int b = 0; b < nbytes_; ++b)
    for (unsigned byte = 0; byte < 256; ++byte) {
      double s = 0.0;
      for (int l = 0; l < 8; ++l) {
        const std::size_t pos = static_cast<std::size_t>(8 * b + l);
        if (pos >= x.size()) break;
        s += ((byte >> l) & 1u) ? -x[pos] : x[pos];
      }
      lut_[static_cast<std::size_t>(b) * 256 + byte] = scale * s;
    }
}

namespace {

// Two butterfly levels (h and 2h) per sweep.
void wht_radix4(double* d, std::size_t n, std::size_t h) {
  for (std::size_t i = 0; i < n; i += 4 * h)
    for (std::size_t j = i; j < i + h; ++j) {
      const double a = d[j], b = d[j + h], c = d[j + 2 * h], e = d[j + 3 * h];
      const double s0 = a + b, s1 = a - b, s2 = c + e, s3 = c - e;
      d[j] = s0 + s2;
      d[j + h] = s1 + s3;
      d[j + 2 * h] = s0 - s2;
      d[j + 3 * h] = s1 - s3;
    }
}

void wht_radix2(double* d, std::size_t n, std::size_t h) {
  for (std::size_t i = 0; i < n; i += 2 * h)
    for (std::size_t j = i; j < i + h; ++j) {
      const double x = d[j], y = d[j + h];
      d[j] = x + y;
      d[j + h] = x - y;
    }
}

void wht_levels(double* d, std::size_t n, std::size_t h, std::size_t end) {
  for (; h * 4 <= end; h *= 4) wht_radix4(d, n, h);
  if (h < end) wht_radix2(d, n, h);
}

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
void wht_kernel(double* d, std::size_t n) {
  // Levels below the block size run block by block while the block sits in L1.
  constexpr std::size_t kBlock = 1024;
  if (n > kBlock) {
    for (std::size_t o = 0; o < n; o += kBlock) wht_levels(d + o, kBlock, 1, kBlock);
    wht_levels(d, n, kBlock, n);
  } else {
    wht_levels(d, n, 1, n);
  }
}

}  // namespace

void walsh_hadamard(std::span<double> a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw InvalidInput("walsh_hadamard: length must be a power of two");
  wht_kernel(a.data(), n);
}

std::vector<std::uint64_t> generator_columns(const BinaryCode& code) {
  std::vector<std::uint64_t> cols(static_cast<std::size_t>(code.length()), 0);
  for (int b = 0; b < code.k; ++b) cols[b] = std::uint64_t{1} << b;
  for (int r = 0; r < code.k; ++r)
    for (int c = 0; c < code.k; ++c)
      if ((code.parity[r] >> c) & 1u) cols[code.k + c] |= std::uint64_t{1} << r;
  return cols;
}

void code_spectrum(const BinaryCode& code, std::span<const double> x, double scale,
                   std::span<double> out) {
  if (x.size() != static_cast<std::size_t>(code.length()))
    throw InvalidInput("code_spectrum: x length != 2k");
  if (out.size() != code.size()) throw InvalidInput("code_spectrum: output length != 2^k");
  std::fill(out.begin(), out.end(), 0.0);
  const auto cols = generator_columns(code);
  for (std::size_t b = 0; b < cols.size(); ++b) out[cols[b]] += scale * x[b];
  walsh_hadamard(out);
}

std::vector<double> correlation_scan(const BinaryCode& code, std::span<const double> wc) {
  if (wc.size() != static_cast<std::size_t>(code.length()))
    throw InvalidInput("correlation_scan: wc length != 2k");
  std::vector<double> scores(code.table.size());
  code_spectrum(code, wc, 1.0 / std::sqrt(static_cast<double>(code.length())), scores);
  return scores;
}

// File layout (little endian):
//   "SCOCODE1" | u32 version | u32 k | f64 rho | u64 seed | k rows of ceil(k/8) bytes
// Row i holds M[i][0..k) with column c at byte c/8, bit c%8.
void save_code(const BinaryCode& code, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_code: cannot open " + path.string());
  auto put = [&](auto value) {
    unsigned char buf[sizeof(value)];
    std::memcpy(buf, &value, sizeof(value));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(value));
    out.write(reinterpret_cast<const char*>(buf), sizeof(value));
  };
  out.write("SCOCODE1", 8);
  put(kCodeFormatVersion);
  put(static_cast<std::uint32_t>(code.k));
  put(code.rho);
  put(code.seed);
  const int row_bytes = (code.k + 7) / 8;
  for (std::uint64_t row : code.parity)
    for (int b = 0; b < row_bytes; ++b) out.put(static_cast<char>((row >> (8 * b)) & 0xffu));
  if (!out) throw std::runtime_error("save_code: write failed for " + path.string());
}

BinaryCode load_code(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_code: cannot open " + path.string());
  auto get = [&](auto& value) {
    unsigned char buf[sizeof(value)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(value)))
      throw std::runtime_error("load_code: truncated file " + path.string());
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(value));
    std::memcpy(&value, buf, sizeof(value));
  };
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, "SCOCODE1", 8) != 0)
    throw std::runtime_error("load_code: bad magic in " + path.string());
  std::uint32_t version = 0, k = 0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  get(version);
  if (version != kCodeFormatVersion)
    throw std::runtime_error("load_code: unsupported format version " + std::to_string(version));
  get(k);
  get(rho);
  get(seed);
  check_k(static_cast<int>(k));
  const int row_bytes = (static_cast<int>(k) + 7) / 8;
  std::vector<std::uint64_t> parity(k, 0);
  for (auto& row : parity)
    for (int b = 0; b < row_bytes; ++b) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof())
        throw std::runtime_error("load_code: truncated parity matrix in " + path.string());
      row |= static_cast<std::uint64_t>(c & 0xff) << (8 * b);
    }
  BinaryCode code = code_from_parity(static_cast<int>(k), std::move(parity), seed);
  if (code.rho != rho)
    throw std::runtime_error("load_code: stored rho does not match the recomputed distance");
  return code;
}

}  // namespace scolab
