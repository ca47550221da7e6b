#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scolab/param_space.hpp"

namespace scolab {

inline constexpr int kMaxCodeK = 28;
inline constexpr std::uint32_t kCodeFormatVersion = 1;

/// Systematic rate-1/2 binary linear code G: {-1,1}^k -> {-1,1}^{2k}.
///
/// Codewords are packed into one 64-bit word: bits [0, k) carry the message,
/// bits [k, 2k) the parity u*M. Bit value 0 is the symbol +1 and bit value 1
/// is the symbol -1, so the all-+1 vector is the zero codeword. The table is
/// indexed by the message bits, so table[j] encodes message j.
struct BinaryCode {
  int k = 0;
  std::vector<std::uint64_t> parity;  // k rows of k bits (the matrix M)
  std::vector<std::uint64_t> table;   // 2^k codewords
  int min_distance = 0;
  double rho = 0.0;  // min_distance / (2k), measured exhaustively
  std::uint64_t seed = 0;
  int attempts = 0;

  int length() const { return 2 * k; }
  std::uint64_t size() const { return std::uint64_t{1} << k; }
  std::uint64_t message_mask() const { return size() - 1; }

  /// Codeword bits computed from the generator rows (no table access).
  std::uint64_t encode_bits(std::uint64_t message) const;

  /// FNV-1a over the packed parity matrix.
  std::uint64_t fingerprint() const;
};

class CodeConstructionError : public std::runtime_error {
 public:
  CodeConstructionError(const std::string& what, double best_rho)
      : std::runtime_error(what), best_rho_(best_rho) {}
  double best_rho() const { return best_rho_; }

 private:
  double best_rho_;
};

/// Builds the codeword table for a given parity matrix and measures rho.
BinaryCode code_from_parity(int k, std::vector<std::uint64_t> parity, std::uint64_t seed = 0);

/// Random systematic code [I | M], retried until the minimum weight reaches
/// ceil(target_rho * 2k). Throws CodeConstructionError when retries run out.
BinaryCode build_code(int k, double target_rho, std::uint64_t seed, int max_retries);

/// min over nonzero codewords of weight / 2k (equals the pairwise relative
/// distance for a linear code).
double verify_relative_distance(const BinaryCode& code);

/// Maps a +-1 message to its bit pattern (+1 -> 0, -1 -> 1).
std::uint64_t message_bits(std::span<const double> v);

/// +-1 symbols of codeword bits `word` over n positions.
Vec bits_to_signs(std::uint64_t word, int n);

/// G(v) as a +-1 vector of length 2k; v = 0 maps to 0. Throws InvalidInput
/// for any other non +-1 entry.
Vec encode(const BinaryCode& code, std::span<const double> v);

/// G(v)/||G(v)|| for table index j.
Vec normalized_codeword(const BinaryCode& code, std::uint64_t j);

/// Dot products of +-1 patterns against a fixed real vector, via per-byte
/// lookup tables: value(bits) = scale * sum_b (bit_b ? -x_b : x_b).
class SignedDot {
 public:
  SignedDot() = default;
  SignedDot(std::span<const double> x, double scale = 1.0, int bit_offset = 0);

  double operator()(std::uint64_t bits) const {
    bits >>= offset_;
    double s = 0.0;
    const double* t = lut_.data();
    for (int b = 0; b < nbytes_; ++b, t += 256) s += t[(bits >> (8 * b)) & 0xffu];
    return s;
  }

 private:
  std::vector<double> lut_;
  int nbytes_ = 0;
  int offset_ = 0;
};

/// In-place Walsh-Hadamard transform: a[j] <- sum_y a[y] (-1)^{popcount(j & y)}.
/// The length must be a power of two.
void walsh_hadamard(std::span<double> a);

/// Generator column of each of the 2k code positions as a k-bit mask, so that
/// bit b of table[j] equals popcount(j & column[b]) mod 2.
std::vector<std::uint64_t> generator_columns(const BinaryCode& code);

/// out[j] = scale * <x, G(j)> for every message j (symbols +-1, bit 0 -> +1),
/// computed with one transform of length 2^k instead of a table pass.
void code_spectrum(const BinaryCode& code, std::span<const double> x, double scale,
                   std::span<double> out);

/// scores[j] = <wc, G(j)/sqrt(2k)> for every codeword.
std::vector<double> correlation_scan(const BinaryCode& code, std::span<const double> wc);

void save_code(const BinaryCode& code, const std::filesystem::path& path);
BinaryCode load_code(const std::filesystem::path& path);

}  // namespace scolab
