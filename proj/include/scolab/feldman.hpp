#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "scolab/good_code.hpp"
#include "scolab/param_space.hpp"

namespace scolab {

/// Feldman's function h(w, i) = max{ zeta(1 - rho/2), max_{x in W_i} <w, x/|x|> }
/// over the code block, where W_i holds the codewords whose message has +1 at
/// coordinate i. Indices are 0-based throughout the library.
struct FeldmanSpec {
  std::shared_ptr<const BinaryCode> code;
  double zeta = 1.0;
  double floor = 0.0;  // zeta * (1 - rho/2)

  int k() const { return code->k; }
};

FeldmanSpec make_feldman(std::shared_ptr<const BinaryCode> code, double zeta);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  double width() const { return hi - lo; }
};

/// Running per-index maxima of codeword correlations, started at the floor.
/// Offers must arrive in increasing table order so that ties keep the lowest
/// table index; a tie with the floor keeps the floor (argmax = -1).
class FeldmanMaxima {
 public:
  FeldmanMaxima(std::span<const int> indices, double floor);

  void offer(std::uint64_t j, double score) {
    if (score <= threshold_) return;
    bool changed = false;
    for (std::size_t r = 0; r < index_.size(); ++r) {
      if (((j >> index_[r]) & 1u) == 0 && score > value_[r]) {
        value_[r] = score;
        argmax_[r] = static_cast<std::int64_t>(j);
        changed = true;
      }
    }
    if (changed) refresh();
  }

  std::size_t size() const { return index_.size(); }
  int index(std::size_t r) const { return index_[r]; }
  double value(std::size_t r) const { return value_[r]; }
  /// Table index of the maximizing codeword, or -1 for the floor branch.
  std::int64_t argmax(std::size_t r) const { return argmax_[r]; }

 private:
  void refresh();

  std::vector<int> index_;
  std::vector<double> value_;
  std::vector<std::int64_t> argmax_;
  double threshold_;
};

/// One table pass giving h(wc, i) for every i in `indices`.
FeldmanMaxima feldman_scan(const FeldmanSpec& spec, std::span<const double> wc,
                           std::span<const int> indices);

double h_eval(const FeldmanSpec& spec, std::span<const double> wc, int i);

/// Selected subgradient: 0 on the floor branch (ties included), otherwise the
/// normalized best codeword.
Vec h_subgrad(const FeldmanSpec& spec, std::span<const double> wc, int i);

/// Enclosure of h(c * G(u)/|G(u)|, i) that avoids scanning W_i, using the
/// code's certified distance for codewords other than G(u).
Interval h_certified_eval(const FeldmanSpec& spec, double c, std::span<const double> u, int i);

}  // namespace scolab
