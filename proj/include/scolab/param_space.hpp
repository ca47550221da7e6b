#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace scolab {

using Vec = std::vector<double>;

/// Thrown when an input vector or index violates an operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kFeasibilityTol = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double norm_inf(std::span<const double> a);

/// A point w = (w^c, w^m) with a code block of length 2k and a message block
/// of length k. Arithmetic treats the pair as one vector in R^{3k}.
struct ParamVector {
  Vec code;
  Vec message;

  ParamVector() = default;
  explicit ParamVector(std::size_t k) : code(2 * k, 0.0), message(k, 0.0) {}
  ParamVector(Vec c, Vec m);

  std::size_t k() const { return message.size(); }
  double norm() const;
  double norm_sq() const;
  bool feasible(double tol = kFeasibilityTol) const;
  bool finite() const;

  ParamVector& operator+=(const ParamVector& o);
  ParamVector& operator-=(const ParamVector& o);
  ParamVector& operator*=(double s);

  friend ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
  friend ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
  friend ParamVector operator*(double s, ParamVector a) { return a *= s; }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

double dot(const ParamVector& a, const ParamVector& b);
double distance(const ParamVector& a, const ParamVector& b);
double distance_inf(const ParamVector& a, const ParamVector& b);

/// Euclidean projection onto the unit ball. Throws InvalidInput on NaN/Inf.
ParamVector project_unit_ball(const ParamVector& w);

/// x / ||x||; the zero vector maps to itself (the G(0) = 0 convention).
Vec unit_normalize(std::span<const double> x);

}  // namespace scolab
