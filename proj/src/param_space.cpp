#include "scolab/param_space.hpp"

#include <algorithm>
#include <cmath>

namespace scolab {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

ParamVector::ParamVector(Vec c, Vec m) : code(std::move(c)), message(std::move(m)) {
  if (code.size() != 2 * message.size())
    throw InvalidInput("ParamVector: code block must have length 2k");
}

double ParamVector::norm_sq() const { return dot(code, code) + dot(message, message); }
double ParamVector::norm() const { return std::sqrt(norm_sq()); }

bool ParamVector::feasible(double tol) const { return finite() && norm() <= 1.0 + tol; }

bool ParamVector::finite() const {
  auto ok = [](double x) { return std::isfinite(x); };
  return std::all_of(code.begin(), code.end(), ok) &&
         std::all_of(message.begin(), message.end(), ok);
}

ParamVector& ParamVector::operator+=(const ParamVector& o) {
  if (o.k() != k()) throw InvalidInput("ParamVector: block size mismatch");
  for (std::size_t i = 0; i < code.size(); ++i) code[i] += o.code[i];
  for (std::size_t i = 0; i < message.size(); ++i) message[i] += o.message[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& o) {
  if (o.k() != k()) throw InvalidInput("ParamVector: block size mismatch");
  for (std::size_t i = 0; i < code.size(); ++i) code[i] -= o.code[i];
  for (std::size_t i = 0; i < message.size(); ++i) message[i] -= o.message[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double s) {
  for (double& x : code) x *= s;
  for (double& x : message) x *= s;
  return *this;
}

double dot(const ParamVector& a, const ParamVector& b) {
  return dot(a.code, b.code) + dot(a.message, b.message);
}

double distance(const ParamVector& a, const ParamVector& b) { return (a - b).norm(); }

double distance_inf(const ParamVector& a, const ParamVector& b) {
  ParamVector d = a - b;
  return std::max(norm_inf(d.code), norm_inf(d.message));
}

ParamVector project_unit_ball(const ParamVector& w) {
  if (!w.finite()) throw InvalidInput("project_unit_ball: non-finite entry");
  const double n = w.norm();
  if (n <= 1.0) return w;
  return (1.0 / n) * w;
}

Vec unit_normalize(std::span<const double> x) {
  const double n = norm(x);
  Vec out(x.begin(), x.end());
  if (n == 0.0) return out;
  for (double& v : out) v /= n;
  return out;
}

}  // namespace scolab
