#include "scolab/feldman.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scolab {

namespace {

void check_index(const FeldmanSpec& spec, int i) {
  if (i < 0 || i >= spec.k())
    throw InvalidInput("feldman: index " + std::to_string(i) + " outside [0, k)");
}

}  // namespace

FeldmanSpec make_feldman(std::shared_ptr<const BinaryCode> code, double zeta) {
  if (!code) throw InvalidInput("feldman: null code");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw InvalidInput("feldman: zeta must lie in (0, 1]");
  FeldmanSpec spec;
  spec.floor = zeta * (1.0 - code->rho / 2.0);
  spec.code = std::move(code);
  spec.zeta = zeta;
  return spec;
}

FeldmanMaxima::FeldmanMaxima(std::span<const int> indices, double floor)
    : index_(indices.begin(), indices.end()),
      value_(indices.size(), floor),
      argmax_(indices.size(), -1),
      threshold_(indices.empty() ? INFINITY : floor) {}

void FeldmanMaxima::refresh() {
  threshold_ = *std::min_element(value_.begin(), value_.end());
}

FeldmanMaxima feldman_scan(const FeldmanSpec& spec, std::span<const double> wc,
                           std::span<const int> indices) {
  const BinaryCode& code = *spec.code;
  if (wc.size() != static_cast<std::size_t>(code.length()))
    throw InvalidInput("feldman: wc length != 2k");
  for (int i : indices) check_index(spec, i);
  FeldmanMaxima acc(indices, spec.floor);
  thread_local std::vector<double> corr;
  corr.resize(code.size());
  code_spectrum(code, wc, 1.0 / std::sqrt(static_cast<double>(code.length())), corr);
  for (std::uint64_t j = 0; j < code.size(); ++j) acc.offer(j, corr[j]);
  return acc;
}

double h_eval(const FeldmanSpec& spec, std::span<const double> wc, int i) {
  const int idx[] = {i};
  return feldman_scan(spec, wc, idx).value(0);
}

Vec h_subgrad(const FeldmanSpec& spec, std::span<const double> wc, int i) {
  const int idx[] = {i};
  const FeldmanMaxima acc = feldman_scan(spec, wc, idx);
  if (acc.argmax(0) < 0) return Vec(spec.code->length(), 0.0);
  return normalized_codeword(*spec.code, static_cast<std::uint64_t>(acc.argmax(0)));
}

Interval h_certified_eval(const FeldmanSpec& spec, double c, std::span<const double> u, int i) {
  check_index(spec, i);
  if (!(c >= 0.0)) throw InvalidInput("h_certified_eval: scale c must be >= 0");
  if (u.size() != static_cast<std::size_t>(spec.k()))
    throw InvalidInput("h_certified_eval: message length != k");
  message_bits(u);  // validates +-1 entries
  if (u[i] == 1.0) {
    const double v = std::max(spec.floor, c);
    return {v, v};
  }
  // Every x in W_i differs from G(u): correlation <= 1 - 2 rho.
  return {spec.floor, std::max(spec.floor, c * (1.0 - 2.0 * spec.code->rho))};
}

}  // namespace scolab
