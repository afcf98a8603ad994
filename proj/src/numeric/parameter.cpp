#include "qctc/numeric/parameter.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qctc {

Parameter& ParameterSet::add(const std::string& name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  return params_.emplace_back(name, std::move(value));
}

Parameter& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double ParameterSet::grad_norm() const {
  double total = 0.0;
  for (const auto& p : params_)
    for (double g : p.grad.data()) total += g * g;
  return std::sqrt(total);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  return static_cast<std::size_t>(next() % n);
}

double Rng::normal() {
  // Box-Muller; the first uniform is shifted away from zero.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_tensor(rows, cols, -limit, limit, rng);
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = stddev * rng.normal();
  return t;
}

}  // namespace qctc
