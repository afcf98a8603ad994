#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qctc/numeric/tensor.hpp"

namespace qctc {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value

  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad.fill(0.0); }
};

// Owns every learned matrix of a model. Addresses of stored parameters are
// stable for the lifetime of the set.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, Tensor value);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  // Insertion order.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  double grad_norm() const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

// Seeded generator used for all randomness. Conversions to reals and indices
// are done by hand so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);  // [0, n)
  double normal();
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Tensor uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);
Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, Rng& rng);

}  // namespace qctc
