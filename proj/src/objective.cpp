/* Copyright 2026 The bszo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bszo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "bszo/kernels.hpp"
#include "bszo/rng.hpp"

namespace bszo {

namespace {

struct FormatSpec {
  int significand_bits;  // including the implicit leading bit
  int min_exponent;      // smallest normal exponent, ilogb convention
  double max_finite;
};

constexpr FormatSpec kFp32{24, -126, 3.4028234663852886e38};
constexpr FormatSpec kBf16{8, -126, 3.3895313892515355e38};
constexpr FormatSpec kFp16{11, -14, 65504.0};

QuantizeResult quantize_to(double x, const FormatSpec& fmt) {
  if (std::isnan(x)) return {x, false};
  if (std::isinf(x)) return {x, false};
  if (x == 0.0) return {x, false};
  int e = std::ilogb(x);
  if (e < fmt.min_exponent) e = fmt.min_exponent;  // subnormal range: fixed lsb
  const double lsb = std::ldexp(1.0, e - (fmt.significand_bits - 1));
  // nearbyint under the default rounding mode is round-half-even.
  const double q = std::nearbyint(x / lsb) * lsb;
  if (std::abs(q) > fmt.max_finite) {
    return {x > 0.0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity(),
            true};
  }
  return {q, false};
}

}  // namespace

QuantizeResult quantize(double value, Precision precision) {
  switch (precision) {
    case Precision::fp64:
      return {value, false};
    case Precision::fp32:
      return quantize_to(value, kFp32);
    case Precision::bf16:
      return quantize_to(value, kBf16);
    case Precision::fp16:
      return quantize_to(value, kFp16);
  }
  return {value, false};
}

LogisticData make_synthetic_logistic(std::size_t n, std::size_t samples, std::uint64_t seed) {
  LogisticData data;
  data.n = n;
  data.features.resize(n * samples);
  data.labels.resize(samples);
  const std::uint64_t feat_seed = rng::derive(seed, rng::Stream::data, 0);
  const std::uint64_t w_seed = rng::derive(seed, rng::Stream::data, 1);
  const std::uint64_t label_seed = rng::derive(seed, rng::Stream::data, 2);
  for (std::size_t j = 0; j < n * samples; ++j) {
    data.features[j] = rng::normal_at(feat_seed, j);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < samples; ++i) {
    double margin = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      margin += data.features[i * n + j] * rng::normal_at(w_seed, j) * scale;
    }
    const double p = 1.0 / (1.0 + std::exp(-2.0 * margin));
    const double u = rng::to_unit(rng::hash_at(label_seed, i));
    data.labels[i] = u < p ? 1 : -1;
  }
  return data;
}

void dump_logistic_csv(const LogisticData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_logistic_csv: cannot open " + path);
  out << "label";
  for (std::size_t j = 0; j < data.n; ++j) out << ",x" << j;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < data.samples(); ++i) {
    out << data.labels[i];
    for (std::size_t j = 0; j < data.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features[i * data.n + j]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

LogisticData load_logistic_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_logistic_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_logistic_csv: empty file");
  const std::size_t n = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  LogisticData data;
  data.n = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    data.labels.push_back(std::stoi(cell));
    for (std::size_t j = 0; j < n; ++j) {
      std::getline(ss, cell, ',');
      data.features.push_back(std::stod(cell));
    }
  }
  return data;
}

Objective Objective::quadratic(std::vector<double> a_diag, std::vector<double> b) {
  if (a_diag.size() != b.size() || a_diag.empty()) {
    throw std::invalid_argument("Objective::quadratic: dimension mismatch");
  }
  Objective obj;
  obj.kind_ = ObjectiveKind::quadratic;
  obj.n_ = a_diag.size();
  obj.a_diag_ = std::move(a_diag);
  obj.b_ = std::move(b);
  return obj;
}

Objective Objective::isotropic_quadratic(std::size_t n, double a) {
  return quadratic(std::vector<double>(n, a), std::vector<double>(n, 0.0));
}

Objective Objective::rosenbrock(std::size_t n) {
  if (n < 2) throw std::invalid_argument("Objective::rosenbrock: n must be at least 2");
  Objective obj;
  obj.kind_ = ObjectiveKind::rosenbrock;
  obj.n_ = n;
  return obj;
}

Objective Objective::logistic(LogisticData data) {
  if (data.n == 0 || data.samples() == 0) {
    throw std::invalid_argument("Objective::logistic: empty dataset");
  }
  Objective obj;
  obj.kind_ = ObjectiveKind::logistic;
  obj.n_ = data.n;
  obj.logistic_ = std::move(data);
  return obj;
}

Objective::Objective(const Objective& other)
    : kind_(other.kind_),
      n_(other.n_),
      a_diag_(other.a_diag_),
      b_(other.b_),
      logistic_(other.logistic_),
      noise_cov_(other.noise_cov_),
      noise_seed_(other.noise_seed_),
      precision_(other.precision_),
      jitter_std_(other.jitter_std_),
      evaluations_(other.evaluations_.load(std::memory_order_relaxed)),
      overflowed_(other.overflowed_.load(std::memory_order_relaxed)) {}

Objective& Objective::operator=(const Objective& other) {
  if (this == &other) return *this;
  kind_ = other.kind_;
  n_ = other.n_;
  a_diag_ = other.a_diag_;
  b_ = other.b_;
  logistic_ = other.logistic_;
  noise_cov_ = other.noise_cov_;
  noise_seed_ = other.noise_seed_;
  precision_ = other.precision_;
  jitter_std_ = other.jitter_std_;
  evaluations_.store(other.evaluations_.load(std::memory_order_relaxed),
                     std::memory_order_relaxed);
  overflowed_.store(other.overflowed_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

void Objective::set_noise_trace(double trace, std::uint64_t noise_seed) {
  if (trace < 0.0) throw std::invalid_argument("set_noise_trace: trace must be nonnegative");
  if (trace == 0.0) {
    noise_cov_.clear();
    return;
  }
  noise_cov_.assign(n_, trace / static_cast<double>(n_));
  noise_seed_ = noise_seed;
}

void Objective::set_noise_covariance(std::vector<double> cov_diag, std::uint64_t noise_seed) {
  if (cov_diag.size() != n_) {
    throw std::invalid_argument("set_noise_covariance: dimension mismatch");
  }
  noise_cov_ = std::move(cov_diag);
  noise_seed_ = noise_seed;
}

void Objective::set_jitter(double jitter_std) {
  if (jitter_std < 0.0) throw std::invalid_argument("set_jitter: std must be nonnegative");
  jitter_std_ = jitter_std;
}

double Objective::clean_loss_unchecked(std::span<const double> theta) const {
  switch (kind_) {
    case ObjectiveKind::quadratic:
      return kernels::quadratic_form(theta, a_diag_, b_);
    case ObjectiveKind::rosenbrock:
      return kernels::rosenbrock_sum(theta);
    case ObjectiveKind::logistic: {
      const std::size_t m = logistic_.samples();
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double margin = 0.0;
        for (std::size_t j = 0; j < n_; ++j) margin += logistic_.features[i * n_ + j] * theta[j];
        // log(1 + exp(-y m)) evaluated stably
        const double z = -static_cast<double>(logistic_.labels[i]) * margin;
        total += z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      }
      return total / static_cast<double>(m);
    }
  }
  return 0.0;
}

double Objective::noise_term(std::span<const double> theta, MinibatchId batch) const {
  if (noise_cov_.empty()) return 0.0;
  const std::uint64_t zeta_seed =
      rng::derive(noise_seed_, rng::Stream::batch_noise, static_cast<std::uint64_t>(batch.index));
  // zeta' theta streamed; uniform diagonal covariance is the common case and
  // avoids a sqrt per coordinate.
  if (std::adjacent_find(noise_cov_.begin(), noise_cov_.end(), std::not_equal_to<>()) ==
      noise_cov_.end()) {
    return std::sqrt(noise_cov_[0]) * kernels::dot_gaussian(theta, zeta_seed);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    s += std::sqrt(noise_cov_[j]) * rng::normal_at(zeta_seed, j) * theta[j];
  }
  return s;
}

double Objective::evaluate(std::span<const double> theta, MinibatchId batch,
                           std::uint64_t jitter_seed) const {
  if (theta.size() != n_) throw std::invalid_argument("evaluate: dimension mismatch");
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  double value = clean_loss_unchecked(theta);
  value += noise_term(theta, batch);
  if (jitter_std_ > 0.0) {
    value += jitter_std_ * rng::normal_at(rng::derive(jitter_seed, rng::Stream::jitter), 0);
  }
  const QuantizeResult q = quantize(value, precision_);
  if (q.overflow) overflowed_.store(true, std::memory_order_relaxed);
  return q.value;
}

double Objective::clean_loss(std::span<const double> theta) const {
  if (theta.size() != n_) throw std::invalid_argument("clean_loss: dimension mismatch");
  return clean_loss_unchecked(theta);
}

std::vector<double> Objective::true_gradient(std::span<const double> theta) const {
  if (theta.size() != n_) throw std::invalid_argument("true_gradient: dimension mismatch");
  std::vector<double> g(n_, 0.0);
  switch (kind_) {
    case ObjectiveKind::quadratic:
      for (std::size_t j = 0; j < n_; ++j) g[j] = a_diag_[j] * theta[j] - b_[j];
      break;
    case ObjectiveKind::rosenbrock:
      for (std::size_t j = 0; j + 1 < n_; ++j) {
        const double t = theta[j + 1] - theta[j] * theta[j];
        g[j] += -400.0 * t * theta[j] - 2.0 * (1.0 - theta[j]);
        g[j + 1] += 200.0 * t;
      }
      break;
    case ObjectiveKind::logistic: {
      const std::size_t m = logistic_.samples();
      for (std::size_t i = 0; i < m; ++i) {
        double margin = 0.0;
        for (std::size_t j = 0; j < n_; ++j) margin += logistic_.features[i * n_ + j] * theta[j];
        const double y = static_cast<double>(logistic_.labels[i]);
        const double w = -y / (1.0 + std::exp(y * margin));
        for (std::size_t j = 0; j < n_; ++j) {
          g[j] += w * logistic_.features[i * n_ + j] / static_cast<double>(m);
        }
      }
      break;
    }
  }
  return g;
}

std::vector<double> Objective::gradient_noise_at(MinibatchId batch) const {
  std::vector<double> zeta(n_, 0.0);
  if (noise_cov_.empty()) return zeta;
  const std::uint64_t zeta_seed =
      rng::derive(noise_seed_, rng::Stream::batch_noise, static_cast<std::uint64_t>(batch.index));
  for (std::size_t j = 0; j < n_; ++j) {
    zeta[j] = std::sqrt(noise_cov_[j]) * rng::normal_at(zeta_seed, j);
  }
  return zeta;
}

double Objective::noise_trace() const {
  return std::accumulate(noise_cov_.begin(), noise_cov_.end(), 0.0);
}

double Objective::optimal_value() const {
  switch (kind_) {
    case ObjectiveKind::quadratic: {
      double v = 0.0;
      for (std::size_t j = 0; j < n_; ++j) v -= 0.5 * b_[j] * b_[j] / a_diag_[j];
      return v;
    }
    case ObjectiveKind::rosenbrock:
      return 0.0;
    case ObjectiveKind::logistic:
      throw std::logic_error("optimal_value: not available for logistic");
  }
  return 0.0;
}

double Objective::smoothness() const {
  if (kind_ != ObjectiveKind::quadratic) {
    throw std::logic_error("smoothness: only defined for quadratic");
  }
  return *std::max_element(a_diag_.begin(), a_diag_.end());
}

}  // namespace bszo
