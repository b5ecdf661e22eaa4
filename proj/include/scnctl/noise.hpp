#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "scnctl/types.hpp"

namespace scnctl {

enum class StreamLabel : std::uint64_t {
  kDisturbance = 1,
  kSensor = 2,
  kVoltage = 3,
  kDecoder = 4,
  kDecoderZ = 5,
};

std::string_view to_string(StreamLabel label);

// Derives the seed of an independent labelled stream from a master seed.
// Each label gets its own generator so toggling one noise source never
// shifts another's samples.
std::uint64_t stream_seed(std::uint64_t master_seed, StreamLabel label);

// Zero-mean Gaussian vector source with a fixed covariance.
//
// The covariance only has to be symmetric positive semidefinite; it is
// factored once through a symmetric eigendecomposition. Two sources built
// with the same covariance, seed and label replay identical sequences.
class NoiseSource {
 public:
  NoiseSource(const Matrix& covariance, std::uint64_t seed, StreamLabel label);

  // Draws a sample with covariance `covariance()`.
  Vector sample();
  // Draws a sample with covariance `scale * covariance()`; used for the
  // Euler-Maruyama dt scaling of process noise.
  Vector sample_scaled(double scale);

  const Matrix& covariance() const { return covariance_; }
  StreamLabel label() const { return label_; }
  Eigen::Index dim() const { return covariance_.rows(); }
  bool is_zero() const { return zero_; }

 private:
  Matrix covariance_;
  Matrix factor_;
  StreamLabel label_;
  bool zero_ = true;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Scalar Gaussian source used for per-neuron voltage noise.
class ScalarNoise {
 public:
  ScalarNoise(double stddev, std::uint64_t seed, StreamLabel label);

  // Fills `out` with independent N(0, stddev^2) samples.
  void fill(Eigen::Ref<Vector> out);
  double stddev() const { return stddev_; }

 private:
  double stddev_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace scnctl
