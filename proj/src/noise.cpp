#include "scnctl/noise.hpp"

#include <sstream>

namespace scnctl {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

std::string_view to_string(StreamLabel label) {
  switch (label) {
    case StreamLabel::kDisturbance:
      return "disturbance";
    case StreamLabel::kSensor:
      return "sensor";
    case StreamLabel::kVoltage:
      return "voltage";
    case StreamLabel::kDecoder:
      return "decoder";
    case StreamLabel::kDecoderZ:
      return "decoder_z";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master_seed, StreamLabel label) {
  return splitmix64(splitmix64(master_seed) ^
                    splitmix64(static_cast<std::uint64_t>(label)));
}

NoiseSource::NoiseSource(const Matrix& covariance, std::uint64_t seed,
                         StreamLabel label)
    : covariance_(covariance), label_(label), engine_(seed) {
  if (covariance.rows() != covariance.cols()) {
    throw DimensionError("noise covariance must be square, got " +
                         shape_str(covariance));
  }
  if ((covariance - covariance.transpose()).norm() >
      1e-12 * std::max(1.0, covariance.norm())) {
    throw std::invalid_argument("noise covariance must be symmetric");
  }
  const Eigen::Index n = covariance.rows();
  factor_ = Matrix::Zero(n, n);
  if (n == 0 || covariance.isZero(0.0)) {
    zero_ = true;
    return;
  }
  zero_ = false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      0.5 * (covariance + covariance.transpose()));
  const Vector& evals = eig.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals.minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument(
        "noise covariance must be positive semidefinite");
  }
  factor_ = eig.eigenvectors() *
            evals.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Vector NoiseSource::sample() { return sample_scaled(1.0); }

Vector NoiseSource::sample_scaled(double scale) {
  const Eigen::Index n = covariance_.rows();
  Vector xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = normal_(engine_);
  if (zero_) return Vector::Zero(n);
  return std::sqrt(scale) * (factor_ * xi);
}

ScalarNoise::ScalarNoise(double stddev, std::uint64_t seed, StreamLabel label)
    : stddev_(stddev), engine_(seed) {
  (void)label;
  if (stddev < 0.0) throw std::invalid_argument("noise stddev must be >= 0");
}

void ScalarNoise::fill(Eigen::Ref<Vector> out) {
  if (stddev_ == 0.0) {
    out.setZero();
    return;
  }
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = stddev_ * normal_(engine_);
  }
}

}  // namespace scnctl
