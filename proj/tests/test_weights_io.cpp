#include <filesystem>

#include "doctest.h"
#include "scnctl/riccati.hpp"
#include "scnctl/weights_io.hpp"
#include "support.hpp"

using namespace scnctl;
using scnctl::testing::Gen;
using scnctl::testing::smd_system;

namespace {

void check_same(const ScnWeights& a, const ScnWeights& b) {
  CHECK(a.mode == b.mode);
  CHECK(a.lambda == b.lambda);
  CHECK(a.D_x.values == b.D_x.values);
  CHECK(a.D_x.column_norm == b.D_x.column_norm);
  REQUIRE(a.D_z.has_value() == b.D_z.has_value());
  if (a.D_z) CHECK(a.D_z->values == b.D_z->values);
  CHECK(a.Omega_f_x == b.Omega_f_x);
  CHECK(a.Omega_f_z == b.Omega_f_z);
  CHECK(a.Omega_s == b.Omega_s);
  CHECK(a.Omega_k == b.Omega_k);
  CHECK(a.Omega_c == b.Omega_c);
  CHECK(a.Omega_z == b.Omega_z);
  CHECK(a.F_x == b.F_x);
  CHECK(a.F_k == b.F_k);
  CHECK(a.F_i == b.F_i);
  CHECK(a.F_z == b.F_z);
  CHECK(a.D_u == b.D_u);
  CHECK(a.T == b.T);
}

}  // namespace

TEST_CASE("weights survive a JSON round trip bit for bit") {
  Gen gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const SmdParams p{gen.uniform(1, 20), gen.uniform(1, 10), gen.uniform(0.5, 3)};
    const LinearSystem sys = smd_system(p, gen.uniform(1e-4, 1e-1));
    const Matrix Kf = kalman_gain(sys.A, sys.C, sys.Sigma_d, sys.Sigma_n);
    Matrix Q = Matrix::Zero(2, 2);
    Q.diagonal() << 10, 1;
    const Matrix Kc = lqr_gain(sys.A, sys.B, LqrCost{Q, Matrix::Constant(1, 1, 1e-2)});
    const int n = gen.integer(1, 40);
    const double lambda = gen.uniform(0, 2);
    const DecoderMatrix Dx = sample_decoder(2, n, gen.uniform(0.01, 1), trial);
    const DecoderMatrix Dz = sample_decoder(2, n, gen.uniform(0.01, 1), trial + 100);
    for (const ScnWeights& w :
         {build_autoencoder(Dx, lambda), build_dynamics_network(sys.A, Dx, lambda),
          build_estimator(sys, Kf, Dx, lambda),
          build_controller(sys, Kf, Kc, Dx, Dz, lambda)}) {
      check_same(w, weights_from_json(weights_to_json(w)));
      check_same(w, weights_from_json(weights_to_json(w, -1)));
    }
  }
}

TEST_CASE("weights files round trip through disk") {
  const LinearSystem sys = smd_system({3, 5, 0.5}, 1e-3);
  const ScnWeights w = build_estimator(sys, kalman_gain(sys.A, sys.C, sys.Sigma_d, sys.Sigma_n),
                                       sample_decoder(2, 20, 0.1, 1), 0.1);
  const auto path = std::filesystem::temp_directory_path() / "scnctl_weights_io_test.json";
  export_weights(w, path);
  check_same(w, import_weights(path));
  std::filesystem::remove(path);
  CHECK_THROWS(import_weights(path));
}

TEST_CASE("malformed weights documents are rejected") {
  CHECK_THROWS_AS(weights_from_json("not json"), std::invalid_argument);
  CHECK_THROWS_AS(weights_from_json(R"({"format": "other", "version": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(weights_from_json(R"({"format": "scn-weights", "version": 2})"),
                  std::invalid_argument);
  const ScnWeights w = build_autoencoder(sample_decoder(2, 3, 0.1, 1), 0.1);
  std::string text = weights_to_json(w, -1);
  const auto pos = text.find("\"rows\":2");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"rows\":5");
  CHECK_THROWS_AS(weights_from_json(text), std::invalid_argument);
}
