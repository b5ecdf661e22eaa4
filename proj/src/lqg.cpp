#include "scnctl/lqg.hpp"

namespace scnctl {

namespace {

void check_dims(const LinearSystem& model, const Matrix& K_f,
                const LqgState& st, const Vector& y) {
  const Eigen::Index k = model.state_dim();
  if (st.x_hat.size() != k) throw DimensionError("lqg: x_hat dimension");
  if (K_f.rows() != k || K_f.cols() != model.obs_dim()) {
    throw DimensionError("lqg: K_f must be " + std::to_string(k) + "x" +
                         std::to_string(model.obs_dim()) + ", got " +
                         shape_str(K_f));
  }
  if (y.size() != model.obs_dim()) throw DimensionError("lqg: y dimension");
}

}  // namespace

LqgState estimator_step(const LinearSystem& model, const Matrix& K_f,
                        const LqgState& st, const Vector& y,
                        const Vector& u_ext, double dt) {
  check_dims(model, K_f, st, y);
  if (u_ext.size() != model.input_dim()) {
    throw DimensionError("estimator_step: u dimension");
  }
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  LqgState next;
  next.u = u_ext;
  next.x_hat = st.x_hat + dt * (model.A * st.x_hat + model.B * u_ext +
                                K_f * (model.C * st.x_hat - y));
  return next;
}

LqgState lqg_step(const LinearSystem& model, const Matrix& K_f,
                  const Matrix& K_c, const LqgState& st, const Vector& y,
                  const Vector& z, double dt) {
  if (K_c.rows() != model.input_dim() || K_c.cols() != model.state_dim()) {
    throw DimensionError("lqg_step: K_c must be P x K, got " + shape_str(K_c));
  }
  if (z.size() != model.state_dim()) throw DimensionError("lqg_step: z dimension");
  check_dims(model, K_f, st, y);
  const Vector u = -K_c * (st.x_hat - z);
  return estimator_step(model, K_f, st, y, u, dt);
}

Vector lqg_steady_state(const LinearSystem& model, const Matrix& K_c,
                        const Vector& z) {
  const Matrix Acl = model.A - model.B * K_c;
  return Acl.fullPivLu().solve(-model.B * K_c * z);
}

}  // namespace scnctl
