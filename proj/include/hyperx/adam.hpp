#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"

namespace hyperx {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // added to the gradient as weight_decay * param
};

/// First and second moment estimates, one pair per parameter tensor.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

/// One bias-corrected Adam update of every parameter in place.
inline void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state,
                      const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw Error(ErrorKind::shape_mismatch, "one gradient per parameter");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw Error(ErrorKind::shape_mismatch, "optimizer state size mismatch");

  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    // An empty gradient means no gradient reached the parameter.
    Matrix g = grads[k].size() == 0 ? Matrix::Zero(p.rows(), p.cols()) : grads[k];
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw Error(ErrorKind::shape_mismatch, "gradient shape differs from parameter");
    if (cfg.weight_decay != 0.0) g += cfg.weight_decay * p;
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const auto m_hat = state.m[k].array() / c1;
    const auto v_hat = state.v[k].array() / c2;
    p.array() -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
  }
}

}  // namespace hyperx
