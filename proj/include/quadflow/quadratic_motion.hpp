#pragma once

#include "quadflow/image.hpp"

namespace quadflow {

// Per-pixel constant-acceleration motion fitted from the two flows leaving
// frame 0. Displacement to time t is half_acceleration*t^2 + velocity*t,
// so t=1 reproduces f_{0->1} and t=-1 reproduces f_{0->-1}.
struct QuadraticMotion {
  FlowField velocity;           // (f01 - f0m1) / 2
  FlowField half_acceleration;  // (f01 + f0m1) / 2
};

inline QuadraticMotion fit_quadratic(const FlowField& f01, const FlowField& f0m1) {
  if (!f01.same_size(f0m1))
    throw std::invalid_argument("fit_quadratic: flow dimensions differ");
  QuadraticMotion qm;
  qm.velocity = FlowField(f01.width, f01.height);
  qm.half_acceleration = FlowField(f01.width, f01.height);
  for (size_t i = 0; i < f01.data.size(); ++i) {
    qm.velocity.data[i] = (f01.data[i] - f0m1.data[i]) * 0.5;
    qm.half_acceleration.data[i] = (f01.data[i] + f0m1.data[i]) * 0.5;
  }
  return qm;
}

inline FlowField predict_flow(const QuadraticMotion& qm, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("predict_flow: t not finite");
  FlowField out(qm.velocity.width, qm.velocity.height);
  const double t2 = t * t;
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = qm.half_acceleration.data[i] * t2 + qm.velocity.data[i] * t;
  return out;
}

// Uniform-motion baseline: displacement is simply t * f_{0->1}.
inline FlowField predict_linear(const FlowField& f01, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("predict_linear: t not finite");
  FlowField out(f01.width, f01.height);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = f01.data[i] * t;
  return out;
}

}  // namespace quadflow
