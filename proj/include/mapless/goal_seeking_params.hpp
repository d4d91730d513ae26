#ifndef MAPLESS_GOAL_SEEKING_PARAMS_HPP
#define MAPLESS_GOAL_SEEKING_PARAMS_HPP

#include <cstdlib>

#include "policy_net.hpp"

namespace mapless {

/// Hand-constructed weights that always take the king move pointing at the
/// goal and ignore obstacles. On an empty ground this policy is optimal, so
/// it serves as a reference policy for evaluation and mission tests.
///
/// Construction (default architecture only):
///  - conv1 filters 0..7 copy one plane (agent or goal) at one stride-2 phase,
///    conv2 filters 0..31 copy one conv1 filter at one phase, so every agent
///    or goal cell with row, col <= 93 lights exactly one flattened unit whose
///    index encodes its position;
///  - hidden units 0..7 compute clamp(+-dx, 0, 1) and clamp(+-drow, 0, 1) as
///    differences of ReLU ramps of the goal-minus-agent offset;
///  - the actor scores each move by agreement with those signs, scaled by
///    `sharpness`.
template <typename Scalar>
NetworkParams<Scalar> goal_seeking_params(double sharpness = 20.0) {
  const Architecture arch;  // default sizes
  auto p = NetworkParams<Scalar>::zeros(arch);
  const int k1 = arch.conv1_kernel, f1 = arch.conv1_filters, f2 = arch.conv2_filters, c2 = arch.conv2_out();
  const int H = arch.hidden, A = arch.actions;

  // conv1: filter = which * 4 + py * 2 + px, reading plane (agent, goal)[which] at tap (py, px)
  const int planes[2] = {kAgentPlane, kGoalPlane};
  for (int which = 0; which < 2; ++which)
    for (int py = 0; py < 2; ++py)
      for (int px = 0; px < 2; ++px) {
        const int f = which * 4 + py * 2 + px;
        p[kConv1W].data[static_cast<std::size_t>(((planes[which] * k1 + py) * k1 + px) * f1 + f)] = Scalar(1);
      }

  // conv2: filter g = which * 16 + (py * 2 + px) * 4 + qy * 2 + qx
  const int k2 = arch.conv2_kernel;
  for (int which = 0; which < 2; ++which)
    for (int phase1 = 0; phase1 < 4; ++phase1)
      for (int qy = 0; qy < 2; ++qy)
        for (int qx = 0; qx < 2; ++qx) {
          const int f = which * 4 + phase1;
          const int g = which * 16 + phase1 * 4 + qy * 2 + qx;
          p[kConv2W].data[static_cast<std::size_t>(((qy * k2 + qx) * f1 + f) * f2 + g)] = Scalar(1);
        }

  // fc: units 0..3 ramp on dcol = goal_col - agent_col, units 4..7 on drow
  auto fc = [&](int input, int unit) -> Scalar& {
    return p[kFcW].data[static_cast<std::size_t>(input) * static_cast<std::size_t>(H) + static_cast<std::size_t>(unit)];
  };
  for (int oy = 0; oy < c2; ++oy)
    for (int ox = 0; ox < c2; ++ox)
      for (int g = 0; g < 32; ++g) {
        const int which = g / 16, phase1 = (g / 4) % 4, phase2 = g % 4;
        const int row = 4 * oy + 2 * (phase2 / 2) + phase1 / 2;
        const int col = 4 * ox + 2 * (phase2 % 2) + phase1 % 2;
        const double sign = which == 1 ? 1.0 : -1.0;
        const int input = (oy * c2 + ox) * f2 + g;
        for (int axis = 0; axis < 2; ++axis) {
          const double coord = sign * (axis == 0 ? col : row);
          fc(input, axis * 4 + 0) = static_cast<Scalar>(coord);
          fc(input, axis * 4 + 1) = static_cast<Scalar>(coord);
          fc(input, axis * 4 + 2) = static_cast<Scalar>(-coord);
          fc(input, axis * 4 + 3) = static_cast<Scalar>(-coord);
        }
      }
  for (int axis = 0; axis < 2; ++axis) {
    p[kFcB].data[static_cast<std::size_t>(axis * 4 + 1)] = Scalar(-1);
    p[kFcB].data[static_cast<std::size_t>(axis * 4 + 3)] = Scalar(-1);
  }

  // actor: score(a) = sum over axes of d_a * s - |d_a| * (1 - |s|), s = pos - neg
  auto actor = [&](int unit, int action) -> Scalar& {
    return p[kActorW].data[static_cast<std::size_t>(unit * A + action)];
  };
  for (int a = 0; a < A; ++a) {
    const CellDelta d = kActionDeltas[static_cast<std::size_t>(a)];
    double bias = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      const int step = axis == 0 ? d.dcol : d.drow;
      const double mag = std::abs(step);
      const double w_pos = sharpness * (step + mag);   // on pos = u0 - u1
      const double w_neg = sharpness * (-step + mag);  // on neg = u2 - u3
      actor(axis * 4 + 0, a) = static_cast<Scalar>(w_pos);
      actor(axis * 4 + 1, a) = static_cast<Scalar>(-w_pos);
      actor(axis * 4 + 2, a) = static_cast<Scalar>(w_neg);
      actor(axis * 4 + 3, a) = static_cast<Scalar>(-w_neg);
      bias -= sharpness * mag;
    }
    p[kActorB].data[static_cast<std::size_t>(a)] = static_cast<Scalar>(bias);
  }
  return p;
}

}  // namespace mapless

#endif  // MAPLESS_GOAL_SEEKING_PARAMS_HPP
