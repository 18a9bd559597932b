#include "titan/models/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace titan::models {

std::vector<data::BBox> const_vel_boxes(std::span<const data::BBox> observed,
                                        int horizon, bool scale_dims) {
  if (observed.size() < 2)
    throw std::invalid_argument("const_vel_boxes: needs at least two observations");
  if (horizon < 0) throw std::invalid_argument("const_vel_boxes: negative horizon");
  const data::BBox& prev = observed[observed.size() - 2];
  const data::BBox& last = observed.back();
  const double du = last.c_u - prev.c_u;
  const double dv = last.c_v - prev.c_v;
  const double dl_u = last.l_u - prev.l_u;
  const double dl_v = last.l_v - prev.l_v;
  std::vector<data::BBox> out;
  out.reserve(static_cast<size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    data::BBox b;
    b.c_u = last.c_u + (k + 1) * du;
    b.c_v = last.c_v + (k + 1) * dv;
    b.l_u = scale_dims ? std::max(0.0, last.l_u + (k + 1) * dl_u) : last.l_u;
    b.l_v = scale_dims ? std::max(0.0, last.l_v + (k + 1) * dl_v) : last.l_v;
    out.push_back(b);
  }
  return out;
}

std::vector<data::EgoState> const_acc_ego(std::span<const data::EgoState> history,
                                          int horizon) {
  if (history.size() < 2)
    throw std::invalid_argument("const_acc_ego: needs at least two steps");
  if (horizon < 0) throw std::invalid_argument("const_acc_ego: negative horizon");
  const data::EgoState& prev = history[history.size() - 2];
  const data::EgoState& last = history.back();
  const double da = last.alpha - prev.alpha;
  const double dw = last.omega - prev.omega;
  std::vector<data::EgoState> out;
  out.reserve(static_cast<size_t>(horizon));
  for (int k = 0; k < horizon; ++k)
    out.push_back({last.alpha + (k + 1) * da, last.omega + (k + 1) * dw});
  return out;
}

std::vector<data::EgoState> const_vel_ego(std::span<const data::EgoState> history,
                                          int horizon) {
  if (history.empty())
    throw std::invalid_argument("const_vel_ego: needs at least one step");
  if (horizon < 0) throw std::invalid_argument("const_vel_ego: negative horizon");
  return std::vector<data::EgoState>(static_cast<size_t>(horizon), history.back());
}

}  // namespace titan::models
