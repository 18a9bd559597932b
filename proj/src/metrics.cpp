#include "titan/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace titan::metrics {

namespace {

double center_dist_px(const data::BBox& a, const data::BBox& b, double w, double h) {
  const double du = (a.c_u - b.c_u) * w;
  const double dv = (a.c_v - b.c_v) * h;
  return std::sqrt(du * du + dv * dv);
}

}  // namespace

double ade(std::span<const data::BBox> pred, std::span<const data::BBox> truth,
           double image_w, double image_h) {
  if (pred.size() != truth.size()) throw std::invalid_argument("ade: length mismatch");
  if (pred.empty()) throw std::invalid_argument("ade: empty series");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i)
    sum += center_dist_px(pred[i], truth[i], image_w, image_h);
  return sum / static_cast<double>(pred.size());
}

double fde(std::span<const data::BBox> pred, std::span<const data::BBox> truth,
           double image_w, double image_h) {
  if (pred.size() != truth.size()) throw std::invalid_argument("fde: length mismatch");
  if (pred.empty()) throw std::invalid_argument("fde: empty series");
  return center_dist_px(pred.back(), truth.back(), image_w, image_h);
}

double fiou(const data::BBox& pred, const data::BBox& truth) {
  const double ax0 = pred.c_u - pred.l_u / 2.0, ax1 = pred.c_u + pred.l_u / 2.0;
  const double ay0 = pred.c_v - pred.l_v / 2.0, ay1 = pred.c_v + pred.l_v / 2.0;
  const double bx0 = truth.c_u - truth.l_u / 2.0, bx1 = truth.c_u + truth.l_u / 2.0;
  const double by0 = truth.c_v - truth.l_v / 2.0, by1 = truth.c_v + truth.l_v / 2.0;

  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  const double uni = pred.l_u * pred.l_v + truth.l_u * truth.l_v - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

EgoRmse ego_rmse(std::span<const data::EgoState> pred,
                 std::span<const data::EgoState> truth) {
  EgoRmseAccum acc;
  acc.add(pred, truth);
  return acc.value();
}

void EgoRmseAccum::add(std::span<const data::EgoState> pred,
                       std::span<const data::EgoState> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("ego_rmse: length mismatch");
  for (size_t i = 0; i < pred.size(); ++i) {
    const double da = pred[i].alpha - truth[i].alpha;
    const double dw = pred[i].omega - truth[i].omega;
    se_alpha += da * da;
    se_omega += dw * dw;
  }
  count += pred.size();
}

EgoRmse EgoRmseAccum::value() const {
  if (count == 0) return {};
  const double n = static_cast<double>(count);
  return {std::sqrt(se_alpha / n), std::sqrt(se_omega / n)};
}

}  // namespace titan::metrics
