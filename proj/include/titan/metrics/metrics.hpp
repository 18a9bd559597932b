#pragma once

#include <cstddef>
#include <span>

#include "titan/data/types.hpp"

namespace titan::metrics {

// Localization metrics work in pixels on the original image size: centers are
// denormalized by (image_w, image_h) before measuring.

// Mean Euclidean center distance over the series.  Throws on length mismatch
// or empty input.
double ade(std::span<const data::BBox> pred, std::span<const data::BBox> truth,
           double image_w = data::kImageWidth, double image_h = data::kImageHeight);

// Euclidean center distance at the final step.
double fde(std::span<const data::BBox> pred, std::span<const data::BBox> truth,
           double image_w = data::kImageWidth, double image_h = data::kImageHeight);

// Intersection over union of the final boxes (corner form); 0 when the union
// has zero area.  Scale-free: computed on normalized boxes directly.
double fiou(const data::BBox& pred, const data::BBox& truth);

struct EgoRmse {
  double alpha = 0.0;
  double omega = 0.0;
};

// Per-channel RMSE over one future series.  Throws on length mismatch.
EgoRmse ego_rmse(std::span<const data::EgoState> pred,
                 std::span<const data::EgoState> truth);

// Squared-error accumulator so RMSE aggregates over all steps of all windows.
struct EgoRmseAccum {
  double se_alpha = 0.0;
  double se_omega = 0.0;
  std::size_t count = 0;

  void add(std::span<const data::EgoState> pred,
           std::span<const data::EgoState> truth);
  EgoRmse value() const;
};

}  // namespace titan::metrics
