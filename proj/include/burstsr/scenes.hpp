#pragma once

#include <cstdint>

#include "burstsr/raster.hpp"

namespace burstsr::scenes {

// Procedural HR test scene: smooth background plus Gaussian blobs, oriented
// gratings, and slanted step edges, normalized into [0.1, 2.1]. Channels get
// correlated content with per-band gains so ROI means carry band signatures.
Raster make_scene(int height, int width, int channels, std::uint64_t seed);

// Ideal step edge along a line slanted `angle_deg` off vertical through the
// image center, optionally blurred by a Gaussian of the given sigma.
Raster make_edge_scene(int height, int width, double angle_deg,
                       double blur_sigma, double lo = 0.2, double hi = 1.8);

// Dense zero-mean field of overlapping Gaussian blobs. Unlike make_scene it
// carries no oriented gratings, so local texture pins motion in both axes
// everywhere -- the right diet for training and judging flow estimators.
Raster make_blob_scene(int height, int width, std::uint64_t seed);

}  // namespace burstsr::scenes
