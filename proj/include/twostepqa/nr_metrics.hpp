// Copyright 2026 The twostepqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "twostepqa/image.hpp"

namespace twostepqa::nr {

/// Mean-subtracted contrast-normalized coefficients (I - mu) / (sigma + C).
struct MscnField {
  LumaImage coefficients;
  LumaImage sigma;  ///< local deviation field, reused for patch sharpness
  double stabilizer = 1.0;
};

/// Normalizes with the 7-tap sigma 7/6 window and reflected borders.
/// Requires at least 15x15 pixels.
MscnField mscn(const LumaImage& img);

struct GgdFit {
  double shape = 0;
  double variance = 0;
};

struct AggdFit {
  double shape = 0;
  double left_scale = 0;
  double right_scale = 0;
  double mean_param = 0;
};

inline constexpr double kShapeGridMin = 0.2;
inline constexpr double kShapeGridMax = 10.0;
inline constexpr double kShapeGridStep = 0.001;
inline constexpr std::size_t kMinFitSamples = 100;

/// Moment-matching GGD estimate. The shape is the grid point in
/// [0.2, 10] (step 0.001) whose ratio G(1/s)G(3/s)/G(2/s)^2 is closest to
/// E[x^2] / E[|x|]^2; the variance is the raw second moment.
GgdFit fit_ggd(std::span<const double> samples);

/// Asymmetric GGD estimate from one-sided second moments. Needs samples on
/// both sides of zero.
AggdFit fit_aggd(std::span<const double> samples);

inline constexpr std::size_t kFeaturesPerScale = 18;
inline constexpr std::size_t kFeatureDim = 36;
using FeatureVector = std::array<double, kFeatureDim>;

struct NiqeParams {
  std::size_t patch_size = 96;
  double sharpness_fraction = 0.75;

  void validate() const;
};

/// The 18 per-scale statistics of one MSCN patch: GGD shape and variance,
/// then (shape, mean, left scale, right scale) of the AGGD fitted to
/// horizontal, vertical, main-diagonal and anti-diagonal neighbour
/// products.
std::array<double, kFeaturesPerScale> patch_features(const LumaImage& mscn_patch);

/// Mean of the sigma field over each patch_size tile anchored at (0, 0),
/// row-major over tiles. Partial trailing tiles are dropped.
std::vector<double> block_sharpness(const LumaImage& sigma,
                                    std::size_t patch_size);

struct PatchFeatures {
  std::vector<FeatureVector> features;
  std::vector<std::size_t> tile_indices;  ///< row-major tile index per row
  std::size_t tiles_x = 0;
  std::size_t tiles_y = 0;
};

enum class PatchSelection {
  /// Tiles whose sharpness is at least sharpness_fraction * max; training.
  sharpest,
  /// Every tile with nonzero sharpness; scoring.
  all,
};

/// Per-patch 36-dimensional features. Tiles are selected on the full-scale
/// sharpness map and the same tiles are reused at half scale. Tiles whose
/// statistics are degenerate (e.g. one-signed neighbour products) are
/// dropped.
PatchFeatures niqe_features(const LumaImage& img, const NiqeParams& params = {},
                            PatchSelection selection = PatchSelection::sharpest);

/// Multivariate Gaussian prior over patch features.
struct NiqeModel {
  NiqeParams params;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kFeatureDim);
  Eigen::MatrixXd covariance = Eigen::MatrixXd::Zero(kFeatureDim, kFeatureDim);
};

/// Sample mean and (n-1) covariance of the rows. A single row yields a zero
/// covariance.
NiqeModel fit_mvg(std::span<const FeatureVector> features,
                  const NiqeParams& params = {});

inline constexpr std::size_t kMinCorpusImages = 25;

struct TrainingSummary {
  std::size_t images_used = 0;
  std::size_t patches = 0;
  std::vector<std::string> skipped;  ///< "<name>: <reason>"
};

/// Pools the selected-patch features of every image. Images that yield no
/// patch are skipped and listed in the summary; fewer than 25 usable images
/// is an error. Feature extraction runs on up to `threads` workers; pooling
/// keeps corpus order, so results are deterministic.
NiqeModel train_pristine(std::span<const std::filesystem::path> corpus,
                         const NiqeParams& params = {},
                         TrainingSummary* summary = nullptr,
                         unsigned threads = 1);
NiqeModel train_pristine(std::span<const LumaImage> corpus,
                         const NiqeParams& params = {},
                         TrainingSummary* summary = nullptr,
                         unsigned threads = 1);

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// 1e-10 * max |eigenvalue| are treated as zero.
Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& m);

/// Distance between the model and the image's own feature Gaussian,
/// sqrt(d' ((S1 + S2) / 2)^+ d). Lower is better. The image Gaussian is
/// fitted to all of its tiles; sharpness selection applies to training only.
double niqe_distance(const NiqeModel& pristine, const NiqeModel& observed);
double niqe_score(const LumaImage& img, const NiqeModel& model);

// Model file (text, versioned):
//
//   twostepqa-niqe-model 1
//   patch_size <n>
//   sharpness_fraction <x>
//   feature_dim 36
//   mean <36 values>
//   covariance
//   <36 lines of 36 values>
//   sha256 <hex digest of every byte above this line>
//
// Values are written with 17 significant digits and round-trip exactly.
std::string serialize_model(const NiqeModel& model);
NiqeModel parse_model(const std::string& text);
void save_model(const NiqeModel& model, const std::filesystem::path& path);
NiqeModel load_model(const std::filesystem::path& path);

}  // namespace twostepqa::nr
