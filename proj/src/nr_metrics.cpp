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

#include "twostepqa/nr_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "parallel.hpp"
#include "twostepqa/digest.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/image_io.hpp"
#include "twostepqa/kernels.hpp"

namespace twostepqa::nr {

namespace {

// Shape grid and the GGD moment ratio G(1/s)G(3/s)/G(2/s)^2 at each point.
struct ShapeGrid {
  std::vector<double> shape;
  std::vector<double> ggd_ratio;
  std::vector<double> aggd_ratio;  // reciprocal of ggd_ratio

  ShapeGrid() {
    const auto n = static_cast<std::size_t>(
        std::llround((kShapeGridMax - kShapeGridMin) / kShapeGridStep)) + 1;
    shape.resize(n);
    ggd_ratio.resize(n);
    aggd_ratio.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = kShapeGridMin + static_cast<double>(i) * kShapeGridStep;
      const double log_r =
          std::lgamma(1.0 / s) + std::lgamma(3.0 / s) - 2.0 * std::lgamma(2.0 / s);
      shape[i] = s;
      ggd_ratio[i] = std::exp(log_r);
      aggd_ratio[i] = std::exp(-log_r);
    }
  }
};

const ShapeGrid& shape_grid() {
  static const ShapeGrid grid;
  return grid;
}

std::size_t argmin_distance(const std::vector<double>& table, double target) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double d = std::abs(table[i] - target);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void require_samples(std::span<const double> samples, const char* what) {
  if (samples.size() < kMinFitSamples) {
    throw Error(Errc::degenerate_input, std::string(what) + " needs at least " +
                                            std::to_string(kMinFitSamples) + " samples, got " +
                                            std::to_string(samples.size()));
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, std::string(what) + ": non-finite sample");
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw Error(Errc::parse_error, "bad number in model file: '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

MscnField mscn(const LumaImage& img) {
  if (img.width() < 15 || img.height() < 15) {
    throw Error(Errc::image_too_small, "MSCN needs at least 15x15 pixels");
  }
  // MSCN is invariant to a constant offset; shifting by one sample makes
  // flat regions cancel exactly instead of leaving rounding residue.
  const double offset = img(0, 0);
  std::vector<double> shifted(img.pixels().begin(), img.pixels().end());
  for (double& v : shifted) v -= offset;
  const LumaImage centred(img.width(), img.height(), std::move(shifted));
  auto moments =
      kernels::local_moments(centred, kernels::niqe_window(), kernels::Border::reflect);
  MscnField field;
  std::vector<double> coeffs(img.size());
  const auto px = centred.pixels();
  const auto mu = moments.mu.pixels();
  const auto sigma = moments.sigma.pixels();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    coeffs[i] = (px[i] - mu[i]) / (sigma[i] + field.stabilizer);
  }
  field.coefficients = LumaImage(img.width(), img.height(), std::move(coeffs));
  field.sigma = std::move(moments.sigma);
  return field;
}

GgdFit fit_ggd(std::span<const double> samples) {
  require_samples(samples, "GGD fit");
  if (std::all_of(samples.begin(), samples.end(),
                  [&](double v) { return v == samples.front(); })) {
    throw Error(Errc::degenerate_input, "GGD fit: all samples identical");
  }
  double sum_sq = 0;
  double sum_abs = 0;
  for (double v : samples) {
    sum_sq += v * v;
    sum_abs += std::abs(v);
  }
  const auto n = static_cast<double>(samples.size());
  const double second = sum_sq / n;
  const double first_abs = sum_abs / n;
  const double rho = second / (first_abs * first_abs);
  const auto& grid = shape_grid();
  return {grid.shape[argmin_distance(grid.ggd_ratio, rho)], second};
}

AggdFit fit_aggd(std::span<const double> samples) {
  require_samples(samples, "AGGD fit");
  double left_sq = 0, right_sq = 0, sum_abs = 0, sum_sq = 0;
  std::size_t left_n = 0, right_n = 0;
  for (double v : samples) {
    if (v < 0) {
      left_sq += v * v;
      ++left_n;
    } else if (v > 0) {
      right_sq += v * v;
      ++right_n;
    }
    sum_abs += std::abs(v);
    sum_sq += v * v;
  }
  if (left_n == 0 || right_n == 0) {
    throw Error(Errc::degenerate_input, "AGGD fit: samples lie on one side of zero");
  }
  const auto n = static_cast<double>(samples.size());
  const double left_std = std::sqrt(left_sq / static_cast<double>(left_n));
  const double right_std = std::sqrt(right_sq / static_cast<double>(right_n));
  const double gamma_hat = left_std / right_std;
  const double mean_abs = sum_abs / n;
  const double r_hat = mean_abs * mean_abs / (sum_sq / n);
  const double g2 = gamma_hat * gamma_hat;
  const double r_hat_norm =
      r_hat * (g2 * gamma_hat + 1) * (gamma_hat + 1) / ((g2 + 1) * (g2 + 1));

  const auto& grid = shape_grid();
  const double shape = grid.shape[argmin_distance(grid.aggd_ratio, r_hat_norm)];
  const double scale_factor = std::sqrt(std::exp(std::lgamma(1.0 / shape) - std::lgamma(3.0 / shape)));
  AggdFit fit;
  fit.shape = shape;
  fit.left_scale = left_std * scale_factor;
  fit.right_scale = right_std * scale_factor;
  fit.mean_param = (fit.right_scale - fit.left_scale) *
                   std::exp(std::lgamma(2.0 / shape) - std::lgamma(1.0 / shape));
  return fit;
}

void NiqeParams::validate() const {
  if (patch_size < 24 || patch_size % 2 != 0) {
    throw Error(Errc::invalid_argument, "patch size must be even and at least 24");
  }
  if (!(sharpness_fraction > 0.0) || sharpness_fraction > 1.0) {
    throw Error(Errc::invalid_argument, "sharpness fraction must lie in (0, 1]");
  }
}

std::array<double, kFeaturesPerScale> patch_features(const LumaImage& patch) {
  std::array<double, kFeaturesPerScale> out{};
  const auto ggd = fit_ggd(patch.pixels());
  out[0] = ggd.shape;
  out[1] = ggd.variance;

  const std::size_t w = patch.width();
  const std::size_t h = patch.height();
  // (dx, dy): horizontal, vertical, main diagonal, anti-diagonal.
  constexpr std::array<std::array<int, 2>, 4> kShifts{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};
  std::vector<double> products;
  products.reserve(w * h);
  std::size_t k = 2;
  for (const auto& [dx, dy] : kShifts) {
    products.clear();
    const std::size_t x_begin = dx < 0 ? 1 : 0;
    const std::size_t x_end = dx > 0 ? w - 1 : w;
    for (std::size_t y = 0; y + static_cast<std::size_t>(dy) < h; ++y) {
      for (std::size_t x = x_begin; x < x_end; ++x) {
        const std::size_t nx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + dx);
        products.push_back(patch(x, y) * patch(nx, y + static_cast<std::size_t>(dy)));
      }
    }
    const auto fit = fit_aggd(products);
    out[k++] = fit.shape;
    out[k++] = fit.mean_param;
    out[k++] = fit.left_scale;
    out[k++] = fit.right_scale;
  }
  return out;
}

std::vector<double> block_sharpness(const LumaImage& sigma, std::size_t patch_size) {
  if (patch_size == 0) throw Error(Errc::invalid_argument, "patch size must be positive");
  const std::size_t tx = sigma.width() / patch_size;
  const std::size_t ty = sigma.height() / patch_size;
  std::vector<double> sharp(tx * ty, 0.0);
  for (std::size_t by = 0; by < ty; ++by) {
    for (std::size_t y = by * patch_size; y < (by + 1) * patch_size; ++y) {
      const auto r = sigma.row(y);
      for (std::size_t bx = 0; bx < tx; ++bx) {
        const auto seg = r.subspan(bx * patch_size, patch_size);
        sharp[by * tx + bx] += std::accumulate(seg.begin(), seg.end(), 0.0);
      }
    }
  }
  const auto area = static_cast<double>(patch_size * patch_size);
  for (double& s : sharp) s /= area;
  return sharp;
}

PatchFeatures niqe_features(const LumaImage& img, const NiqeParams& params,
                            PatchSelection selection) {
  params.validate();
  const std::size_t p = params.patch_size;
  if (img.width() < 2 * p || img.height() < 2 * p) {
    throw Error(Errc::image_too_small,
                "NIQE needs at least " + std::to_string(2 * p) + "x" + std::to_string(2 * p) +
                    " pixels, got " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()));
  }
  PatchFeatures out;
  out.tiles_x = img.width() / p;
  out.tiles_y = img.height() / p;
  const LumaImage full = img.crop(0, 0, out.tiles_x * p, out.tiles_y * p);
  const MscnField fine = mscn(full);
  const MscnField coarse = mscn(kernels::downsample_dyadic(full));

  const auto sharp = block_sharpness(fine.sigma, p);
  const double max_sharp = *std::max_element(sharp.begin(), sharp.end());
  const double threshold =
      selection == PatchSelection::sharpest ? params.sharpness_fraction * max_sharp : 0.0;
  const std::size_t half = p / 2;

  for (std::size_t t = 0; t < sharp.size(); ++t) {
    if (!(sharp[t] > 0) || sharp[t] < threshold) continue;
    const std::size_t bx = t % out.tiles_x;
    const std::size_t by = t / out.tiles_x;
    FeatureVector fv{};
    try {
      const auto f1 = patch_features(fine.coefficients.crop(bx * p, by * p, p, p));
      const auto f2 = patch_features(coarse.coefficients.crop(bx * half, by * half, half, half));
      std::copy(f1.begin(), f1.end(), fv.begin());
      std::copy(f2.begin(), f2.end(), fv.begin() + kFeaturesPerScale);
    } catch (const Error& e) {
      if (e.code() == Errc::degenerate_input) continue;
      throw;
    }
    if (!std::all_of(fv.begin(), fv.end(), [](double v) { return std::isfinite(v); })) continue;
    out.features.push_back(fv);
    out.tile_indices.push_back(t);
  }
  if (out.features.empty()) {
    throw Error(Errc::no_patches, "no patch survived sharpness selection");
  }
  return out;
}

NiqeModel fit_mvg(std::span<const FeatureVector> features, const NiqeParams& params) {
  if (features.empty()) throw Error(Errc::no_patches, "cannot fit a Gaussian to zero patches");
  const auto n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kFeatureDim));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kFeatureDim); ++j) {
      x(i, j) = features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  NiqeModel model;
  model.params = params;
  model.mean = x.colwise().mean().transpose();
  if (n > 1) {
    const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
    model.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
  }
  return model;
}

namespace {

NiqeModel train_from_loader(std::size_t count, const NiqeParams& params,
                            TrainingSummary* summary, unsigned threads,
                            const std::function<LumaImage(std::size_t)>& load,
                            const std::function<std::string(std::size_t)>& name) {
  params.validate();
  if (count < kMinCorpusImages) {
    throw Error(Errc::corpus_too_small,
                "pristine corpus needs at least " + std::to_string(kMinCorpusImages) +
                    " images, got " + std::to_string(count));
  }
  std::vector<std::optional<std::vector<FeatureVector>>> per_image(count);
  std::vector<std::string> reasons(count);
  detail::parallel_for(count, threads, [&](std::size_t i) {
    try {
      per_image[i] = niqe_features(load(i), params).features;
    } catch (const Error& e) {
      reasons[i] = e.what();
    }
  });

  TrainingSummary local;
  std::vector<FeatureVector> pooled;
  for (std::size_t i = 0; i < count; ++i) {
    if (per_image[i]) {
      ++local.images_used;
      pooled.insert(pooled.end(), per_image[i]->begin(), per_image[i]->end());
    } else {
      local.skipped.push_back(name(i) + ": " + reasons[i]);
    }
  }
  local.patches = pooled.size();
  if (summary) *summary = local;
  if (local.images_used < kMinCorpusImages) {
    throw Error(Errc::corpus_too_small,
                "only " + std::to_string(local.images_used) + " usable images (minimum " +
                    std::to_string(kMinCorpusImages) + ", " +
                    std::to_string(local.skipped.size()) + " skipped)");
  }
  return fit_mvg(pooled, params);
}

}  // namespace

NiqeModel train_pristine(std::span<const std::filesystem::path> corpus, const NiqeParams& params,
                         TrainingSummary* summary, unsigned threads) {
  return train_from_loader(
      corpus.size(), params, summary, threads,
      [&](std::size_t i) { return io::decode_to_luma(corpus[i]); },
      [&](std::size_t i) { return corpus[i].string(); });
}

NiqeModel train_pristine(std::span<const LumaImage> corpus, const NiqeParams& params,
                         TrainingSummary* summary, unsigned threads) {
  return train_from_loader(
      corpus.size(), params, summary, threads, [&](std::size_t i) { return corpus[i]; },
      [](std::size_t i) { return "image #" + std::to_string(i); });
}

Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::singular_system, "eigendecomposition failed");
  }
  const auto& values = eig.eigenvalues();
  const double max_abs = values.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * max_abs;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > tol) inv(i) = 1.0 / values(i);
  }
  const auto& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

double niqe_distance(const NiqeModel& pristine, const NiqeModel& observed) {
  const Eigen::VectorXd d = pristine.mean - observed.mean;
  const Eigen::MatrixXd pooled = 0.5 * (pristine.covariance + observed.covariance);
  const double q = d.dot(pinv_symmetric(pooled) * d);
  const double score = std::sqrt(std::max(0.0, q));
  if (!std::isfinite(score)) throw Error(Errc::non_finite, "NIQE score is not finite");
  return score;
}

double niqe_score(const LumaImage& img, const NiqeModel& model) {
  const auto feats = niqe_features(img, model.params, PatchSelection::all);
  return niqe_distance(model, fit_mvg(feats.features, model.params));
}

// ------------------------------------------------------------ model file

namespace {
constexpr std::string_view kModelMagic = "twostepqa-niqe-model";
constexpr int kModelVersion = 1;
}  // namespace

std::string serialize_model(const NiqeModel& model) {
  std::ostringstream body;
  body << kModelMagic << ' ' << kModelVersion << '\n';
  body << "patch_size " << model.params.patch_size << '\n';
  body << "sharpness_fraction " << format_double(model.params.sharpness_fraction) << '\n';
  body << "feature_dim " << kFeatureDim << '\n';
  body << "mean";
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) body << ' ' << format_double(model.mean(i));
  body << "\ncovariance\n";
  for (Eigen::Index r = 0; r < model.covariance.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.covariance.cols(); ++c) {
      if (c) body << ' ';
      body << format_double(model.covariance(r, c));
    }
    body << '\n';
  }
  std::string text = body.str();
  text += "sha256 " + sha256_hex(text) + "\n";
  return text;
}

NiqeModel parse_model(const std::string& text) {
  const auto sum_at = text.rfind("sha256 ");
  if (sum_at == std::string::npos || (sum_at != 0 && text[sum_at - 1] != '\n')) {
    throw Error(Errc::parse_error, "model file has no checksum line");
  }
  std::string stored = text.substr(sum_at + 7);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != sha256_hex(std::string_view(text).substr(0, sum_at))) {
    throw Error(Errc::parse_error, "model file checksum mismatch");
  }

  std::istringstream in(text.substr(0, sum_at));
  std::string token;
  auto expect = [&](std::string_view key) {
    if (!(in >> token) || token != key) {
      throw Error(Errc::parse_error, "model file: expected '" + std::string(key) + "'");
    }
  };
  auto next_number = [&] {
    if (!(in >> token)) throw Error(Errc::parse_error, "model file truncated");
    return parse_double(token);
  };

  expect(kModelMagic);
  int version = 0;
  if (!(in >> version) || version != kModelVersion) {
    throw Error(Errc::parse_error, "unsupported model file version");
  }
  NiqeModel model;
  expect("patch_size");
  model.params.patch_size = static_cast<std::size_t>(next_number());
  expect("sharpness_fraction");
  model.params.sharpness_fraction = next_number();
  expect("feature_dim");
  if (next_number() != static_cast<double>(kFeatureDim)) {
    throw Error(Errc::parse_error, "model feature dimension must be 36");
  }
  expect("mean");
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) model.mean(i) = next_number();
  expect("covariance");
  for (Eigen::Index r = 0; r < model.covariance.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.covariance.cols(); ++c) model.covariance(r, c) = next_number();
  }
  if (in >> token) throw Error(Errc::parse_error, "trailing data in model file");
  model.params.validate();
  return model;
}

void save_model(const NiqeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write model " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(Errc::io_failure, "write failed: " + path.string());
}

NiqeModel load_model(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return parse_model(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace twostepqa::nr
