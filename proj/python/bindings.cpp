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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "twostepqa/cli.hpp"
#include "twostepqa/correlation.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/fr_metrics.hpp"
#include "twostepqa/fusion.hpp"
#include "twostepqa/image_io.hpp"
#include "twostepqa/logistic.hpp"
#include "twostepqa/nr_metrics.hpp"
#include "twostepqa/protocol.hpp"

namespace py = pybind11;
using namespace twostepqa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

LumaImage to_image(const Array& a) {
  if (a.ndim() != 2) throw Error(Errc::invalid_argument, "expected a 2-D luminance array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  std::vector<double> px(a.data(), a.data() + w * h);
  return LumaImage(w, h, std::move(px));
}

Array to_array(const LumaImage& img) {
  Array out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw Error(Errc::invalid_argument, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::dict metric_dict(const eval::MetricResult& m) {
  py::dict d;
  d["median_srocc"] = m.median_srocc;
  d["median_pcc"] = m.median_pcc;
  d["srocc"] = m.srocc_trace;
  d["pcc"] = m.pcc_trace;
  if (!m.beta_trace.empty()) d["beta"] = m.beta_trace;
  return d;
}

cli::DatasetOptions dataset_options(const std::filesystem::path& manifest,
                                    const std::optional<std::filesystem::path>& config,
                                    const std::optional<std::filesystem::path>& model,
                                    bool use_cache, unsigned threads) {
  cli::DatasetOptions d;
  d.manifest = manifest;
  d.config = config;
  d.model = model;
  d.use_cache = use_cache;
  d.threads = threads == 0 ? cli::default_threads() : threads;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-step image quality assessment core";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  m.attr("DEFAULT_ALPHA") = fusion::kDefaultAlpha;
  m.attr("SOURCE_MODEL_PATH") = TWOSTEPQA_SOURCE_MODEL;

  // Images.
  m.def("load_luma", [](const std::filesystem::path& p) { return to_array(io::decode_to_luma(p)); },
        py::arg("path"), "Decode PNG / JPEG / BMP / PGM to a float64 luminance array.");
  m.def("encode_jpeg",
        [](const Array& img, int quality) {
          const auto bytes = io::encode_jpeg(to_image(img), quality);
          return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("image"), py::arg("quality"));
  m.def("decode_luma",
        [](const py::bytes& data) {
          const std::string s = data;
          const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
          return to_array(io::decode_to_luma(std::span<const std::uint8_t>(p, s.size())));
        },
        py::arg("data"));

  // Full-reference metrics.
  m.def("psnr", [](const Array& r, const Array& d) { return fr::psnr(to_image(r), to_image(d)); },
        py::arg("ref"), py::arg("dst"), "PSNR in dB; inf for identical images.");
  m.def("ssim", [](const Array& r, const Array& d) { return fr::ssim(to_image(r), to_image(d)); },
        py::arg("ref"), py::arg("dst"));
  m.def("ms_ssim",
        [](const Array& r, const Array& d) { return fr::ms_ssim(to_image(r), to_image(d)); },
        py::arg("ref"), py::arg("dst"));

  // No-reference model.
  py::class_<nr::NiqeModel>(m, "NiqeModel")
      .def_static("load", &nr::load_model, py::arg("path"))
      .def("save", [](const nr::NiqeModel& self, const std::filesystem::path& p) {
        nr::save_model(self, p);
      }, py::arg("path"))
      .def("score", [](const nr::NiqeModel& self, const Array& img) {
        return nr::niqe_score(to_image(img), self);
      }, py::arg("image"), "NIQE distance of the image; lower is better.")
      .def_property_readonly("patch_size", [](const nr::NiqeModel& self) {
        return self.params.patch_size;
      })
      .def_property_readonly("mean", [](const nr::NiqeModel& self) {
        return std::vector<double>(self.mean.data(), self.mean.data() + self.mean.size());
      });
  m.def("train_niqe",
        [](const std::vector<Array>& corpus, std::size_t patch_size, double sharpness_fraction,
           unsigned threads) {
          std::vector<LumaImage> images;
          images.reserve(corpus.size());
          for (const auto& a : corpus) images.push_back(to_image(a));
          nr::NiqeParams params;
          params.patch_size = patch_size;
          params.sharpness_fraction = sharpness_fraction;
          py::gil_scoped_release release;
          return nr::train_pristine(images, params, nullptr, threads);
        },
        py::arg("corpus"), py::arg("patch_size") = 96, py::arg("sharpness_fraction") = 0.75,
        py::arg("threads") = 1);

  // Fusion.
  m.def("basic_2step", &fusion::basic_2step, py::arg("ms_ssim"), py::arg("niqe"),
        py::arg("alpha") = fusion::kDefaultAlpha);
  py::class_<fusion::RescaleParams>(m, "RescaleParams")
      .def_readonly("a1", &fusion::RescaleParams::a1)
      .def_readonly("b1", &fusion::RescaleParams::b1)
      .def_readonly("a2", &fusion::RescaleParams::a2)
      .def_readonly("b2", &fusion::RescaleParams::b2)
      .def_readonly("beta", &fusion::RescaleParams::beta);
  m.def("derive_rescale", &fusion::derive_rescale, py::arg("r_hi"), py::arg("r_low"),
        py::arg("nr_hi"), py::arg("nr_low"), py::arg("beta"));
  m.def("general_2step", &fusion::general_2step, py::arg("q_r"), py::arg("q_nr"),
        py::arg("params"));

  // Correlation.
  m.def("srocc", [](const Array& x, const Array& y) {
    return eval::srocc(to_vector(x), to_vector(y));
  }, py::arg("x"), py::arg("y"));
  m.def("pcc", [](const Array& x, const Array& y) {
    return eval::pcc(to_vector(x), to_vector(y));
  }, py::arg("x"), py::arg("y"));
  m.def("mapped_pcc", [](const Array& x, const Array& y) {
    return eval::mapped_pcc(to_vector(x), to_vector(y));
  }, py::arg("scores"), py::arg("mos"), "PCC after the 5-parameter logistic mapping.");

  // Pipelines.
  m.def("score_files",
        [](const std::filesystem::path& ref, const std::filesystem::path& dst,
           const std::filesystem::path& model, double alpha) {
          const auto s = cli::score_pair(io::decode_to_luma(ref), io::decode_to_luma(dst),
                                         nr::load_model(model), alpha);
          py::dict d;
          d["psnr"] = s.psnr;
          d["ms_ssim"] = s.ms_ssim;
          d["niqe_ref"] = s.niqe_ref;
          d["niqe_dst"] = s.niqe_dst;
          d["two_step"] = s.two_step;
          return d;
        },
        py::arg("ref"), py::arg("dst"), py::arg("model"), py::arg("alpha") = fusion::kDefaultAlpha);
  m.def("benchmark",
        [](const std::filesystem::path& manifest, const std::filesystem::path& model,
           std::optional<std::filesystem::path> config, std::size_t splits, double train_fraction,
           std::uint64_t seed, std::optional<double> alpha, bool use_cache, unsigned threads) {
          const auto data = dataset_options(manifest, config, model, use_cache, threads);
          cli::EvalOptions e;
          e.n_splits = splits;
          e.train_fraction = train_fraction;
          e.seed = seed;
          e.alpha = alpha;
          eval::EvalReport report;
          {
            py::gil_scoped_release release;
            const auto input = cli::prepare_scores(data);
            const auto metrics = cli::benchmark_metrics(input, data, e);
            report = eval::run_splits(input, metrics,
                                      {e.n_splits, e.train_fraction, e.seed});
          }
          py::dict out;
          for (const auto& r : report.metrics) out[py::str(r.name)] = metric_dict(r);
          return out;
        },
        py::arg("manifest"), py::arg("model"), py::arg("config") = py::none(),
        py::arg("splits") = 1000, py::arg("train_fraction") = 0.8, py::arg("seed") = 0,
        py::arg("alpha") = py::none(), py::arg("use_cache") = true, py::arg("threads") = 1,
        "Median SROCC / PCC of every available metric over content-disjoint splits.");
  m.def("alpha_sweep",
        [](const std::filesystem::path& manifest, const std::filesystem::path& model,
           const std::vector<double>& alphas, std::size_t splits, double train_fraction,
           std::uint64_t seed, bool use_cache, unsigned threads) {
          const auto data = dataset_options(manifest, std::nullopt, model, use_cache, threads);
          std::vector<eval::AlphaRow> rows;
          {
            py::gil_scoped_release release;
            const auto input = cli::prepare_scores(data);
            rows = eval::alpha_sweep(input, alphas, {splits, train_fraction, seed});
          }
          py::list out;
          for (const auto& r : rows) out.append(py::make_tuple(r.alpha, r.median_srocc, r.median_pcc));
          return out;
        },
        py::arg("manifest"), py::arg("model"), py::arg("alphas"), py::arg("splits") = 1000,
        py::arg("train_fraction") = 0.8, py::arg("seed") = 0, py::arg("use_cache") = true,
        py::arg("threads") = 1, "(alpha, median SROCC, median PCC) rows.");
}
