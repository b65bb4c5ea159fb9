#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "srres/baselines.hpp"
#include "srres/checkpoint.hpp"
#include "srres/config.hpp"
#include "srres/data.hpp"
#include "srres/image.hpp"
#include "srres/metrics.hpp"
#include "srres/model.hpp"
#include "srres/pipeline.hpp"
#include "srres/train.hpp"

namespace py = pybind11;
using namespace srres;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

// (H, W), (C, H, W) and (N, C, H, W) arrays map onto NCHW tensors; results
// come back with the rank they went in with.
template <typename T>
BasicTensor<T> to_tensor(const Array<T>& a) {
  Shape s;
  switch (a.ndim()) {
    case 2: s = {1, 1, std::size_t(a.shape(0)), std::size_t(a.shape(1))}; break;
    case 3: s = {1, std::size_t(a.shape(0)), std::size_t(a.shape(1)), std::size_t(a.shape(2))}; break;
    case 4:
      s = {std::size_t(a.shape(0)), std::size_t(a.shape(1)), std::size_t(a.shape(2)), std::size_t(a.shape(3))};
      break;
    default: throw InvalidShape("expected a 2-, 3- or 4-dimensional array");
  }
  if (!s.valid()) throw InvalidShape("empty array " + s.str());
  return BasicTensor<T>(s, std::vector<T>(a.data(), a.data() + a.size()));
}

template <typename T>
Array<T> to_array(const BasicTensor<T>& t, py::ssize_t ndim) {
  const Shape& s = t.shape();
  std::vector<py::ssize_t> dims;
  if (ndim == 4) dims.push_back(py::ssize_t(s.n));
  if (ndim >= 3) dims.push_back(py::ssize_t(s.c));
  dims.push_back(py::ssize_t(s.h));
  dims.push_back(py::ssize_t(s.w));
  Array<T> out(dims);
  std::copy(t.vec().begin(), t.vec().end(), out.mutable_data());
  return out;
}

std::map<std::string, std::string> to_config_values(const py::dict& values) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : values) {
    const std::string key = py::str(k);
    if (py::isinstance<py::bool_>(v)) {
      out[key] = v.cast<bool>() ? "true" : "false";
    } else {
      out[key] = py::str(v);
    }
  }
  return out;
}

const std::vector<std::string> kModelKeys = {"scale",         "feat_channels", "mapping_layers", "kernel_size",
                                             "use_batchnorm", "block_order",   "residual",       "final_activation"};

ModelConfig model_config_from(const py::dict& values) {
  RunConfig cfg;
  const auto kv = to_config_values(values);
  for (const auto& [k, v] : kv) {
    if (std::find(kModelKeys.begin(), kModelKeys.end(), k) == kModelKeys.end())
      throw InvalidConfig("not a model key: " + k);
  }
  apply_config(cfg, kv);
  return cfg.model;
}

py::dict model_config_dict(const ModelConfig& c) {
  RunConfig cfg;
  cfg.model = c;
  py::dict d;
  for (const auto& k : kModelKeys) d[py::str(k)] = config_value(cfg, k);
  return d;
}

py::list rows_to_list(const std::vector<BenchRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(py::make_tuple(r.method, r.image, r.psnr_db, r.ssim));
  return out;
}

ResampleMode mode_from(const std::string& name) {
  const auto mode = parse_resample_mode(name);
  if (!mode) throw UnknownMethod("resample mode '" + name + "'");
  return *mode;
}

}  // namespace

PYBIND11_MODULE(_srres, m) {
  m.doc() = "Residual CNN super-resolution engine";

  static py::exception<Error> base(m, "SrresError", PyExc_RuntimeError);
  py::register_exception<InvalidShape>(m, "InvalidShape", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<InvalidState>(m, "InvalidState", base.ptr());
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<DecodeError>(m, "DecodeError", base.ptr());
  py::register_exception<EmptyDataset>(m, "EmptyDataset", base.ptr());
  py::register_exception<CheckpointError>(m, "CheckpointError", base.ptr());
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", base.ptr());
  py::register_exception<UnknownMethod>(m, "UnknownMethod", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def(
      "psnr", [](const Array<double>& a, const Array<double>& b, double max_val) {
        return psnr(to_tensor(a), to_tensor(b), max_val);
      },
      py::arg("a"), py::arg("b"), py::arg("max_val") = 1.0);
  m.def(
      "ssim", [](const Array<double>& a, const Array<double>& b) { return ssim(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "evaluate_pair",
      [](const Array<double>& sr, const Array<double>& hr, std::size_t border) {
        const auto r = evaluate_pair(to_tensor(sr), to_tensor(hr), border);
        return py::make_tuple(r.psnr_db, r.ssim);
      },
      py::arg("sr"), py::arg("hr"), py::arg("border_crop") = 0,
      "(psnr_db, ssim) on luma after cropping `border_crop` pixels from every side.");
  m.def(
      "to_luma", [](const Array<double>& img) { return to_array(to_luma(to_tensor(img)), img.ndim() == 4 ? 4 : 2); },
      py::arg("img"));

  m.def(
      "resample",
      [](const Array<double>& img, const std::string& mode, double scale, bool antialias) {
        ResampleSpec spec{mode_from(mode), scale};
        spec.antialias = antialias;
        return to_array(resample(to_tensor(img), spec), img.ndim());
      },
      py::arg("img"), py::arg("mode") = "bicubic", py::arg("scale") = 2.0, py::arg("antialias") = true);
  m.def(
      "bicubic_upscale",
      [](const Array<double>& img, std::size_t r) { return to_array(bicubic_upscale(to_tensor(img), r), img.ndim()); },
      py::arg("img"), py::arg("scale"));
  m.def(
      "degrade", [](const Array<double>& hr, std::size_t r) { return to_array(degrade(to_tensor(hr), r), hr.ndim()); },
      py::arg("hr"), py::arg("scale"), "Antialiased bicubic 1/r downscale after cropping to a multiple of r.");

  m.def(
      "load_image",
      [](const std::string& path, bool rgb) {
        return to_array(load_image(path, rgb ? ColorMode::kRgb : ColorMode::kLuma), rgb ? 3 : 2);
      },
      py::arg("path"), py::arg("rgb") = false, "PNG as float32 in [0, 1]: (H, W) luma or (3, H, W).");
  m.def(
      "save_image", [](const std::string& path, const Array<float>& img) { write_png(path, tensor_to_image(to_tensor(img))); },
      py::arg("path"), py::arg("img"));

  py::class_<SrModel<float>>(m, "Model")
      .def(py::init([](const py::dict& config, std::uint64_t seed) {
             Rng rng(seed);
             return model_init<float>(model_config_from(config), rng);
           }),
           py::arg("config") = py::dict(), py::arg("seed") = 0)
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def(
          "save", [](const SrModel<float>& self, const std::string& path, int epoch) { save_checkpoint(path, self, epoch); },
          py::arg("path"), py::arg("epoch") = -1)
      .def(
          "infer",
          [](const SrModel<float>& self, const Array<float>& lr) {
            const py::ssize_t ndim = lr.ndim();
            Tensor out;
            {
              py::gil_scoped_release release;
              out = self.infer(to_tensor(lr));
            }
            return to_array(out, ndim);
          },
          py::arg("lr"))
      .def_property_readonly("config", [](const SrModel<float>& self) { return model_config_dict(self.config()); })
      .def_property_readonly("num_params", [](const SrModel<float>& self) { return model_num_params(self); })
      .def_property_readonly("parameter_names",
                             [](const SrModel<float>& self) {
                               std::vector<std::string> names;
                               for (const auto& slot : self.parameters()) names.push_back(slot.name);
                               return names;
                             })
      .def("to_bytes", [](const SrModel<float>& self) {
        const auto bytes = encode_checkpoint(self);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      });

  m.def("expected_num_params", [](const py::dict& config) { return expected_num_params(model_config_from(config)); },
        py::arg("config") = py::dict());

  m.def("infer_png", [](const std::string& ckpt, const std::string& input, const std::string& output) {
        infer_png(load_checkpoint(ckpt), input, output);
      },
        py::arg("ckpt"), py::arg("input"), py::arg("output"));

  m.def(
      "bench",
      [](const std::string& data_root, const std::vector<std::string>& methods, std::size_t scale) {
        std::vector<BenchRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_bench(data_root, methods, scale);
        }
        return rows_to_list(rows);
      },
      py::arg("data_root"), py::arg("methods") = std::vector<std::string>{"nearest", "bilinear", "bicubic"},
      py::arg("scale") = 2, "Per-image (method, image, psnr_db, ssim) rows.");
  m.def(
      "bench_means",
      [](const std::vector<std::tuple<std::string, std::string, double, double>>& rows) {
        std::vector<BenchRow> in;
        for (const auto& [method, image, p, s] : rows) in.push_back({method, image, p, s});
        return rows_to_list(bench_means(in));
      },
      py::arg("rows"));

  m.def("build_manifest", [](const std::string& root, std::size_t scale, double split_ratio, std::uint64_t seed) {
        return build_manifest(root, scale, split_ratio, seed).to_json();
      },
        py::arg("root"), py::arg("scale") = 2, py::arg("split_ratio") = 0.9, py::arg("seed") = 0);
  m.def("degrade_dir", [](const std::string& input, std::size_t scale, const std::string& output) {
        const auto s = degrade_dir(input, scale, output);
        return py::make_tuple(s.images, s.clamped);
      },
        py::arg("input_dir"), py::arg("scale"), py::arg("output_dir"));

  m.def("config_keys", &config_keys);
  m.def(
      "train",
      [](const py::dict& values) {
        RunConfig cfg;
        apply_config(cfg, to_config_values(values));
        cfg.validate();
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(cfg);
        }
        py::dict out;
        out["steps"] = r.steps;
        out["epoch_losses"] = r.epoch_losses;
        out["best_val_psnr"] = r.best_val_psnr;
        out["best_epoch"] = r.best_epoch;
        out["best_checkpoint"] = r.best_checkpoint;
        out["last_checkpoint"] = r.last_checkpoint;
        out["log_path"] = r.log_path;
        out["clamped_samples"] = r.clamped_samples;
        return out;
      },
      py::arg("config"), "Runs training from config keys (see config_keys()).");
}
