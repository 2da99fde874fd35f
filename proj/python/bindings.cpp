#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "textsculpt/harness.hpp"

namespace py = pybind11;
using namespace textsculpt;

namespace {

using BoxTuple = std::tuple<std::array<int, 4>, std::string>;

std::vector<TextBox> to_boxes(const std::vector<BoxTuple>& in) {
  std::vector<TextBox> out;
  for (const auto& [r, text] : in) out.push_back({{r[0], r[1], r[2], r[3]}, text, 1.0});
  return out;
}

Image to_image(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 3 || (arr.shape(2) != 3 && arr.shape(2) != 4))
    throw Error(ErrorCode::InvalidArgument, "expected an HxWx3 or HxWx4 uint8 array");
  const int h = static_cast<int>(arr.shape(0)), w = static_cast<int>(arr.shape(1));
  const int c = static_cast<int>(arr.shape(2));
  const auto px = arr.unchecked<3>();
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, {px(y, x, 0), px(y, x, 1), px(y, x, 2), c == 4 ? px(y, x, 3) : std::uint8_t{255}});
  return img;
}

py::dict alignment_dict(const WordAlignment& a) {
  py::list ops;
  for (const auto& s : a.ops) ops.append(py::make_tuple(std::string(to_string(s.op)), s.expected, s.observed));
  py::dict d;
  d["substitutions"] = a.substitutions;
  d["insertions"] = a.insertions;
  d["deletions"] = a.deletions;
  d["cost"] = a.cost();
  d["ops"] = ops;
  return d;
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_textsculpt, m) {
  m.doc() = "Scene-text editing pair synthesis and benchmark scoring";
  m.attr("__version__") = tool_version();

  static py::exception<Error> error_type(m, "TextsculptError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("align_words", [](const std::vector<std::string>& e, const std::vector<std::string>& o) {
    return alignment_dict(align_words(e, o));
  }, py::arg("expected"), py::arg("observed"));
  m.def("text_accuracy", py::overload_cast<int, int>(&text_accuracy), py::arg("edit_cost"), py::arg("n_edit"));
  m.def("vq_score", [](bool location, bool style, bool physical) {
    return vq_score({location, style, physical});
  }, py::arg("location"), py::arg("style"), py::arg("physical"));
  m.def("word_accuracy", &word_accuracy, py::arg("expected"), py::arg("recognized"));
  m.def("gate", [](const std::vector<std::string>& expected, const std::vector<BoxTuple>& boxes) {
    const auto v = gate_sample(expected, OcrResult::from_boxes(to_boxes(boxes)));
    py::dict d;
    d["retained"] = v.retained;
    d["word_accuracy"] = v.word_accuracy;
    d["alignment"] = alignment_dict(v.alignment);
    return d;
  }, py::arg("expected"), py::arg("boxes"),
        "Boxes are ((x, y, w, h), text) tuples; the words are read in reading order.");

  m.def("background_preservation",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& source,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& edited,
           const std::vector<BoxTuple>& source_boxes, const std::vector<BoxTuple>& edited_boxes,
           std::optional<int> dilation_px) {
          const Image a = to_image(source), b = to_image(edited);
          const auto sb = to_boxes(source_boxes), eb = to_boxes(edited_boxes);
          const int dil = dilation_px ? *dilation_px : default_dilation_px(sb, eb);
          return background_preservation(a, b, build_exclusion_mask(a.size(), sb, eb, dil));
        },
        py::arg("source"), py::arg("edited"), py::arg("source_boxes") = std::vector<BoxTuple>{},
        py::arg("edited_boxes") = std::vector<BoxTuple>{}, py::arg("dilation_px") = py::none());

  m.def("forge",
        [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
           std::optional<int> count, std::optional<int> threads) {
          auto cfg = ForgeConfig::load(config);
          if (seed) cfg.seed = *seed;
          if (count) cfg.count = *count;
          if (threads) cfg.threads = *threads;
          ForgeResult res;
          {
            py::gil_scoped_release release;
            res = run_forge(cfg, out);
          }
          py::list records;
          for (const auto& r : res.records) records.append(from_json(to_json(r)));
          py::list failures;
          for (const auto& f : res.failures) failures.append(py::make_tuple(f.sample_id, f.code, f.message));
          py::dict d;
          d["records"] = records;
          d["failures"] = failures;
          d["exit_code"] = res.exit_code;
          return d;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(), py::arg("count") = py::none(),
        py::arg("threads") = py::none());

  m.def("directory_hash", &directory_hash, py::arg("dir"));
  m.def("derive_benchmark", [](const std::filesystem::path& forge_dir, const std::filesystem::path& out) {
    return derive_benchmark(forge_dir, out).size();
  }, py::arg("forge_dir"), py::arg("out_dir"));
  m.def("simulate_editor", [](const std::filesystem::path& forge_dir, const std::string& mode,
                              const std::filesystem::path& out) {
    simulate_editor(forge_dir, parse_editor_mode(mode), out);
  }, py::arg("forge_dir"), py::arg("mode"), py::arg("out_dir"));
  m.def("evaluate",
        [](const std::filesystem::path& bench, const std::filesystem::path& edited, const std::filesystem::path& clients,
           const std::filesystem::path& out) {
          const auto cfg = EvalClients::load(clients);
          EvalRun run;
          {
            py::gil_scoped_release release;
            run = run_eval(bench, edited, cfg, out);
          }
          return from_json(run.manifest);
        },
        py::arg("bench"), py::arg("edited_dir"), py::arg("clients"), py::arg("out_dir") = std::filesystem::path());
  m.def("render_report", [](const std::filesystem::path& run, const std::string& format) {
    return render_report(run, format == "json" ? ReportFormat::Json : ReportFormat::Table);
  }, py::arg("run"), py::arg("format") = "table");
}
