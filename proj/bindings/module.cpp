#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "streamhar/correction.hpp"
#include "streamhar/errors.hpp"
#include "streamhar/eval.hpp"
#include "streamhar/events.hpp"
#include "streamhar/hhmm.hpp"
#include "streamhar/model_io.hpp"
#include "streamhar/synth.hpp"

namespace py = pybind11;
using namespace streamhar;

namespace {

// The fitted recognizer plus its correction densities, as one object.
struct PyModel {
  ModelDocument doc;

  std::vector<std::string> class_names() const {
    std::vector<std::string> names;
    for (const ActivityClass& c : doc.model.classes.classes()) names.push_back(c.name);
    return names;
  }

  std::vector<Segment> run_corrected(const LabeledStream& stream) const {
    RunResult rr = run_stream(doc.model, stream.events);
    correct_segments(rr.segments, doc.pdfs, doc.model.classes, doc.correction);
    return rr.segments;
  }

  py::list run(const LabeledStream& stream) const {
    py::list out;
    for (const Segment& s : run_corrected(stream)) {
      py::dict d;
      d["begin_index"] = s.begin_index;
      d["end_index"] = s.end_index;
      d["begin_timestamp"] = format_timestamp(s.begin_ts);
      d["end_timestamp"] = format_timestamp(s.end_ts);
      d["label"] = doc.model.classes.at(s.label()).name;
      d["raw_label"] = doc.model.classes.at(s.raw_label).name;
      d["duration_s"] = s.duration_s();
      d["truncated"] = s.truncated;
      if (s.parent_begin)
        d["parent_begin"] = *s.parent_begin;
      else
        d["parent_begin"] = py::none();
      out.append(std::move(d));
    }
    return out;
  }

  py::dict evaluate(const LabeledStream& test, double rho) const {
    std::vector<Segment> segments = run_corrected(test);
    std::vector<TruthEpisode> truth = truth_episodes(test, doc.model.classes);
    Scores s = score(match_segments(segments, truth, MatchPolicy{rho}), segments, truth,
                     doc.model.classes);
    py::dict d;
    d["accuracy"] = s.accuracy;
    d["macro_f1"] = s.macro_f1;
    d["weighted_f1"] = s.weighted_f1;
    return d;
  }
};

PyModel fit(const LabeledStream& train, int beta, double kappa, double alpha,
            std::optional<double> tau_begin, std::optional<double> tau_end) {
  std::vector<LabeledStream> streams{train};
  PyModel m;
  FitConfig fc;
  fc.beta = beta;
  fc.kappa = kappa;
  fc.tau_begin = tau_begin;
  fc.tau_end = tau_end;
  ObservationAlphabet alphabet = build_alphabet(streams);
  ClassRegistry classes = ClassRegistry::from_streams(streams);
  m.doc.model = fit_model(train, alphabet, classes, fc);
  m.doc.correction.alpha = alpha;
  std::vector<CorrectionSample> samples = training_samples(train, classes);
  m.doc.pdfs = fit_all_pdfs(samples, classes, m.doc.correction);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Streaming activity recognition over smart-home sensor event logs";

  py::register_exception<Error>(m, "StreamharError");

  py::class_<SensorEvent>(m, "SensorEvent")
      .def_readonly("timestamp", &SensorEvent::timestamp)
      .def_readonly("sensor_id", &SensorEvent::sensor_id)
      .def_readonly("value", &SensorEvent::value)
      .def("__repr__", [](const SensorEvent& e) {
        return "<SensorEvent " + format_timestamp(e.timestamp) + " " + e.sensor_id + "=" +
               e.value + ">";
      });

  py::class_<Episode>(m, "Episode")
      .def_readonly("activity", &Episode::activity)
      .def_readonly("begin_index", &Episode::begin_index)
      .def_readonly("end_index", &Episode::end_index)
      .def_readonly("parent", &Episode::parent);

  py::class_<LabeledStream>(m, "LabeledStream")
      .def_readonly("events", &LabeledStream::events)
      .def_readonly("episodes", &LabeledStream::episodes)
      .def("to_text", [](const LabeledStream& s) { return serialize_stream(s); })
      .def("__len__", [](const LabeledStream& s) { return s.events.size(); });

  m.def(
      "parse_text",
      [](const std::string& text, bool strict) {
        return parse_text(text, strict ? Strictness::strict : Strictness::lenient);
      },
      py::arg("text"), py::arg("strict") = false,
      "Parse an annotated sensor log from text");

  m.def(
      "generate",
      [](const std::string& home, int episodes, std::uint64_t seed) {
        std::optional<HomeSpec> spec = home_by_name(home);
        if (!spec) raise(Errc::config_invalid, "unknown home '" + home + "'");
        return generate_stream(*spec, episodes, seed);
      },
      py::arg("home") = "default", py::arg("episodes") = 200, py::arg("seed") = 1,
      "Generate a synthetic annotated stream (homes: default, confusable-pair, shared-zone)");

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("classes", &PyModel::class_names)
      .def_property_readonly("beta", [](const PyModel& m_) { return m_.doc.model.beta; })
      .def_property_readonly("alpha", [](const PyModel& m_) { return m_.doc.correction.alpha; })
      .def("run", &PyModel::run, py::arg("stream"),
           "Segment a stream; returns the corrected segments as dicts")
      .def("evaluate", &PyModel::evaluate, py::arg("test"), py::arg("rho") = 0.5,
           "Accuracy and F1 of corrected segments against the stream's annotations")
      .def("save", [](const PyModel& m_, const std::string& path) { save_model(m_.doc, path); })
      .def("to_json", [](const PyModel& m_) { return model_to_json(m_.doc); });

  m.def("fit", &fit, py::arg("train"), py::arg("beta") = 3, py::arg("kappa") = 1.0,
        py::arg("alpha") = 0.08, py::arg("tau_begin") = py::none(),
        py::arg("tau_end") = py::none(),
        "Fit the recognizer and correction densities from an annotated stream");

  m.def(
      "load",
      [](const std::string& path) {
        PyModel m_;
        m_.doc = load_model(path);
        return m_;
      },
      py::arg("path"));

  m.def(
      "from_json",
      [](const std::string& text) {
        PyModel m_;
        m_.doc = model_from_json(text);
        return m_;
      },
      py::arg("text"));
}
