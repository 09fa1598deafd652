#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "enfgrid/cascade.hpp"
#include "enfgrid/errors.hpp"

namespace py = pybind11;
using namespace enfgrid;

PYBIND11_MODULE(_enfgrid, m) {
    m.doc() = "ENF-based grid-of-origin identification";

    py::register_exception<Error>(m, "EnfGridError");

    py::enum_<DataType>(m, "DataType")
        .value("audio", DataType::audio)
        .value("power", DataType::power)
        .value("unknown", DataType::unknown);

    py::class_<Recording>(m, "Recording")
        .def(py::init<>())
        .def_readwrite("samples", &Recording::samples)
        .def_readwrite("sample_rate_hz", &Recording::sample_rate_hz)
        .def_readwrite("source_path", &Recording::source_path)
        .def_readwrite("declared_type", &Recording::declared_type)
        .def("duration_seconds", &Recording::duration_seconds);

    m.def("load_recording", &load_recording, py::arg("path"),
          py::arg("declared_type") = DataType::unknown);
    m.def("write_wav16", [](const std::string& path, const std::vector<double>& s,
                            double rate) { write_wav16(path, s, rate); });
    m.def("write_numeric_text",
          [](const std::string& path, const std::vector<double>& s, double rate) {
              write_numeric_text(path, s, rate);
          });

    py::class_<TypingResult>(m, "TypingResult")
        .def_readonly("nominal_hz", &TypingResult::nominal_hz)
        .def_readonly("data_type", &TypingResult::data_type)
        .def_readonly("d50", &TypingResult::d50)
        .def_readonly("d60", &TypingResult::d60)
        .def_readonly("ratio_pr_pn", &TypingResult::ratio_pr_pn)
        .def_readonly("fp_hz", &TypingResult::fp_hz);
    m.def("type_recording",
          [](const Recording& rec) { return type_recording(rec); });
    m.def("nominal_from_distances", &nominal_from_distances);
    m.def("type_from_ratio",
          [](double ratio) { return type_from_ratio(ratio); });

    py::class_<EnfSignal>(m, "EnfSignal")
        .def_readonly("values_hz", &EnfSignal::values_hz)
        .def_readonly("hop_seconds", &EnfSignal::hop_seconds)
        .def_readonly("nominal_hz", &EnfSignal::nominal_hz);
    m.def("extract_enf_audio", [](const Recording& rec, int nominal) {
        return extract_enf_audio(rec, nominal);
    });
    m.def("extract_enf_power", [](const Recording& rec, int nominal) {
        return extract_enf_power(rec, nominal);
    });
    m.def("hampel_filter", &hampel_filter, py::arg("values"),
          py::arg("window") = 11, py::arg("n_sigmas") = 3.0);
    m.def("smooth", &smooth, py::arg("values"), py::arg("window") = 5);
    m.def("quadratic_peak", [](double a, double b, double g) {
        PeakOffset p = quadratic_peak(a, b, g);
        return py::make_tuple(p.p, p.degenerate);
    });

    m.def("extract_features", [](const std::vector<double>& segment) {
        FeatureVector fv = extract_features(segment);
        return std::vector<double>(fv.values.begin(), fv.values.end());
    });

    py::class_<GridProfile>(m, "GridProfile")
        .def(py::init<>())
        .def_readwrite("label", &GridProfile::label)
        .def_readwrite("nominal_hz", &GridProfile::nominal_hz)
        .def_readwrite("enf_std_hz", &GridProfile::enf_std_hz)
        .def_readwrite("enf_range_hz", &GridProfile::enf_range_hz)
        .def_readwrite("drift_timescale_s", &GridProfile::drift_timescale_s)
        .def_readwrite("harmonic_amplitudes", &GridProfile::harmonic_amplitudes)
        .def_readwrite("noise_snr_db", &GridProfile::noise_snr_db)
        .def_readwrite("has_audio", &GridProfile::has_audio);
    m.def("default_panel", &default_panel);
    m.def("generate_enf_trajectory", &generate_enf_trajectory);
    m.def("render_recording", &render_recording);

    py::class_<SynthCorpusSpec>(m, "SynthCorpusSpec")
        .def(py::init<>())
        .def_readwrite("profiles", &SynthCorpusSpec::profiles)
        .def_readwrite("files_per_grid_per_type", &SynthCorpusSpec::files_per_grid_per_type)
        .def_readwrite("duration_seconds", &SynthCorpusSpec::duration_seconds)
        .def_readwrite("sample_rate_hz", &SynthCorpusSpec::sample_rate_hz)
        .def_readwrite("power_sample_rate_hz", &SynthCorpusSpec::power_sample_rate_hz)
        .def_readwrite("master_seed", &SynthCorpusSpec::master_seed);
    m.def("generate_corpus", [](const SynthCorpusSpec& spec, const std::string& dir) {
        auto entries = generate_corpus(spec, dir);
        py::list out;
        for (const auto& e : entries) {
            py::dict d;
            d["file"] = e.file;
            d["grid"] = e.grid;
            d["type"] = std::string(to_string(e.type));
            d["nominal_hz"] = e.nominal_hz;
            out.append(d);
        }
        return out;
    });

    py::class_<LabeledRecording>(m, "LabeledRecording")
        .def(py::init<>())
        .def_readwrite("path", &LabeledRecording::path)
        .def_readwrite("grid", &LabeledRecording::grid)
        .def_readwrite("type", &LabeledRecording::type)
        .def_readwrite("nominal_hz", &LabeledRecording::nominal_hz);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def("set_key", &PipelineConfig::set_key);

    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("avg_distance", &MatchResult::avg_distance)
        .def_readonly("chosen_grid", &MatchResult::chosen_grid);
    m.def("pole_match", &match, py::arg("test_poles"), py::arg("database"),
          py::arg("shortlist"), py::arg("nearest_count") = 2);

    py::class_<ClassificationReport>(m, "ClassificationReport")
        .def_readonly("typing", &ClassificationReport::typing)
        .def_readonly("enf_samples", &ClassificationReport::enf_samples)
        .def_readonly("svm_probabilities", &ClassificationReport::svm_probabilities)
        .def_readonly("shortlist", &ClassificationReport::shortlist)
        .def_readonly("baseline_grid", &ClassificationReport::baseline_grid)
        .def_readonly("final_grid", &ClassificationReport::final_grid)
        .def("structured_text", &ClassificationReport::to_structured_text)
        .def("summary", &ClassificationReport::to_summary);

    py::class_<CascadeModel>(m, "CascadeModel");
    m.def("train", [](const std::vector<LabeledRecording>& corpus,
                      const PipelineConfig& cfg) { return train(corpus, cfg); },
          py::arg("corpus"), py::arg("config") = PipelineConfig{});
    m.def("classify", &classify);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);
}
