#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "enfgrid/cascade.hpp"
#include "enfgrid/errors.hpp"
#include "oracles.hpp"

using namespace enfgrid;
namespace fs = std::filesystem;

namespace {

// Small two-grid power-only corpus shared by the cascade unit tests;
// generated once into a temp dir.
struct Fixture {
    fs::path dir;
    std::vector<LabeledRecording> corpus;
    CascadeModel model;

    Fixture() {
        dir = fs::temp_directory_path() / "cascade_fixture";
        fs::remove_all(dir);
        SynthCorpusSpec spec;
        GridProfile a;
        a.label = "GA";
        a.location = "loc-a";
        a.nominal_hz = 50;
        a.enf_std_hz = 0.03;
        a.enf_range_hz = 0.2;
        a.drift_timescale_s = 60.0;
        a.harmonic_amplitudes = {1.0, 0.3, 0.1};
        a.has_audio = false;
        GridProfile b = a;
        b.label = "GB";
        b.location = "loc-b";
        b.enf_std_hz = 0.25;
        b.enf_range_hz = 0.9;
        b.drift_timescale_s = 150.0;
        b.harmonic_amplitudes = {1.0, 0.05, 0.4};
        spec.profiles = {a, b};
        spec.files_per_grid_per_type = 2;
        spec.duration_seconds = 600.0;
        spec.master_seed = 2024;
        auto entries = generate_corpus(spec, dir.string());
        for (const auto& e : entries)
            corpus.push_back({(dir / e.file).string(), e.grid, e.type, e.nominal_hz,
                              e.location});
        model = train(corpus);
    }

    ~Fixture() { fs::remove_all(dir); }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_SUITE("cascade") {

TEST_CASE("config: save/load round trip and unknown-key rejection") {
    PipelineConfig cfg;
    cfg.set_key("typing.ratio_threshold", "4.5");
    cfg.set_key("enf.bandwidths_hz", "1,2,5");
    cfg.set_key("feature_mode", "all");
    cfg.set_key("pole_match_x", "3");
    fs::path p = fs::temp_directory_path() / "pipeline.cfg";
    cfg.save(p.string());
    PipelineConfig back = PipelineConfig::load(p.string());
    CHECK(back.typing.ratio_threshold == 4.5);
    CHECK(back.enf.bandwidths_hz == std::vector<double>{1.0, 2.0, 5.0});
    CHECK(back.feature_mode == FeatureMode::all_features);
    CHECK(back.pole_match_x == 3);
    fs::remove(p);

    CHECK_THROWS_WITH_AS(cfg.set_key("no.such.key", "1"),
                         doctest::Contains(errc::InvalidArgument), Error);
    CHECK_THROWS_WITH_AS(cfg.set_key("svm.cv_folds", "many"),
                         doctest::Contains(errc::InvalidArgument), Error);
}

TEST_CASE("train: partial-kind corpus yields exactly one SVM kind") {
    const CascadeModel& model = fixture().model;
    REQUIRE(model.svms.size() == 1);
    CHECK(model.svms.count(DataKind::p50) == 1);
    CHECK(model.pole_db.count(DataKind::p50) == 1);
    CHECK(model.grids.size() == 2);
    const auto& db = model.pole_db.at(DataKind::p50);
    CHECK(db.count("GA") == 1);
    CHECK(db.count("GB") == 1);
}

TEST_CASE("train: one grid is rejected") {
    std::vector<LabeledRecording> one;
    for (const auto& r : fixture().corpus)
        if (r.grid == "GA") one.push_back(r);
    CHECK_THROWS_WITH_AS(train(one), doctest::Contains(errc::NeedTwoClasses), Error);
}

TEST_CASE("classify: training files come back correct, final label in shortlist") {
    const Fixture& f = fixture();
    for (const auto& item : f.corpus) {
        Recording rec = load_recording(item.path);
        ClassificationReport rep = classify(f.model, rec);
        CHECK(rep.typing.data_type == DataType::power);
        CHECK(rep.typing.nominal_hz == 50);
        CHECK(rep.final_grid == item.grid);
        bool in_shortlist = false;
        for (const auto& g : rep.shortlist) in_shortlist |= (g == rep.final_grid);
        CHECK(in_shortlist);
        CHECK(rep.final_location == (item.grid == "GA" ? "loc-a" : "loc-b"));
    }
}

TEST_CASE("classify: audio input without audio SVMs is rejected") {
    const Fixture& f = fixture();
    Recording rec = load_recording(f.corpus[0].path);
    rec.declared_type = DataType::audio;
    CHECK_THROWS_WITH_AS(classify(f.model, rec),
                         doctest::Contains(errc::KindUnavailable), Error);
}

TEST_CASE("classify is deterministic: identical structured reports") {
    const Fixture& f = fixture();
    Recording rec = load_recording(f.corpus[0].path);
    ClassificationReport a = classify(f.model, rec);
    ClassificationReport b = classify(f.model, rec);
    CHECK(a.to_structured_text() == b.to_structured_text());
}

TEST_CASE("evaluate: self-evaluation accuracy and wrong-label degenerate oracle") {
    const Fixture& f = fixture();
    Evaluation ev = evaluate(f.model, f.corpus);
    CHECK(ev.total == f.corpus.size());
    CHECK(ev.cascade_accuracy == doctest::Approx(1.0));
    std::string table = ev.to_table();
    CHECK(table.find("GA") != std::string::npos);
    CHECK(table.find("GB") != std::string::npos);

    // Swap labels: everything is wrong by construction.
    std::vector<LabeledRecording> wrong = f.corpus;
    for (auto& r : wrong) r.grid = (r.grid == "GA") ? "GB" : "GA";
    Evaluation bad = evaluate(f.model, wrong);
    CHECK(bad.cascade_accuracy == doctest::Approx(0.0));

    CHECK_THROWS_WITH_AS(evaluate(f.model, {}),
                         doctest::Contains(errc::InvalidArgument), Error);
}

TEST_CASE("model round trip: save -> load -> classify is identical") {
    const Fixture& f = fixture();
    fs::path p = fs::temp_directory_path() / "cascade_model.enfm";
    save_model(f.model, p.string());
    CascadeModel loaded = load_model(p.string());
    for (const auto& item : f.corpus) {
        Recording rec = load_recording(item.path);
        CHECK(classify(f.model, rec).to_structured_text() ==
              classify(loaded, rec).to_structured_text());
    }
    fs::remove(p);
}

TEST_CASE("model file corruption and version checks") {
    const Fixture& f = fixture();
    fs::path p = fs::temp_directory_path() / "cascade_model2.enfm";
    save_model(f.model, p.string());

    // Truncation -> CorruptModel.
    std::string bytes;
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
    }
    fs::path trunc = fs::temp_directory_path() / "cascade_trunc.enfm";
    {
        std::ofstream out(trunc, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_WITH_AS(load_model(trunc.string()),
                         doctest::Contains(errc::CorruptModel), Error);

    // Flipped payload byte -> checksum failure.
    std::string flipped = bytes;
    flipped[flipped.size() - 10] =
        static_cast<char>(flipped[flipped.size() - 10] ^ 0x5a);
    fs::path bad = fs::temp_directory_path() / "cascade_bad.enfm";
    {
        std::ofstream out(bad, std::ios::binary);
        out.write(flipped.data(), static_cast<std::streamsize>(flipped.size()));
    }
    CHECK_THROWS_WITH_AS(load_model(bad.string()),
                         doctest::Contains(errc::CorruptModel), Error);

    // Future format_version -> UnsupportedVersion.
    auto vpos = bytes.find("\"format_version\":1");
    if (vpos == std::string::npos) vpos = bytes.find("\"format_version\": 1");
    REQUIRE(vpos != std::string::npos);
    std::string future = bytes;
    future[bytes.find('1', vpos)] = '9';
    fs::path fut = fs::temp_directory_path() / "cascade_future.enfm";
    {
        std::ofstream out(fut, std::ios::binary);
        out.write(future.data(), static_cast<std::streamsize>(future.size()));
    }
    CHECK_THROWS_WITH_AS(load_model(fut.string()),
                         doctest::Contains(errc::UnsupportedVersion), Error);

    fs::remove(p);
    fs::remove(trunc);
    fs::remove(bad);
    fs::remove(fut);
}

TEST_CASE("structured report excludes timings; summary includes them") {
    const Fixture& f = fixture();
    Recording rec = load_recording(f.corpus[0].path);
    ClassificationReport rep = classify(f.model, rec);
    std::string structured = rep.to_structured_text();
    CHECK(structured.find("seconds") == std::string::npos);
    CHECK(structured.find("final_grid") != std::string::npos);
    CHECK(!rep.to_summary().empty());
}

}  // TEST_SUITE
