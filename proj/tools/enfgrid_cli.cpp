// enfgrid: grid-of-origin identification for audio and power recordings.
//
// Subcommands: synth, train, classify, evaluate, plot.
// Exit codes: 0 success, 1 partial failure (some inputs failed), 2 usage error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "enfgrid/cascade.hpp"
#include "enfgrid/errors.hpp"

namespace fs = std::filesystem;
using namespace enfgrid;

namespace {

PipelineConfig make_config(const std::string& config_path,
                           const std::vector<std::string>& overrides,
                           const std::string& features) {
    PipelineConfig cfg;
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("ENFGRID_CONFIG")) path = env;
    }
    if (!path.empty()) cfg = PipelineConfig::load(path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Error(errc::InvalidArgument, "--set expects key=value, got '" + kv + "'");
        cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (features == "all") cfg.feature_mode = FeatureMode::all_features;
    else if (features == "table3") cfg.feature_mode = FeatureMode::table_masks;
    else if (!features.empty())
        throw Error(errc::InvalidArgument, "--features must be all|table3");
    return cfg;
}

std::vector<LabeledRecording> corpus_from_manifest(const std::string& manifest_path) {
    auto entries = load_manifest(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<LabeledRecording> corpus;
    for (const auto& e : entries) {
        LabeledRecording item;
        item.path = (base / e.file).string();
        item.grid = e.grid;
        item.type = e.type;
        item.nominal_hz = e.nominal_hz;
        item.location = e.location;
        if (!fs::exists(item.path))
            throw Error(errc::UnreadableFile,
                        manifest_path + " references missing file " + item.path);
        corpus.push_back(std::move(item));
    }
    return corpus;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::uint64_t seed, bool seed_set) {
    SynthCorpusSpec spec;
    if (!spec_path.empty()) spec = load_corpus_spec(spec_path);
    else spec.profiles = default_panel();
    if (seed_set) spec.master_seed = seed;
    auto entries = generate_corpus(spec, out_dir);
    std::cout << "wrote " << entries.size() << " recordings to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& manifest, const std::string& out_model,
              const PipelineConfig& cfg) {
    auto corpus = corpus_from_manifest(manifest);
    CascadeModel model = train(corpus, cfg);
    save_model(model, out_model);
    std::cout << "model written to " << out_model << "\n";
    for (const auto& [kind, svm] : model.svms)
        std::cout << "  " << to_string(kind) << ": " << svm.labels.size()
                  << " grids, CV accuracy " << svm.cv_accuracy * 100.0
                  << "%, C=" << svm.chosen_c << " gamma=" << svm.chosen_gamma
                  << "\n";
    return 0;
}

int cmd_classify(const std::string& model_path,
                 const std::vector<std::string>& inputs,
                 const std::string& declared, int jobs) {
    CascadeModel model = load_model(model_path);
    DataType declared_type = data_type_from_string(declared);

    struct Result {
        bool ok = false;
        std::string text;
        std::string summary;
        std::string error;
    };
    std::vector<Result> results(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            try {
                Recording rec = load_recording(inputs[i], declared_type);
                ClassificationReport report = classify(model, rec);
                results[i].ok = true;
                // Structured report goes to stdout and must be byte-identical
                // across runs; the human summary (with timings) to stderr.
                results[i].text =
                    "input = " + inputs[i] + "\n" + report.to_structured_text();
                results[i].summary = report.to_summary();
            } catch (const Error& e) {
                results[i].error = e.what();
            }
        }
    };
    jobs = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    bool any_failed = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {  // input order preserved
        if (results[i].ok) {
            std::cout << results[i].text << "\n";
            std::cerr << results[i].summary << "\n";
        } else {
            any_failed = true;
            std::cout << "input = " << inputs[i] << "\nerror = "
                      << results[i].error << "\n\n";
        }
    }
    return any_failed ? 1 : 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& manifest,
                 bool baseline_only) {
    CascadeModel model = load_model(model_path);
    auto corpus = corpus_from_manifest(manifest);
    if (corpus.empty()) throw Error(errc::InvalidArgument, "empty manifest");
    Evaluation ev = evaluate(model, corpus, baseline_only);
    std::cout << ev.to_table();
    return 0;
}

// --- plotting: SVG polyline/scatter plus companion numeric dumps -----------

void write_svg_polyline(const std::string& path,
                        const std::vector<double>& xs,
                        const std::vector<double>& ys,
                        const std::string& x_label, const std::string& y_label) {
    const double w = 900, h = 400, m = 50;
    double x0 = *std::min_element(xs.begin(), xs.end());
    double x1 = *std::max_element(xs.begin(), xs.end());
    double y0 = *std::min_element(ys.begin(), ys.end());
    double y1 = *std::max_element(ys.begin(), ys.end());
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;

    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
        << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='" << h - 8 << "' text-anchor='middle'>"
        << x_label << "</text>\n";
    out << "<text x='14' y='" << h / 2 << "' transform='rotate(-90 14 " << h / 2
        << ")' text-anchor='middle'>" << y_label << "</text>\n";
    out << "<polyline fill='none' stroke='steelblue' stroke-width='1' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double px = m + (xs[i] - x0) / (x1 - x0) * (w - 2 * m);
        double py = h - m - (ys[i] - y0) / (y1 - y0) * (h - 2 * m);
        out << px << ',' << py << ' ';
    }
    out << "'/>\n</svg>\n";
}

void write_svg_scatter(const std::string& path,
                       const std::vector<std::tuple<double, double, std::string>>& pts) {
    const double w = 600, h = 600, m = 40;
    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
        << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    // unit circle as reference, poles plotted in [-1.1, 1.1]^2
    auto px = [&](double x) { return m + (x + 1.1) / 2.2 * (w - 2 * m); };
    auto py = [&](double y) { return h - m - (y + 1.1) / 2.2 * (h - 2 * m); };
    out << "<circle cx='" << px(0) << "' cy='" << py(0) << "' r='"
        << (px(1) - px(0)) << "' fill='none' stroke='gray'/>\n";
    const char* colors[] = {"red", "green", "blue", "orange", "purple", "brown", "teal"};
    std::vector<std::string> seen;
    for (const auto& [x, y, label] : pts) {
        auto it = std::find(seen.begin(), seen.end(), label);
        std::size_t ci = it == seen.end() ? seen.size() : static_cast<std::size_t>(it - seen.begin());
        if (it == seen.end()) seen.push_back(label);
        out << "<circle cx='" << px(x) << "' cy='" << py(y)
            << "' r='3' fill='" << colors[ci % 7] << "'/>\n";
    }
    double ly = 20;
    for (std::size_t i = 0; i < seen.size(); ++i, ly += 16)
        out << "<text x='" << w - 130 << "' y='" << ly << "' fill='"
            << colors[i % 7] << "'>" << seen[i] << "</text>\n";
    out << "</svg>\n";
}

int cmd_plot(const std::string& kind, const std::string& input,
             const std::string& model_path, const std::string& out_path,
             const PipelineConfig& cfg) {
    std::string dump_path = out_path + ".txt";
    if (kind == "enf") {
        Recording rec = load_recording(input);
        TypingResult typing = type_recording(rec, cfg.typing);
        EnfSignal enf = typing.data_type == DataType::audio
                            ? extract_enf_audio(rec, typing.nominal_hz, cfg.enf)
                            : extract_enf_power(rec, typing.nominal_hz, cfg.enf);
        std::vector<double> t(enf.values_hz.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<double>(i) * enf.hop_seconds;
        write_svg_polyline(out_path, t, enf.values_hz, "time [s]", "ENF [Hz]");
        std::ofstream dump(dump_path);
        dump << "t,enf_hz\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t[i], enf.values_hz[i]);
            dump << buf;
        }
    } else if (kind == "spectrogram") {
        Recording rec = load_recording(input);
        auto frame_list = frames(rec, 2.0, 0.0);
        // PGM heatmap up to 125 Hz
        std::vector<std::vector<double>> rows;
        double bin_hz = 0;
        for (const Frame& fr : frame_list) {
            std::span<const double> frame(rec.samples.data() + fr.start, fr.length);
            Spectrum s = magnitude_spectrum(frame, rec.sample_rate_hz,
                                            next_pow2(frame.size()), Window::hann);
            bin_hz = s.bin_hz;
            std::size_t limit = std::min<std::size_t>(
                static_cast<std::size_t>(125.0 / s.bin_hz), s.size() - 1);
            std::vector<double> row(limit + 1);
            for (std::size_t k = 0; k <= limit; ++k) row[k] = log_power(s.magnitudes[k]);
            rows.push_back(std::move(row));
        }
        double lo = 1e300, hi = -1e300;
        for (const auto& r : rows)
            for (double v : r) { lo = std::min(lo, v); hi = std::max(hi, v); }
        if (hi == lo) hi = lo + 1;
        std::ofstream img(out_path, std::ios::binary);
        img << "P5\n" << rows.size() << ' ' << rows[0].size() << "\n255\n";
        for (std::size_t k = rows[0].size(); k-- > 0;)
            for (const auto& r : rows)
                img.put(static_cast<char>(
                    std::clamp((r[k] - lo) / (hi - lo) * 255.0, 0.0, 255.0)));
        std::ofstream dump(dump_path);
        dump << "frame,bin_hz,log_power...\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            dump << i << ',' << bin_hz;
            for (double v : rows[i]) dump << ',' << v;
            dump << '\n';
        }
    } else if (kind == "poles") {
        std::vector<std::tuple<double, double, std::string>> pts;
        std::ofstream dump(dump_path);
        dump << "re,im,grid,segment\n";
        if (!model_path.empty()) {
            CascadeModel model = load_model(model_path);
            for (const auto& [mk, db] : model.pole_db)
                for (const auto& [grid, poles] : db)
                    for (const auto& p : poles) {
                        pts.emplace_back(p.real(), p.imag(), grid);
                        dump << p.real() << ',' << p.imag() << ',' << grid << ",-1\n";
                    }
        }
        if (!input.empty()) {
            Recording rec = load_recording(input);
            TypingResult typing = type_recording(rec, cfg.typing);
            auto sets = grid_pole_database(rec, typing.data_type, "test", cfg.poles);
            for (const auto& ps : sets)
                for (const auto& p : ps.poles) {
                    pts.emplace_back(p.real(), p.imag(), "test");
                    dump << p.real() << ',' << p.imag() << ",test,"
                         << ps.segment_index << '\n';
                }
        }
        write_svg_scatter(out_path, pts);
    } else {
        std::cerr << "invalid plot kind '" << kind
                  << "'; valid kinds: spectrogram, enf, poles\n";
        return 2;
    }
    std::cout << "wrote " << out_path << " and " << dump_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ENF-based grid-of-origin identification"};
    app.require_subcommand(1);

    std::string config_path, features;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path,
                   "pipeline config file (key = value); default from $ENFGRID_CONFIG");
    app.add_option("--set", overrides, "override a config key (key=value)");

    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string spec_path, out_dir = "corpus";
    std::uint64_t seed = 1;
    synth->add_option("--spec", spec_path, "corpus spec JSON (default: built-in 12-grid panel)");
    synth->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = synth->add_option("--seed", seed, "master seed");

    auto* train_cmd = app.add_subcommand("train", "train a cascade model from a corpus manifest");
    std::string manifest, out_model = "model.enfgrid";
    train_cmd->add_option("--manifest", manifest, "corpus manifest.csv")->required();
    train_cmd->add_option("--out", out_model, "output model path");
    train_cmd->add_option("--features", features, "feature set: table3 (default) or all");

    auto* classify_cmd = app.add_subcommand("classify", "classify one or more recordings");
    std::string model_path, declared;
    std::vector<std::string> inputs;
    int jobs = 1;
    classify_cmd->add_option("--model", model_path, "trained model")->required();
    classify_cmd->add_option("input", inputs, "recording file(s)")->required();
    classify_cmd->add_option("--declared-type", declared, "override detection: audio|power");
    classify_cmd->add_option("--jobs", jobs, "parallel workers for batch input");

    auto* eval_cmd = app.add_subcommand("evaluate", "accuracy table over a labeled corpus");
    std::string eval_model, eval_manifest;
    bool baseline_only = false;
    eval_cmd->add_option("--model", eval_model, "trained model")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "labeled manifest.csv")->required();
    eval_cmd->add_flag("--baseline-only", baseline_only, "skip the pole-matching stage");

    auto* plot_cmd = app.add_subcommand("plot", "diagnostic plots (image + numeric dump)");
    std::string plot_kind, plot_input, plot_model, plot_out;
    plot_cmd->add_option("--kind", plot_kind, "spectrogram|enf|poles")->required();
    plot_cmd->add_option("--input", plot_input, "recording file");
    plot_cmd->add_option("--model", plot_model, "model (for pole overlays)");
    plot_cmd->add_option("--out", plot_out, "output image path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg = make_config(config_path, overrides, features);
        if (synth->parsed())
            return cmd_synth(spec_path, out_dir, seed, seed_opt->count() > 0);
        if (train_cmd->parsed()) return cmd_train(manifest, out_model, cfg);
        if (classify_cmd->parsed())
            return cmd_classify(model_path, inputs, declared, jobs);
        if (eval_cmd->parsed())
            return cmd_evaluate(eval_model, eval_manifest, baseline_only);
        if (plot_cmd->parsed())
            return cmd_plot(plot_kind, plot_input, plot_model, plot_out, cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
