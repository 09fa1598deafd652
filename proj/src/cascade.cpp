#include "enfgrid/cascade.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "enfgrid/errors.hpp"

namespace enfgrid {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PipelineConfig

namespace {

std::map<std::string, std::string> config_to_map(const PipelineConfig& c) {
    std::map<std::string, std::string> m;
    m["typing.sn_half_width_hz"] = fmt_double(c.typing.sn_half_width_hz);
    m["typing.ratio_threshold"] = fmt_double(c.typing.ratio_threshold);
    m["typing.upper_limit_hz"] = fmt_double(c.typing.upper_limit_hz);
    m["typing.max_n_fft"] = std::to_string(c.typing.max_n_fft);
    m["enf.audio_frame_seconds"] = fmt_double(c.enf.audio_frame_seconds);
    m["enf.audio_overlap_seconds"] = fmt_double(c.enf.audio_overlap_seconds);
    m["enf.power_frame_seconds"] = fmt_double(c.enf.power_frame_seconds);
    m["enf.bandwidths_hz"] = join_doubles(c.enf.bandwidths_hz);
    m["enf.harmonic_count"] = std::to_string(c.enf.harmonic_count);
    m["enf.power_band_lo_hz"] = fmt_double(c.enf.power_band_lo_hz);
    m["enf.power_band_hi_hz"] = fmt_double(c.enf.power_band_hi_hz);
    m["enf.nfft_pad_factor"] = std::to_string(c.enf.nfft_pad_factor);
    m["enf.hampel_window"] = std::to_string(c.enf.hampel_window);
    m["enf.hampel_n_sigmas"] = fmt_double(c.enf.hampel_n_sigmas);
    m["enf.smooth_window"] = std::to_string(c.enf.smooth_window);
    m["poles.block_seconds"] = fmt_double(c.poles.block_seconds);
    m["poles.order_power"] = std::to_string(c.poles.order_power);
    m["poles.order_audio"] = std::to_string(c.poles.order_audio);
    m["svm.c_grid"] = join_doubles(c.svm.c_grid);
    m["svm.gamma_grid_scale"] = join_doubles(c.svm.gamma_grid_scale);
    m["svm.cv_folds"] = std::to_string(c.svm.cv_folds);
    m["svm.tol"] = fmt_double(c.svm.tol);
    m["feature_mode"] =
        c.feature_mode == FeatureMode::table_masks ? "table3" : "all";
    m["pole_match_x"] = std::to_string(c.pole_match_x);
    return m;
}

}  // namespace

void PipelineConfig::set_key(const std::string& key, const std::string& value) {
    try {
        if (key == "typing.sn_half_width_hz") typing.sn_half_width_hz = std::stod(value);
        else if (key == "typing.ratio_threshold") typing.ratio_threshold = std::stod(value);
        else if (key == "typing.upper_limit_hz") typing.upper_limit_hz = std::stod(value);
        else if (key == "typing.max_n_fft") typing.max_n_fft = std::stoull(value);
        else if (key == "enf.audio_frame_seconds") enf.audio_frame_seconds = std::stod(value);
        else if (key == "enf.audio_overlap_seconds") enf.audio_overlap_seconds = std::stod(value);
        else if (key == "enf.power_frame_seconds") enf.power_frame_seconds = std::stod(value);
        else if (key == "enf.bandwidths_hz") enf.bandwidths_hz = split_doubles(value);
        else if (key == "enf.harmonic_count") enf.harmonic_count = std::stoi(value);
        else if (key == "enf.power_band_lo_hz") enf.power_band_lo_hz = std::stod(value);
        else if (key == "enf.power_band_hi_hz") enf.power_band_hi_hz = std::stod(value);
        else if (key == "enf.nfft_pad_factor") enf.nfft_pad_factor = std::stoull(value);
        else if (key == "enf.hampel_window") enf.hampel_window = std::stoi(value);
        else if (key == "enf.hampel_n_sigmas") enf.hampel_n_sigmas = std::stod(value);
        else if (key == "enf.smooth_window") enf.smooth_window = std::stoi(value);
        else if (key == "poles.block_seconds") poles.block_seconds = std::stod(value);
        else if (key == "poles.order_power") poles.order_power = std::stoull(value);
        else if (key == "poles.order_audio") poles.order_audio = std::stoull(value);
        else if (key == "svm.c_grid") svm.c_grid = split_doubles(value);
        else if (key == "svm.gamma_grid_scale") svm.gamma_grid_scale = split_doubles(value);
        else if (key == "svm.cv_folds") svm.cv_folds = std::stoi(value);
        else if (key == "svm.tol") svm.tol = std::stod(value);
        else if (key == "feature_mode") {
            if (value == "table3") feature_mode = FeatureMode::table_masks;
            else if (value == "all") feature_mode = FeatureMode::all_features;
            else throw Error(errc::InvalidArgument, "feature_mode must be table3|all");
        } else if (key == "pole_match_x") pole_match_x = std::stoi(value);
        else throw Error(errc::InvalidArgument, "unknown config key '" + key + "'");
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(errc::InvalidArgument,
                    "bad value '" + value + "' for config key '" + key + "'");
    }
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::UnreadableFile, path);
    PipelineConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(errc::InvalidArgument, path + ": expected key = value, got '" + line + "'");
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto last = s.find_last_not_of(" \t");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        cfg.set_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void PipelineConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    for (const auto& [k, v] : config_to_map(*this)) out << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------
// Training

namespace {

const FeatureMask& mask_for(const PipelineConfig& cfg, DataKind kind) {
    static const std::array<FeatureMask, 4> identity = {
        identity_mask(DataKind::p50), identity_mask(DataKind::p60),
        identity_mask(DataKind::a50), identity_mask(DataKind::a60)};
    if (cfg.feature_mode == FeatureMode::table_masks) return table_mask(kind);
    switch (kind) {
        case DataKind::p50: return identity[0];
        case DataKind::p60: return identity[1];
        case DataKind::a50: return identity[2];
        default: return identity[3];
    }
}

EnfSignal extract_enf(const Recording& rec, DataType type, int nominal,
                      const EnfParams& params) {
    return type == DataType::audio ? extract_enf_audio(rec, nominal, params)
                                   : extract_enf_power(rec, nominal, params);
}

std::vector<std::vector<double>> masked_segment_features(const EnfSignal& enf,
                                                         const FeatureMask& mask) {
    std::vector<std::vector<double>> out;
    auto segments = segment_enf(enf);
    for (std::size_t s = 0; s < segments.size(); ++s)
        out.push_back(apply_mask(extract_features(segments[s], s), mask));
    return out;
}

}  // namespace

CascadeModel train(const std::vector<LabeledRecording>& corpus,
                   const PipelineConfig& config) {
    CascadeModel model;
    model.config = config;

    std::map<DataKind, std::map<std::string, std::vector<std::vector<double>>>> features;
    std::map<std::string, GridMeta> grids;

    for (const LabeledRecording& item : corpus) {
        DataKind kind = data_kind_of(item.nominal_hz, item.type);
        try {
            Recording rec = load_recording(item.path, item.type);
            EnfSignal enf = extract_enf(rec, item.type, item.nominal_hz, config.enf);
            auto fvs = masked_segment_features(enf, mask_for(config, kind));
            auto& bucket = features[kind][item.grid];
            bucket.insert(bucket.end(), fvs.begin(), fvs.end());

            auto pole_sets = grid_pole_database(rec, item.type, item.grid, config.poles);
            auto& db = model.pole_db[kind][item.grid];
            for (const auto& ps : pole_sets)
                db.insert(db.end(), ps.poles.begin(), ps.poles.end());
        } catch (const Error& e) {
            throw Error(e.code(), item.path + ": " + e.what());
        }
        auto [it, fresh] = grids.try_emplace(
            item.grid, GridMeta{item.grid, item.location, item.nominal_hz});
        if (!fresh && it->second.nominal_hz != item.nominal_hz)
            throw Error(errc::InvalidArgument,
                        "grid '" + item.grid + "' appears with two nominals");
    }

    for (const auto& [_, meta] : grids) model.grids.push_back(meta);

    for (const auto& [kind, dataset] : features) {
        if (dataset.size() < 2)
            throw Error(errc::NeedTwoClasses,
                        std::string("data kind ") + to_string(kind) +
                            " has fewer than two grids");
        model.svms.emplace(kind, train_multiclass(dataset, kind,
                                                  mask_for(config, kind),
                                                  config.svm));
    }
    if (model.svms.empty())
        throw Error(errc::NeedTwoClasses, "no trainable data kind in corpus");
    return model;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

ClassificationReport classify_impl(const CascadeModel& model, const Recording& rec,
                                   bool run_pole_match) {
    using clock = std::chrono::steady_clock;
    ClassificationReport report;
    auto elapsed = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    auto t0 = clock::now();
    report.typing = type_recording(rec, model.config.typing);
    report.stage_seconds["typing"] = elapsed(t0);

    DataKind kind = data_kind_of(report.typing.nominal_hz, report.typing.data_type);
    auto svm_it = model.svms.find(kind);
    if (svm_it == model.svms.end())
        throw Error(errc::KindUnavailable,
                    std::string("model has no SVM for kind ") + to_string(kind));
    const MulticlassSvm& svm = svm_it->second;

    t0 = clock::now();
    EnfSignal enf = extract_enf(rec, report.typing.data_type,
                                report.typing.nominal_hz, model.config.enf);
    report.stage_seconds["enf"] = elapsed(t0);
    if (enf.values_hz.size() < 2 * kSegmentLength)
        throw Error(errc::TooShort,
                    "ENF has " + std::to_string(enf.values_hz.size()) +
                        " samples; need at least 64");
    report.enf_samples = enf.values_hz.size();
    double mean = 0.0;
    for (double v : enf.values_hz) mean += v;
    mean /= static_cast<double>(enf.values_hz.size());
    double var = 0.0;
    for (double v : enf.values_hz) var += (v - mean) * (v - mean);
    report.enf_mean_hz = mean;
    report.enf_std_hz =
        std::sqrt(var / static_cast<double>(enf.values_hz.size() - 1));

    t0 = clock::now();
    auto fvs = masked_segment_features(enf, svm.mask);
    std::vector<std::map<std::string, double>> seg_probs;
    for (const auto& fv : fvs) seg_probs.push_back(segment_probabilities(svm, fv));
    ShortlistDecision decision = aggregate_and_shortlist(svm, seg_probs);
    report.stage_seconds["svm"] = elapsed(t0);

    report.svm_probabilities = decision.probabilities;
    report.shortlist = decision.shortlist;
    report.baseline_grid = decision.shortlist.front();
    report.final_grid = report.baseline_grid;

    if (run_pole_match && decision.shortlist.size() > 1) {
        t0 = clock::now();
        auto pole_sets = grid_pole_database(rec, report.typing.data_type, "test",
                                            model.config.poles);
        std::vector<std::complex<double>> test_poles;
        for (const auto& ps : pole_sets)
            test_poles.insert(test_poles.end(), ps.poles.begin(), ps.poles.end());

        auto db_it = model.pole_db.find(kind);
        if (db_it == model.pole_db.end())
            throw Error(errc::KindUnavailable,
                        std::string("model has no pole database for kind ") +
                            to_string(kind));
        report.pole_match = match(test_poles, db_it->second, decision.shortlist,
                                  model.config.pole_match_x);
        report.final_grid = report.pole_match.chosen_grid;
        report.stage_seconds["pole_match"] = elapsed(t0);
    }

    for (const auto& g : model.grids)
        if (g.label == report.final_grid) report.final_location = g.location;
    return report;
}

}  // namespace

ClassificationReport classify(const CascadeModel& model, const Recording& rec) {
    return classify_impl(model, rec, true);
}

std::string ClassificationReport::to_structured_text() const {
    // timings are deliberately excluded: structured reports must be
    // byte-identical for identical inputs
    std::ostringstream out;
    out << "report_version = 1\n";
    out << "data_type = " << to_string(typing.data_type) << '\n';
    out << "nominal_hz = " << typing.nominal_hz << '\n';
    out << "d50 = " << fmt_double(typing.d50) << '\n';
    out << "d60 = " << fmt_double(typing.d60) << '\n';
    out << "ratio_pr_pn = " << fmt_double(typing.ratio_pr_pn) << '\n';
    out << "fp_hz = " << fmt_double(typing.fp_hz) << '\n';
    out << "declared_override = " << (typing.declared_override ? 1 : 0) << '\n';
    out << "enf_samples = " << enf_samples << '\n';
    out << "enf_mean_hz = " << fmt_double(enf_mean_hz) << '\n';
    out << "enf_std_hz = " << fmt_double(enf_std_hz) << '\n';
    for (const auto& [grid, p] : svm_probabilities)
        out << "svm_probability." << grid << " = " << fmt_double(p) << '\n';
    out << "shortlist =";
    for (const auto& g : shortlist) out << ' ' << g;
    out << '\n';
    out << "baseline_grid = " << baseline_grid << '\n';
    for (const auto& [grid, d] : pole_match.avg_distance)
        out << "pole_distance." << grid << " = " << fmt_double(d) << '\n';
    out << "final_grid = " << final_grid << '\n';
    out << "final_location = " << final_location << '\n';
    return out.str();
}

std::string ClassificationReport::to_summary() const {
    std::ostringstream out;
    out << "type " << to_string(typing.data_type) << " @ " << typing.nominal_hz
        << " Hz (ratio " << typing.ratio_pr_pn << ", d50 " << typing.d50
        << ", d60 " << typing.d60 << ")\n";
    out << "ENF: " << enf_samples << " samples, mean " << enf_mean_hz
        << " Hz, std " << enf_std_hz << " Hz\n";
    out << "shortlist:";
    for (const auto& g : shortlist) {
        out << ' ' << g;
        auto it = svm_probabilities.find(g);
        if (it != svm_probabilities.end()) out << " (" << it->second << ")";
    }
    out << "\nfinal: " << final_grid;
    if (!final_location.empty()) out << " [" << final_location << "]";
    out << '\n';
    for (const auto& [stage, sec] : stage_seconds)
        out << "  " << stage << ": " << sec << " s\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluation evaluate(const CascadeModel& model,
                    const std::vector<LabeledRecording>& corpus,
                    bool baseline_only) {
    if (corpus.empty())
        throw Error(errc::InvalidArgument, "empty evaluation corpus");

    std::map<std::string, EvaluationRow> rows;
    std::size_t cascade_correct = 0, baseline_correct = 0, total = 0;
    for (const LabeledRecording& item : corpus) {
        EvaluationRow& row = rows[item.grid];
        row.grid = item.grid;
        std::string cascade_label, baseline_label;
        try {
            Recording rec = load_recording(item.path, item.type);
            ClassificationReport report =
                classify_impl(model, rec, !baseline_only);
            cascade_label = report.final_grid;
            baseline_label = report.baseline_grid;
        } catch (const Error&) {
            // typing/extraction failure counts as a miss for both systems
        }
        ++total;
        bool cascade_ok = cascade_label == item.grid;
        bool baseline_ok = baseline_label == item.grid;
        cascade_correct += cascade_ok;
        baseline_correct += baseline_ok;
        if (item.type == DataType::audio) {
            ++row.audio_total;
            row.audio_correct_cascade += cascade_ok;
            row.audio_correct_baseline += baseline_ok;
        } else {
            ++row.power_total;
            row.power_correct_cascade += cascade_ok;
            row.power_correct_baseline += baseline_ok;
        }
    }

    Evaluation ev;
    for (const auto& [_, row] : rows) ev.rows.push_back(row);
    ev.total = total;
    ev.cascade_accuracy = static_cast<double>(cascade_correct) / static_cast<double>(total);
    ev.baseline_accuracy = static_cast<double>(baseline_correct) / static_cast<double>(total);
    return ev;
}

std::string Evaluation::to_table() const {
    std::ostringstream out;
    out << "grid  | baseline power | baseline audio | cascade power | cascade audio\n";
    for (const auto& r : rows) {
        out << r.grid << " | " << r.power_correct_baseline << "(" << r.power_total
            << ") | " << r.audio_correct_baseline << "(" << r.audio_total << ") | "
            << r.power_correct_cascade << "(" << r.power_total << ") | "
            << r.audio_correct_cascade << "(" << r.audio_total << ")\n";
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "overall: baseline %.2f%%, cascade %.2f%% (%zu files)\n",
                  100.0 * baseline_accuracy, 100.0 * cascade_accuracy, total);
    out << buf;
    return out.str();
}

// ---------------------------------------------------------------------------
// Persistence

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i)
        c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

namespace {

struct BlobWriter {
    std::vector<unsigned char> bytes;

    json add(const std::vector<double>& values) {
        json ref;
        ref["offset"] = bytes.size();
        ref["count"] = values.size();
        std::size_t start = bytes.size();
        bytes.resize(start + values.size() * sizeof(double));
        std::memcpy(bytes.data() + start, values.data(),
                    values.size() * sizeof(double));
        ref["crc32"] = crc32(bytes.data() + start, values.size() * sizeof(double));
        return ref;
    }
};

struct BlobReader {
    const std::vector<unsigned char>& bytes;

    std::vector<double> get(const json& ref) const {
        std::size_t offset = ref.at("offset").get<std::size_t>();
        std::size_t count = ref.at("count").get<std::size_t>();
        if (offset + count * sizeof(double) > bytes.size())
            throw Error(errc::CorruptModel, "blob exceeds file size");
        if (crc32(bytes.data() + offset, count * sizeof(double)) !=
            ref.at("crc32").get<std::uint32_t>())
            throw Error(errc::CorruptModel, "blob checksum mismatch");
        std::vector<double> out(count);
        std::memcpy(out.data(), bytes.data() + offset, count * sizeof(double));
        return out;
    }
};

std::vector<double> flatten_matrix(const std::vector<std::vector<double>>& m) {
    std::vector<double> flat;
    for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
}

constexpr char kMagic[] = "ENFGRID-MODEL\n";

}  // namespace

void save_model(const CascadeModel& model, const std::string& path) {
    BlobWriter blobs;
    json manifest;
    manifest["format_version"] = CascadeModel::kFormatVersion;

    json cfg;
    for (const auto& [k, v] : config_to_map(model.config)) cfg[k] = v;
    manifest["config"] = cfg;

    manifest["grids"] = json::array();
    for (const auto& g : model.grids)
        manifest["grids"].push_back(
            {{"label", g.label}, {"location", g.location}, {"nominal_hz", g.nominal_hz}});

    manifest["svms"] = json::object();
    for (const auto& [kind, svm] : model.svms) {
        json js;
        js["labels"] = svm.labels;
        js["mask"] = svm.mask.indices;
        js["chosen_c"] = svm.chosen_c;
        js["chosen_gamma"] = svm.chosen_gamma;
        js["cv_accuracy"] = svm.cv_accuracy;
        js["norm_mean"] = blobs.add(svm.norm_mean);
        js["norm_std"] = blobs.add(svm.norm_std);
        js["machines"] = json::array();
        for (const auto& m : svm.machines) {
            json jm;
            jm["bias"] = m.bias;
            jm["gamma"] = m.gamma;
            jm["c"] = m.c;
            jm["calib_a"] = m.calib_a;
            jm["calib_b"] = m.calib_b;
            jm["converged"] = m.converged;
            jm["kkt_residual"] = m.kkt_residual;
            jm["dual_objective"] = m.dual_objective;
            jm["dim"] = svm.mask.indices.size();
            jm["support_vectors"] = blobs.add(flatten_matrix(m.support_vectors));
            jm["dual_coefficients"] = blobs.add(m.dual_coefficients);
            js["machines"].push_back(std::move(jm));
        }
        manifest["svms"][to_string(kind)] = std::move(js);
    }

    manifest["pole_db"] = json::object();
    for (const auto& [kind, db] : model.pole_db) {
        json jdb;
        for (const auto& [grid, poles] : db) {
            std::vector<double> interleaved;
            interleaved.reserve(poles.size() * 2);
            for (const auto& p : poles) {
                interleaved.push_back(p.real());
                interleaved.push_back(p.imag());
            }
            jdb[grid] = blobs.add(interleaved);
        }
        manifest["pole_db"][to_string(kind)] = std::move(jdb);
    }

    std::string manifest_text = manifest.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    out.write(kMagic, sizeof(kMagic) - 1);
    std::string header = "manifest_bytes=" + std::to_string(manifest_text.size()) + "\n";
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    out.write(reinterpret_cast<const char*>(blobs.bytes.data()),
              static_cast<std::streamsize>(blobs.bytes.size()));
}

CascadeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::UnreadableFile, path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    const std::size_t magic_len = sizeof(kMagic) - 1;
    if (raw.size() < magic_len ||
        std::memcmp(raw.data(), kMagic, magic_len) != 0)
        throw Error(errc::CorruptModel, path + ": bad magic");

    std::size_t pos = magic_len;
    std::string header;
    while (pos < raw.size() && raw[pos] != '\n') header.push_back(static_cast<char>(raw[pos++]));
    ++pos;
    if (header.rfind("manifest_bytes=", 0) != 0)
        throw Error(errc::CorruptModel, path + ": missing manifest header");
    std::size_t manifest_len = std::stoull(header.substr(15));
    if (pos + manifest_len > raw.size())
        throw Error(errc::CorruptModel, path + ": truncated manifest");

    json manifest;
    try {
        manifest = json::parse(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                               raw.begin() + static_cast<std::ptrdiff_t>(pos + manifest_len));
    } catch (const json::exception& e) {
        throw Error(errc::CorruptModel, path + ": " + e.what());
    }

    auto version = manifest.at("format_version").get<std::uint32_t>();
    if (version > CascadeModel::kFormatVersion)
        throw Error(errc::UnsupportedVersion,
                    path + ": format version " + std::to_string(version));

    std::vector<unsigned char> blob_bytes(raw.begin() + static_cast<std::ptrdiff_t>(pos + manifest_len),
                                          raw.end());
    BlobReader blobs{blob_bytes};

    CascadeModel model;
    try {
        for (const auto& [k, v] : manifest.at("config").items())
            model.config.set_key(k, v.get<std::string>());

        for (const auto& jg : manifest.at("grids"))
            model.grids.push_back({jg.at("label").get<std::string>(),
                                   jg.value("location", ""),
                                   jg.at("nominal_hz").get<int>()});

        for (const auto& [kind_str, js] : manifest.at("svms").items()) {
            DataKind kind = data_kind_from_string(kind_str);
            MulticlassSvm svm;
            svm.data_kind = kind;
            svm.labels = js.at("labels").get<std::vector<std::string>>();
            svm.mask.data_kind = kind;
            svm.mask.indices = js.at("mask").get<std::vector<int>>();
            svm.chosen_c = js.at("chosen_c").get<double>();
            svm.chosen_gamma = js.at("chosen_gamma").get<double>();
            svm.cv_accuracy = js.at("cv_accuracy").get<double>();
            svm.norm_mean = blobs.get(js.at("norm_mean"));
            svm.norm_std = blobs.get(js.at("norm_std"));
            for (const auto& jm : js.at("machines")) {
                BinarySvm m;
                m.bias = jm.at("bias").get<double>();
                m.gamma = jm.at("gamma").get<double>();
                m.c = jm.at("c").get<double>();
                m.calib_a = jm.at("calib_a").get<double>();
                m.calib_b = jm.at("calib_b").get<double>();
                m.converged = jm.at("converged").get<bool>();
                m.kkt_residual = jm.at("kkt_residual").get<double>();
                m.dual_objective = jm.at("dual_objective").get<double>();
                std::size_t dim = jm.at("dim").get<std::size_t>();
                std::vector<double> flat = blobs.get(jm.at("support_vectors"));
                if (dim == 0 || flat.size() % dim != 0)
                    throw Error(errc::CorruptModel, "support vector shape");
                for (std::size_t i = 0; i < flat.size(); i += dim)
                    m.support_vectors.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                                   flat.begin() + static_cast<std::ptrdiff_t>(i + dim));
                m.dual_coefficients = blobs.get(jm.at("dual_coefficients"));
                if (m.dual_coefficients.size() != m.support_vectors.size())
                    throw Error(errc::CorruptModel, "dual coefficient count");
                svm.machines.push_back(std::move(m));
            }
            model.svms.emplace(kind, std::move(svm));
        }

        for (const auto& [kind_str, jdb] : manifest.at("pole_db").items()) {
            DataKind kind = data_kind_from_string(kind_str);
            for (const auto& [grid, ref] : jdb.items()) {
                std::vector<double> interleaved = blobs.get(ref);
                auto& poles = model.pole_db[kind][grid];
                for (std::size_t i = 0; i + 1 < interleaved.size(); i += 2)
                    poles.emplace_back(interleaved[i], interleaved[i + 1]);
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(errc::CorruptModel, path + ": " + e.what());
    }
    return model;
}

}  // namespace enfgrid
