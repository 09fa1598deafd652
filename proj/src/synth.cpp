#include "enfgrid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "enfgrid/errors.hpp"

namespace enfgrid {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

GaussianRng::GaussianRng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& v : state_) v = splitmix64(s);
}

std::uint64_t GaussianRng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double GaussianRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> generate_enf_trajectory(const GridProfile& profile,
                                            double duration_s, double step_s,
                                            std::uint64_t seed) {
    if (!(step_s > 0))
        throw Error(errc::InvalidArgument, "trajectory step must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(duration_s / step_s)) + 1;
    const double nominal = profile.nominal_hz;
    std::vector<double> traj(n, nominal);
    if (profile.enf_std_hz <= 0.0) return traj;

    GaussianRng rng(seed);
    const double a = std::exp(-step_s / profile.drift_timescale_s);
    const double step_std = profile.enf_std_hz * std::sqrt(1.0 - a * a);
    auto clip = [&](double f) {
        return std::clamp(f, nominal - profile.enf_range_hz,
                          nominal + profile.enf_range_hz);
    };

    double x = profile.enf_std_hz * rng.normal();  // stationary start
    traj[0] = clip(nominal + x);
    for (std::size_t i = 1; i < n; ++i) {
        x = (traj[i - 1] - nominal) * a + step_std * rng.normal();
        traj[i] = clip(nominal + x);
    }
    return traj;
}

Recording render_recording(const GridProfile& profile,
                           const std::vector<double>& trajectory, double step_s,
                           DataType type, double sample_rate_hz,
                           std::uint64_t seed) {
    if (trajectory.empty())
        throw Error(errc::InvalidArgument, "empty trajectory");
    const double nyquist = sample_rate_hz / 2.0;
    const double f_max = profile.nominal_hz + profile.enf_range_hz;
    std::vector<double> amps;
    for (std::size_t k = 0; k < profile.harmonic_amplitudes.size(); ++k) {
        if (static_cast<double>(k + 1) * f_max >= nyquist) break;
        amps.push_back(profile.harmonic_amplitudes[k]);
    }
    if (amps.empty())
        throw Error(errc::InvalidArgument, "fundamental exceeds Nyquist");

    const auto n_samples = static_cast<std::size_t>(
        std::floor((static_cast<double>(trajectory.size()) - 1.0) * step_s *
                   sample_rate_hz));
    GaussianRng rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);

    // hum amplitude scaling: audio hum sits low so noise + hum fit in [-1, 1]
    double amp_sum = 0.0;
    for (double a : amps) amp_sum += a;
    const double hum_scale = (type == DataType::audio ? 0.15 : 0.8) / amp_sum;

    double hum_power = 0.0;
    for (double a : amps) hum_power += 0.5 * (a * hum_scale) * (a * hum_scale);
    const double noise_std =
        type == DataType::audio
            ? std::sqrt(hum_power / std::pow(10.0, profile.noise_snr_db / 10.0))
            : 1e-4 * hum_scale * amp_sum;

    // slow amplitude flicker as its own OU stream
    const double flicker_tau = 5.0;
    const double fa = std::exp(-1.0 / (flicker_tau * sample_rate_hz));
    const double flicker_step =
        profile.amplitude_flicker_std * std::sqrt(1.0 - fa * fa);
    double flicker = 0.0;

    Recording rec;
    rec.sample_rate_hz = sample_rate_hz;
    rec.declared_type = DataType::unknown;
    rec.samples.resize(n_samples);

    GaussianRng burst_rng(seed ^ 0x5a5a5a5a5a5a5a5aULL);
    const auto burst_window = static_cast<std::size_t>(sample_rate_hz);  // 1 s
    bool burst_on = false;

    double phase = 0.0;
    const double dt = 1.0 / sample_rate_hz;
    for (std::size_t i = 0; i < n_samples; ++i) {
        // linear interpolation of the trajectory at this sample time
        double pos = static_cast<double>(i) * dt / step_s;
        auto i0 = static_cast<std::size_t>(pos);
        i0 = std::min(i0, trajectory.size() - 2);
        double frac = pos - static_cast<double>(i0);
        double f = trajectory[i0] * (1.0 - frac) + trajectory[i0 + 1] * frac;

        phase += 2.0 * std::numbers::pi * f * dt;
        flicker = flicker * fa + flicker_step * rng.normal();

        double hum = 0.0;
        for (std::size_t k = 0; k < amps.size(); ++k)
            hum += amps[k] * hum_scale * std::sin(static_cast<double>(k + 1) * phase);
        hum *= (1.0 + flicker);

        double noise = noise_std * rng.normal();
        if (type == DataType::audio) {
            if (i % burst_window == 0) burst_on = burst_rng.uniform() < 0.1;
            if (burst_on) noise += noise_std * rng.normal();  // speech-like burst
        }
        rec.samples[i] = hum + noise;
    }
    return rec;
}

std::uint64_t file_seed(std::uint64_t master_seed, const std::string& grid,
                        DataType type, int file_index) {
    std::uint64_t s = master_seed ^ fnv1a(grid) ^
                      (static_cast<std::uint64_t>(type) << 32) ^
                      (static_cast<std::uint64_t>(file_index) << 16);
    return splitmix64(s);
}

std::vector<ManifestEntry> generate_corpus(const SynthCorpusSpec& spec,
                                           const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(errc::IoFailure, "cannot create " + out_dir);

    const double traj_step = 0.1;
    std::vector<ManifestEntry> entries;
    for (const GridProfile& p : spec.profiles) {
        for (DataType type : {DataType::power, DataType::audio}) {
            if (type == DataType::audio && !p.has_audio) continue;
            double rate = type == DataType::audio ? spec.sample_rate_hz
                                                  : spec.power_sample_rate_hz;
            for (int idx = 0; idx < spec.files_per_grid_per_type; ++idx) {
                std::uint64_t seed = file_seed(spec.master_seed, p.label, type, idx);
                auto traj = generate_enf_trajectory(p, spec.duration_seconds,
                                                    traj_step, seed);
                Recording rec =
                    render_recording(p, traj, traj_step, type, rate, seed);

                std::string name = p.label + "_" + to_string(type) + "_" +
                                   std::to_string(idx) +
                                   (type == DataType::audio ? ".wav" : ".txt");
                std::string path = (fs::path(out_dir) / name).string();
                if (type == DataType::audio)
                    write_wav16(path, rec.samples, rate);
                else
                    write_numeric_text(path, rec.samples, rate);

                entries.push_back({name, p.label, type, p.nominal_hz, seed,
                                   p.location});
            }
        }
    }
    write_manifest(entries, (fs::path(out_dir) / "manifest.csv").string());
    return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    out << "file,grid,type,nominal,seed,location\n";
    for (const auto& e : entries)
        out << e.file << ',' << e.grid << ',' << to_string(e.type) << ','
            << e.nominal_hz << ',' << e.seed << ',' << e.location << '\n';
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::UnreadableFile, path);
    std::string line;
    if (!std::getline(in, line))
        throw Error(errc::UnsupportedFormat, path + ": empty manifest");

    std::vector<ManifestEntry> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 4)
            throw Error(errc::UnsupportedFormat, path + ": bad row '" + line + "'");
        ManifestEntry e;
        e.file = fields[0];
        e.grid = fields[1];
        e.type = data_type_from_string(fields[2]);
        e.nominal_hz = std::stoi(fields[3]);
        if (fields.size() > 4 && !fields[4].empty())
            e.seed = std::stoull(fields[4]);
        if (fields.size() > 5) e.location = fields[5];
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<GridProfile> default_panel() {
    // 8 grids at 50 Hz, 4 at 60 Hz; audio for the first nine only. S-F and
    // S-G share ENF statistics on purpose: they separate by harmonic mix
    // (pole structure), not by ENF features.
    std::vector<GridProfile> p;
    auto add = [&](std::string label, std::string loc, int nominal, double std_hz,
                   double range, double tau, std::vector<double> amps,
                   double flicker, double snr, bool audio) {
        p.push_back({std::move(label), std::move(loc), nominal, std_hz, range, tau,
                     std::move(amps), flicker, snr, audio});
    };
    add("S-A", "region-a", 60, 0.060, 0.40, 80, {1.0, 0.30, 0.12, 0.05, 0.03, 0.02}, 0.02, 2.0, true);
    add("S-B", "region-b", 50, 0.300, 1.00, 120, {1.0, 0.20, 0.30, 0.08, 0.04, 0.02}, 0.04, 1.5, true);
    add("S-C", "region-c", 60, 0.020, 0.15, 60, {1.0, 0.10, 0.05, 0.02, 0.01, 0.01}, 0.01, 2.5, true);
    add("S-D", "region-d", 50, 0.100, 0.50, 90, {1.0, 0.40, 0.15, 0.10, 0.05, 0.02}, 0.03, 1.0, true);
    add("S-E", "region-e", 50, 0.050, 0.30, 150, {1.0, 0.15, 0.25, 0.05, 0.08, 0.02}, 0.02, 2.0, true);
    add("S-F", "region-f", 50, 0.080, 0.45, 100, {1.0, 0.50, 0.25, 0.12, 0.06, 0.03}, 0.02, 1.5, true);
    add("S-G", "region-g", 50, 0.080, 0.45, 100, {1.0, 0.05, 0.45, 0.02, 0.20, 0.01}, 0.05, 1.5, true);
    add("S-H", "region-h", 50, 0.150, 0.70, 70, {1.0, 0.25, 0.10, 0.15, 0.03, 0.05}, 0.03, 2.5, true);
    add("S-I", "region-i", 60, 0.040, 0.25, 110, {1.0, 0.20, 0.08, 0.04, 0.02, 0.01}, 0.02, 2.0, true);
    add("S-J", "region-j", 60, 0.090, 0.50, 50, {1.0, 0.35, 0.20, 0.08, 0.03, 0.02}, 0.04, 1.5, false);
    add("S-K", "region-k", 50, 0.020, 0.12, 200, {1.0, 0.12, 0.18, 0.03, 0.02, 0.01}, 0.01, 2.0, false);
    add("S-L", "region-l", 50, 0.120, 0.60, 140, {1.0, 0.30, 0.35, 0.10, 0.08, 0.04}, 0.03, 1.5, false);
    return p;
}

namespace {

using nlohmann::json;

json profile_to_json(const GridProfile& p) {
    return json{{"label", p.label},
                {"location", p.location},
                {"nominal_hz", p.nominal_hz},
                {"enf_std_hz", p.enf_std_hz},
                {"enf_range_hz", p.enf_range_hz},
                {"drift_timescale_s", p.drift_timescale_s},
                {"harmonic_amplitudes", p.harmonic_amplitudes},
                {"amplitude_flicker_std", p.amplitude_flicker_std},
                {"noise_snr_db", p.noise_snr_db},
                {"has_audio", p.has_audio}};
}

GridProfile profile_from_json(const json& j) {
    GridProfile p;
    p.label = j.at("label").get<std::string>();
    p.location = j.value("location", "");
    p.nominal_hz = j.at("nominal_hz").get<int>();
    if (p.nominal_hz != 50 && p.nominal_hz != 60)
        throw Error(errc::InvalidArgument, "nominal_hz must be 50 or 60");
    p.enf_std_hz = j.at("enf_std_hz").get<double>();
    p.enf_range_hz = j.at("enf_range_hz").get<double>();
    p.drift_timescale_s = j.at("drift_timescale_s").get<double>();
    p.harmonic_amplitudes = j.at("harmonic_amplitudes").get<std::vector<double>>();
    p.amplitude_flicker_std = j.value("amplitude_flicker_std", 0.0);
    p.noise_snr_db = j.value("noise_snr_db", 0.0);
    p.has_audio = j.value("has_audio", true);
    return p;
}

}  // namespace

SynthCorpusSpec load_corpus_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::UnreadableFile, path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(errc::UnsupportedFormat, path + ": " + e.what());
    }
    SynthCorpusSpec spec;
    spec.files_per_grid_per_type = j.value("files_per_grid_per_type", 2);
    spec.duration_seconds = j.value("duration_seconds", 600.0);
    spec.sample_rate_hz = j.value("sample_rate_hz", 1000.0);
    spec.power_sample_rate_hz = j.value("power_sample_rate_hz", 400.0);
    spec.master_seed = j.value("master_seed", std::uint64_t{1});
    if (j.contains("profiles"))
        for (const auto& pj : j.at("profiles"))
            spec.profiles.push_back(profile_from_json(pj));
    else
        spec.profiles = default_panel();
    return spec;
}

void write_corpus_spec(const SynthCorpusSpec& spec, const std::string& path) {
    json j;
    j["files_per_grid_per_type"] = spec.files_per_grid_per_type;
    j["duration_seconds"] = spec.duration_seconds;
    j["sample_rate_hz"] = spec.sample_rate_hz;
    j["power_sample_rate_hz"] = spec.power_sample_rate_hz;
    j["master_seed"] = spec.master_seed;
    j["profiles"] = json::array();
    for (const auto& p : spec.profiles) j["profiles"].push_back(profile_to_json(p));

    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace enfgrid
