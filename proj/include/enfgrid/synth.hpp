#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enfgrid/signal_io.hpp"

namespace enfgrid {

/// Deterministic Gaussian stream (xoshiro256++ + explicit Box-Muller, so
/// output is identical across platforms and standard libraries).
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed);
    double normal();
    double uniform();  // in [0, 1)

private:
    std::uint64_t state_[4];
    std::uint64_t next_u64();
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct GridProfile {
    std::string label;
    std::string location;
    int nominal_hz = 50;
    double enf_std_hz = 0.05;
    double enf_range_hz = 0.5;
    double drift_timescale_s = 100.0;
    std::vector<double> harmonic_amplitudes = {1.0, 0.2, 0.1};
    double amplitude_flicker_std = 0.0;
    double noise_snr_db = 0.0;  // audio mode: hum power vs noise power
    bool has_audio = true;
};

struct SynthCorpusSpec {
    std::vector<GridProfile> profiles;
    int files_per_grid_per_type = 2;
    double duration_seconds = 600.0;
    double sample_rate_hz = 1000.0;        // audio recordings
    double power_sample_rate_hz = 400.0;   // power recordings
    std::uint64_t master_seed = 1;
};

struct ManifestEntry {
    std::string file;
    std::string grid;
    DataType type = DataType::power;
    int nominal_hz = 50;
    std::uint64_t seed = 0;
    std::string location;
};

/// Mean-reverting (discrete Ornstein-Uhlenbeck) ENF trajectory at fixed step,
/// hard-clipped to nominal +- enf_range_hz.
std::vector<double> generate_enf_trajectory(const GridProfile& profile,
                                            double duration_s, double step_s,
                                            std::uint64_t seed);

/// Phase-continuous rendering of a trajectory (sampled at step_s) into a
/// waveform. Power mode: harmonics + slow amplitude flicker. Audio mode: the
/// same hum plus broadband noise and noise bursts at noise_snr_db.
Recording render_recording(const GridProfile& profile,
                           const std::vector<double>& trajectory, double step_s,
                           DataType type, double sample_rate_hz,
                           std::uint64_t seed);

/// Derived per-file seed; documented so corpora are reproducible piecemeal.
std::uint64_t file_seed(std::uint64_t master_seed, const std::string& grid,
                        DataType type, int file_index);

/// Writes recordings (power: numeric text, audio: 16-bit WAV) plus
/// manifest.csv into out_dir; fully determined by the spec.
std::vector<ManifestEntry> generate_corpus(const SynthCorpusSpec& spec,
                                           const std::string& out_dir);

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path);
std::vector<ManifestEntry> load_manifest(const std::string& path);

/// Default 12-grid panel mirroring the published grid layout
/// (8 grids at 50 Hz, 4 at 60 Hz; audio present for the first nine).
std::vector<GridProfile> default_panel();

SynthCorpusSpec load_corpus_spec(const std::string& path);
void write_corpus_spec(const SynthCorpusSpec& spec, const std::string& path);

}  // namespace enfgrid
