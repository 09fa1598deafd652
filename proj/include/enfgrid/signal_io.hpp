#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace enfgrid {

enum class DataType { audio, power, unknown };

const char* to_string(DataType t);
DataType data_type_from_string(const std::string& s);

/// Immutable in-memory waveform. PCM sources are normalized to [-1, 1];
/// numeric-text sources are kept verbatim.
struct Recording {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    std::string source_path;
    DataType declared_type = DataType::unknown;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

/// Load a mono PCM WAV (8/16/24-bit int, 32-bit float) or numeric text file
/// ("fs=<rate>" header, one sample per line). Multi-channel input is rejected.
Recording load_recording(const std::string& path,
                         DataType declared_type = DataType::unknown);

/// Write helpers used by the corpus generator; formats mirror load_recording.
void write_wav16(const std::string& path, std::span<const double> samples,
                 double sample_rate_hz);
void write_numeric_text(const std::string& path, std::span<const double> samples,
                        double sample_rate_hz);

struct Frame {
    std::size_t start;   // sample index into the recording
    std::size_t length;  // samples
};

/// Complete frames only; frame i starts at i * (frame_seconds - overlap_seconds).
std::vector<Frame> frames(const Recording& rec, double frame_seconds,
                          double overlap_seconds);

}  // namespace enfgrid
