#include "enfgrid/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "enfgrid/errors.hpp"

namespace enfgrid {

const char* to_string(DataType t) {
    switch (t) {
        case DataType::audio: return "audio";
        case DataType::power: return "power";
        default: return "unknown";
    }
}

DataType data_type_from_string(const std::string& s) {
    if (s == "audio") return DataType::audio;
    if (s == "power") return DataType::power;
    if (s == "unknown" || s.empty()) return DataType::unknown;
    throw Error(errc::InvalidArgument, "unknown data type '" + s + "'");
}

namespace {

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

Recording load_wav(const std::string& path, DataType declared) {
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw Error(errc::UnsupportedFormat, path + ": not a RIFF/WAVE file");

    uint16_t audio_format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    const unsigned char* data = nullptr;
    uint32_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const unsigned char* chunk = buf.data() + pos;
        uint32_t len = read_u32(chunk + 4);
        if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16) {
            audio_format = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            sample_rate = read_u32(chunk + 12);
            bits = read_u16(chunk + 22);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_len = std::min<uint32_t>(len, static_cast<uint32_t>(buf.size() - pos - 8));
        }
        pos += 8 + len + (len & 1);
    }
    if (!data || sample_rate == 0)
        throw Error(errc::UnsupportedFormat, path + ": missing fmt/data chunk");
    if (channels != 1)
        throw Error(errc::MultiChannelUnsupported,
                    path + ": " + std::to_string(channels) + " channels");

    Recording rec;
    rec.sample_rate_hz = sample_rate;
    rec.source_path = path;
    rec.declared_type = declared;

    if (audio_format == 1 && bits == 8) {
        rec.samples.reserve(data_len);
        for (uint32_t i = 0; i < data_len; ++i)
            rec.samples.push_back((static_cast<int>(data[i]) - 128) / 128.0);
    } else if (audio_format == 1 && bits == 16) {
        for (uint32_t i = 0; i + 1 < data_len; i += 2) {
            int16_t v = static_cast<int16_t>(data[i] | (data[i + 1] << 8));
            rec.samples.push_back(v / 32768.0);
        }
    } else if (audio_format == 1 && bits == 24) {
        for (uint32_t i = 0; i + 2 < data_len; i += 3) {
            int32_t v = data[i] | (data[i + 1] << 8) | (data[i + 2] << 16);
            if (v & 0x800000) v |= ~0xFFFFFF;
            rec.samples.push_back(v / 8388608.0);
        }
    } else if (audio_format == 3 && bits == 32) {
        for (uint32_t i = 0; i + 3 < data_len; i += 4) {
            float f;
            std::memcpy(&f, data + i, 4);
            rec.samples.push_back(f);
        }
    } else {
        throw Error(errc::UnsupportedFormat,
                    path + ": unsupported bit depth/format (" +
                        std::to_string(bits) + "-bit, fmt " +
                        std::to_string(audio_format) + ")");
    }
    return rec;
}

Recording load_text(const std::string& path, DataType declared) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("fs=", 0) != 0)
        throw Error(errc::UnsupportedFormat, path + ": expected 'fs=<rate>' header");
    double rate = 0;
    try {
        rate = std::stod(line.substr(3));
    } catch (...) {
        throw Error(errc::UnsupportedFormat, path + ": bad sample rate '" + line + "'");
    }
    if (!(rate > 0))
        throw Error(errc::UnsupportedFormat, path + ": sample rate must be positive");

    Recording rec;
    rec.sample_rate_hz = rate;
    rec.source_path = path;
    rec.declared_type = declared;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rec.samples.push_back(std::stod(line));
    }
    return rec;
}

bool looks_like_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::memcmp(magic, "RIFF", 4) == 0;
}

}  // namespace

Recording load_recording(const std::string& path, DataType declared_type) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(errc::UnreadableFile, path);
    probe.close();

    Recording rec = looks_like_wav(path) ? load_wav(path, declared_type)
                                         : load_text(path, declared_type);
    if (rec.samples.empty())
        throw Error(errc::TooShort, path + ": no samples");
    for (double v : rec.samples)
        if (!std::isfinite(v))
            throw Error(errc::NonFiniteSamples, path);
    return rec;
}

void write_wav16(const std::string& path, std::span<const double> samples,
                 double sample_rate_hz) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);

    auto put_u32 = [&](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };

    uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    put_u32(36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<uint32_t>(sample_rate_hz));
    put_u32(static_cast<uint32_t>(sample_rate_hz) * 2);
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_len);
    for (double v : samples) {
        double clipped = std::clamp(v, -1.0, 1.0);
        int16_t q = static_cast<int16_t>(std::lrint(clipped * 32767.0));
        put_u16(static_cast<uint16_t>(q));
    }
}

void write_numeric_text(const std::string& path, std::span<const double> samples,
                        double sample_rate_hz) {
    std::ofstream out(path);
    if (!out) throw Error(errc::IoFailure, "cannot write " + path);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "fs=%.17g\n", sample_rate_hz);
    out << buf;
    for (double v : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
}

std::vector<Frame> frames(const Recording& rec, double frame_seconds,
                          double overlap_seconds) {
    if (!(frame_seconds > 0) || overlap_seconds < 0 || overlap_seconds >= frame_seconds)
        throw Error(errc::InvalidArgument, "need 0 <= overlap < frame length");
    const auto frame_len =
        static_cast<std::size_t>(std::llround(frame_seconds * rec.sample_rate_hz));
    const auto hop = static_cast<std::size_t>(
        std::llround((frame_seconds - overlap_seconds) * rec.sample_rate_hz));
    if (frame_len == 0 || hop == 0)
        throw Error(errc::InvalidArgument, "frame/hop rounds to zero samples");
    if (rec.samples.size() < frame_len)
        throw Error(errc::TooShort, rec.source_path + ": shorter than one frame");

    std::vector<Frame> out;
    for (std::size_t start = 0; start + frame_len <= rec.samples.size(); start += hop)
        out.push_back({start, frame_len});
    return out;
}

}  // namespace enfgrid
