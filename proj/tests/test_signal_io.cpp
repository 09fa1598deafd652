#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "enfgrid/errors.hpp"
#include "enfgrid/signal_io.hpp"
#include "oracles.hpp"

using namespace enfgrid;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void push_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<unsigned char>(x >> (8 * i)));
}
void push_u16(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xff));
    v.push_back(static_cast<unsigned char>(x >> 8));
}

// Minimal hand-rolled WAV writer independent of the library's writer.
std::vector<unsigned char> make_wav(int channels, int bits_per_sample,
                                    std::uint32_t rate,
                                    const std::vector<std::int32_t>& frames,
                                    std::uint16_t audio_format = 1) {
    const int bytes_per = bits_per_sample / 8;
    const std::uint32_t data_len =
        static_cast<std::uint32_t>(frames.size()) * static_cast<std::uint32_t>(bytes_per);
    std::vector<unsigned char> v;
    v.insert(v.end(), {'R', 'I', 'F', 'F'});
    push_u32(v, 36 + data_len);
    v.insert(v.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    push_u32(v, 16);
    push_u16(v, audio_format);
    push_u16(v, static_cast<std::uint16_t>(channels));
    push_u32(v, rate);
    push_u32(v, rate * static_cast<std::uint32_t>(channels * bytes_per));
    push_u16(v, static_cast<std::uint16_t>(channels * bytes_per));
    push_u16(v, static_cast<std::uint16_t>(bits_per_sample));
    v.insert(v.end(), {'d', 'a', 't', 'a'});
    push_u32(v, data_len);
    for (std::int32_t s : frames)
        for (int b = 0; b < bytes_per; ++b)
            v.push_back(static_cast<unsigned char>((s >> (8 * b)) & 0xff));
    return v;
}

}  // namespace

TEST_SUITE("signal_io") {

TEST_CASE("wav16 round trip: 1000 samples at 8000 Hz") {
    oracles::Rng rng(101);
    std::vector<double> samples(1000);
    for (auto& s : samples) s = rng.uniform(-0.9, 0.9);
    auto p = temp_file("sio_roundtrip.wav");
    write_wav16(p.string(), samples, 8000.0);
    Recording rec = load_recording(p.string());
    REQUIRE(rec.samples.size() == 1000);
    CHECK(rec.sample_rate_hz == 8000.0);
    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(std::abs(rec.samples[i] - samples[i]) <= 2.0 / 32767.0);
    fs::remove(p);
}

TEST_CASE("numeric text round trip is bit-identical") {
    oracles::Rng rng(102);
    std::vector<double> samples(800);
    for (auto& s : samples) s = rng.normal();
    auto p = temp_file("sio_roundtrip.txt");
    write_numeric_text(p.string(), samples, 400.0);
    Recording rec = load_recording(p.string());
    REQUIRE(rec.samples.size() == 800);
    CHECK(rec.sample_rate_hz == 400.0);
    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(rec.samples[i] == samples[i]);  // exact: %.17g round trip
    fs::remove(p);
}

TEST_CASE("two-channel wav rejected") {
    std::vector<std::int32_t> frames(64, 1000);
    auto p = temp_file("sio_stereo.wav");
    write_bytes(p, make_wav(2, 16, 8000, frames));
    CHECK_THROWS_WITH_AS(load_recording(p.string()),
                         doctest::Contains(errc::MultiChannelUnsupported), Error);
    fs::remove(p);
}

TEST_CASE("8-bit, 24-bit, and float32 wav load") {
    auto p = temp_file("sio_depth.wav");

    // 8-bit PCM is unsigned with midpoint 128.
    write_bytes(p, make_wav(1, 8, 8000, {128, 255, 0, 128}));
    Recording r8 = load_recording(p.string());
    REQUIRE(r8.samples.size() == 4);
    CHECK(std::abs(r8.samples[0]) < 0.01);
    CHECK(r8.samples[1] > 0.95);
    CHECK(r8.samples[2] < -0.95);

    // 24-bit PCM full-scale positive and negative.
    write_bytes(p, make_wav(1, 24, 8000, {0x7fffff, -0x800000, 0}));
    Recording r24 = load_recording(p.string());
    REQUIRE(r24.samples.size() == 3);
    CHECK(r24.samples[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r24.samples[1] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(r24.samples[2] == 0.0);

    // 32-bit float (format tag 3), stored verbatim.
    std::vector<std::int32_t> raw(2);
    float f0 = 0.25f, f1 = -0.5f;
    std::memcpy(&raw[0], &f0, 4);
    std::memcpy(&raw[1], &f1, 4);
    write_bytes(p, make_wav(1, 32, 8000, raw, 3));
    Recording rf = load_recording(p.string());
    REQUIRE(rf.samples.size() == 2);
    CHECK(rf.samples[0] == doctest::Approx(0.25));
    CHECK(rf.samples[1] == doctest::Approx(-0.5));
    fs::remove(p);
}

TEST_CASE("frames: 30 s at 100 Hz, 5 s frame, 3 s overlap -> 13 frames at 2 s hop") {
    Recording rec;
    rec.sample_rate_hz = 100.0;
    rec.samples.assign(3000, 0.0);
    auto fr = frames(rec, 5.0, 3.0);
    // Hand oracle: start times 0, 2, ..., 24 s.
    std::vector<std::size_t> expected_starts;
    for (std::size_t t = 0; t + 500 <= 3000; t += 200) expected_starts.push_back(t);
    REQUIRE(fr.size() == 13);
    REQUIRE(expected_starts.size() == 13);
    for (std::size_t i = 0; i < fr.size(); ++i) {
        CHECK(fr[i].start == expected_starts[i]);
        CHECK(fr[i].length == 500);
    }
}

TEST_CASE("frames: exact division and too-short error") {
    Recording rec;
    rec.sample_rate_hz = 100.0;
    rec.samples.assign(1000, 0.0);  // 10 s
    CHECK(frames(rec, 2.0, 0.0).size() == 5);

    rec.samples.assign(100, 0.0);  // 1 s
    CHECK_THROWS_WITH_AS(frames(rec, 2.0, 0.0), doctest::Contains(errc::TooShort),
                         Error);
}

TEST_CASE("non-overlapping frames reassemble the original prefix") {
    oracles::Rng rng(103);
    Recording rec;
    rec.sample_rate_hz = 50.0;
    rec.samples.resize(517);
    for (auto& s : rec.samples) s = rng.normal();
    auto fr = frames(rec, 2.0, 0.0);  // 100-sample frames, 5 of them
    std::vector<double> rebuilt;
    for (const auto& f : fr)
        rebuilt.insert(rebuilt.end(), rec.samples.begin() + static_cast<long>(f.start),
                       rec.samples.begin() + static_cast<long>(f.start + f.length));
    REQUIRE(rebuilt.size() == 500);
    for (std::size_t i = 0; i < rebuilt.size(); ++i)
        CHECK(rebuilt[i] == rec.samples[i]);
}

TEST_CASE("load -> frame -> reassemble is bit-identical for numeric text") {
    oracles::Rng rng(104);
    std::vector<double> samples(640);
    for (auto& s : samples) s = rng.normal() * 3.7;
    auto p = temp_file("sio_reassemble.txt");
    write_numeric_text(p.string(), samples, 64.0);
    Recording rec = load_recording(p.string());
    auto fr = frames(rec, 1.0, 0.0);
    std::vector<double> rebuilt;
    for (const auto& f : fr)
        rebuilt.insert(rebuilt.end(), rec.samples.begin() + static_cast<long>(f.start),
                       rec.samples.begin() + static_cast<long>(f.start + f.length));
    REQUIRE(rebuilt.size() == samples.size());
    for (std::size_t i = 0; i < rebuilt.size(); ++i) CHECK(rebuilt[i] == samples[i]);
    fs::remove(p);
}

}  // TEST_SUITE
