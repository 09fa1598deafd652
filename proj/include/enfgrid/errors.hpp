#pragma once

#include <stdexcept>
#include <string>

namespace enfgrid {

/// Pipeline error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* UnreadableFile = "UnreadableFile";
inline constexpr const char* UnsupportedFormat = "UnsupportedFormat";
inline constexpr const char* MultiChannelUnsupported = "MultiChannelUnsupported";
inline constexpr const char* NonFiniteSamples = "NonFiniteSamples";
inline constexpr const char* TooShort = "TooShort";
inline constexpr const char* InvalidArgument = "InvalidArgument";
inline constexpr const char* InsufficientBandwidth = "InsufficientBandwidth";
inline constexpr const char* NoNominalEnergy = "NoNominalEnergy";
inline constexpr const char* EmptyOrFlatBand = "EmptyOrFlatBand";
inline constexpr const char* NeedTwoClasses = "NeedTwoClasses";
inline constexpr const char* DimensionMismatch = "DimensionMismatch";
inline constexpr const char* KindUnavailable = "KindUnavailable";
inline constexpr const char* MissingGrid = "MissingGrid";
inline constexpr const char* CorruptModel = "CorruptModel";
inline constexpr const char* UnsupportedVersion = "UnsupportedVersion";
inline constexpr const char* IoFailure = "IoFailure";
}  // namespace errc

}  // namespace enfgrid
