#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enfgrid/armodel.hpp"
#include "enfgrid/enf.hpp"
#include "enfgrid/features.hpp"
#include "enfgrid/polematch.hpp"
#include "enfgrid/pretyping.hpp"
#include "enfgrid/svm.hpp"
#include "enfgrid/synth.hpp"

namespace enfgrid {

enum class FeatureMode { table_masks, all_features };

struct PipelineConfig {
    TypingParams typing;
    EnfParams enf;
    PoleBlockParams poles;
    SvmTrainParams svm;
    FeatureMode feature_mode = FeatureMode::table_masks;
    int pole_match_x = 2;

    static PipelineConfig load(const std::string& path);  // flat key=value
    void save(const std::string& path) const;
    void set_key(const std::string& key, const std::string& value);
};

struct GridMeta {
    std::string label;
    std::string location;
    int nominal_hz = 0;
};

struct CascadeModel {
    static constexpr std::uint32_t kFormatVersion = 1;

    PipelineConfig config;
    std::vector<GridMeta> grids;
    std::map<DataKind, MulticlassSvm> svms;
    std::map<DataKind, PoleDatabase> pole_db;
};

struct LabeledRecording {
    std::string path;
    std::string grid;
    DataType type = DataType::unknown;
    int nominal_hz = 0;
    std::string location;
};

struct ClassificationReport {
    TypingResult typing;
    std::size_t enf_samples = 0;
    double enf_mean_hz = 0.0;
    double enf_std_hz = 0.0;
    std::map<std::string, double> svm_probabilities;
    std::vector<std::string> shortlist;
    std::string baseline_grid;  // SVM argmax, pole matching skipped
    MatchResult pole_match;
    std::string final_grid;
    std::string final_location;
    std::map<std::string, double> stage_seconds;

    std::string to_structured_text() const;
    std::string to_summary() const;
};

CascadeModel train(const std::vector<LabeledRecording>& corpus,
                   const PipelineConfig& config = {});

ClassificationReport classify(const CascadeModel& model, const Recording& rec);

struct EvaluationRow {
    std::string grid;
    std::size_t power_total = 0, power_correct_cascade = 0, power_correct_baseline = 0;
    std::size_t audio_total = 0, audio_correct_cascade = 0, audio_correct_baseline = 0;
};

struct Evaluation {
    std::vector<EvaluationRow> rows;
    double cascade_accuracy = 0.0;
    double baseline_accuracy = 0.0;
    std::size_t total = 0;

    std::string to_table() const;
};

Evaluation evaluate(const CascadeModel& model,
                    const std::vector<LabeledRecording>& corpus,
                    bool baseline_only = false);

void save_model(const CascadeModel& model, const std::string& path);
CascadeModel load_model(const std::string& path);

/// CRC-32 (IEEE) used for model bundle section checksums.
std::uint32_t crc32(const unsigned char* data, std::size_t len);

}  // namespace enfgrid
