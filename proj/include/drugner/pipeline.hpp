#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drugner/corpus.hpp"
#include "drugner/embedding.hpp"
#include "drugner/eval.hpp"
#include "drugner/lstm.hpp"
#include "drugner/mlp.hpp"
#include "drugner/rbm.hpp"
#include "drugner/representation.hpp"
#include "drugner/sae.hpp"
#include "drugner/selection.hpp"

namespace drugner {

enum class ModelKind { Mlp, Dbn, Sae, Lstm };
ModelKind model_kind_from(const std::string& name);
const char* model_kind_name(ModelKind k);

enum class DeterminismMode { Strict, Fast };

struct PipelineConfig {
    // [corpus]
    std::string train_path;
    std::string test_path;
    CorpusFormat corpus_format = CorpusFormat::Tsv;
    std::string aux_text_path;  // optional plain-text corpus appended for embedding training

    // [embedding]
    CbowConfig embedding;

    // [representation]
    int technique = 2;
    DistanceBlock distance_block = DistanceBlock::Displacement;

    // [selection]
    SelectionStrategy selection;
    std::uint64_t selection_seed = 7;

    // [model]
    ModelKind model = ModelKind::Mlp;
    MlpConfig mlp;
    DbnConfig dbn;
    SaeConfig sae = SaeConfig::stacked_defaults();
    LstmConfig lstm;

    // [output]
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    DeterminismMode determinism = DeterminismMode::Strict;
    int jobs = 1;
};

/// Flat key-value config with [section] headers; every hyperparameter maps
/// 1:1 to a key.
PipelineConfig parse_pipeline_config(const std::string& text, const std::string& origin);
PipelineConfig load_pipeline_config(const std::string& path);

/// Rejects invalid compositions (technique 3 pairs only with the LSTM and no
/// candidate selection; techniques 1-2 pair with the tuple classifiers).
void validate_composition(const PipelineConfig& config);

struct ScenarioResult {
    EvalReport report;
    std::size_t train_samples = 0;
    std::size_t test_tuples_all = 0;
    std::size_t test_tuples_selected = 0;
    NameSet extracted;
    NameSet gold;
};

/// In-memory end-to-end run on already-parsed corpora.
ScenarioResult run_scenario(const std::vector<AnnotatedSentence>& train,
                            const std::vector<AnnotatedSentence>& test,
                            const PipelineConfig& config);

struct CrossValidationResult {
    std::vector<EvalReport> runs;
    EvalReport mean, min, max;  // aggregated P/R/F (counts summed in mean)
};

CrossValidationResult cross_validate(const std::vector<AnnotatedSentence>& corpus,
                                     const PipelineConfig& config, int k_runs,
                                     double train_fraction, std::uint64_t base_seed);

/// File-driven pipeline with content-hash caching of stage artifacts; writes
/// datasets, checkpoint, report, and manifest under config.out_dir.
ScenarioResult run_pipeline(const PipelineConfig& config);

std::string scenario_manifest(const PipelineConfig& config, const ScenarioResult& result,
                              const std::vector<std::pair<std::string, std::string>>& checksums);

/// The model.* slice of the config echo, embedded in checkpoint headers.
std::vector<std::pair<std::string, std::string>> model_config_echo(const PipelineConfig& config);

}  // namespace drugner
