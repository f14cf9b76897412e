#include "drugner/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "drugner/checkpoint.hpp"
#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace fs = std::filesystem;

namespace drugner {

ModelKind model_kind_from(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "mlp") return ModelKind::Mlp;
    if (n == "dbn") return ModelKind::Dbn;
    if (n == "sae") return ModelKind::Sae;
    if (n == "lstm") return ModelKind::Lstm;
    throw ConfigError("unknown model kind: " + name);
}

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Dbn: return "dbn";
        case ModelKind::Sae: return "sae";
        case ModelKind::Lstm: return "lstm";
    }
    return "?";
}

namespace {

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (const auto& part : split_on(value, ','))
        if (!part.empty()) out.push_back(std::stoi(part));
    return out;
}

std::vector<double> parse_double_list(const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split_on(value, ','))
        if (!part.empty()) out.push_back(std::stod(part));
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void apply_key(PipelineConfig& c, const std::string& section, const std::string& key,
               const std::string& value, const std::string& origin, std::size_t lineno) {
    auto bad_key = [&]() {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key +
                          "' in section [" + section + "]");
    };
    if (section == "corpus") {
        if (key == "train") c.train_path = value;
        else if (key == "test") c.test_path = value;
        else if (key == "format") {
            if (value == "xml") c.corpus_format = CorpusFormat::Xml;
            else if (value == "tsv") c.corpus_format = CorpusFormat::Tsv;
            else throw ConfigError("corpus format must be xml or tsv");
        }
        else if (key == "aux_text") c.aux_text_path = value;
        else bad_key();
    } else if (section == "embedding") {
        if (key == "dimension") c.embedding.dimension = std::stoi(value);
        else if (key == "window") c.embedding.window = std::stoi(value);
        else if (key == "epochs") c.embedding.epochs = std::stoi(value);
        else if (key == "learning_rate") c.embedding.learning_rate = std::stod(value);
        else if (key == "negative_samples") c.embedding.negative_samples = std::stoi(value);
        else if (key == "min_count") c.embedding.min_count = std::stoull(value);
        else if (key == "seed") c.embedding.rng_seed = std::stoull(value);
        else bad_key();
    } else if (section == "representation") {
        if (key == "technique") c.technique = std::stoi(value);
        else if (key == "distance_block") {
            if (value == "displacement") c.distance_block = DistanceBlock::Displacement;
            else if (value == "scalar_broadcast") c.distance_block = DistanceBlock::ScalarBroadcast;
            else throw ConfigError("distance_block must be displacement or scalar_broadcast");
        }
        else bad_key();
    } else if (section == "selection") {
        if (key == "strategy") c.selection.kind = selection_kind_from(value);
        else if (key == "x") c.selection.x = std::stoi(value);
        else if (key == "y") c.selection.y = std::stoi(value);
        else if (key == "seed") c.selection_seed = std::stoull(value);
        else bad_key();
    } else if (section == "model") {
        if (key == "kind") c.model = model_kind_from(value);
        else if (key == "layer_sizes") c.mlp.layer_sizes = parse_int_list(value);
        else if (key == "learning_rate") c.mlp.learning_rate = std::stod(value);
        else if (key == "momentum") c.mlp.momentum = std::stod(value);
        else if (key == "epochs") c.mlp.epochs = std::stoi(value);
        else if (key == "batch_size") c.mlp.batch_size = std::stoi(value);
        else if (key == "regularization") c.mlp.regularization = reg_kind_from(value);
        else if (key == "seed") {
            c.mlp.rng_seed = std::stoull(value);
            c.dbn.rng_seed = c.mlp.rng_seed;
            c.dbn.pretrain.rng_seed = c.mlp.rng_seed;
            c.sae.rng_seed = c.mlp.rng_seed;
            c.lstm.rng_seed = c.mlp.rng_seed;
        }
        // dbn
        else if (key == "rbm_sizes") {
            auto nums = parse_int_list(value);
            if (nums.size() % 2) throw ConfigError("rbm_sizes needs visible,hidden pairs");
            c.dbn.rbm_sizes.clear();
            for (std::size_t i = 0; i < nums.size(); i += 2)
                c.dbn.rbm_sizes.emplace_back(nums[i], nums[i + 1]);
        }
        else if (key == "alpha") c.dbn.pretrain.alpha = std::stod(value);
        else if (key == "cd_steps") c.dbn.pretrain.cd_steps = std::stoi(value);
        else if (key == "pretrain_epochs") {
            c.dbn.pretrain.epochs = std::stoi(value);
            for (auto& ae : c.sae.autoencoders) ae.epochs = std::stoi(value);
        }
        else if (key == "pretrain_momentum") c.dbn.pretrain.momentum = std::stod(value);
        else if (key == "finetune_epochs") {
            c.dbn.finetune_epochs = std::stoi(value);
            c.sae.finetune_epochs = std::stoi(value);
        }
        else if (key == "finetune_learning_rate") {
            c.dbn.finetune_learning_rate = std::stod(value);
            c.sae.finetune_learning_rate = std::stod(value);
        }
        else if (key == "freeze_pretrained") c.dbn.freeze_pretrained = value == "true";
        // sae
        else if (key == "sparsity_targets") {
            auto t = parse_double_list(value);
            for (std::size_t i = 0; i < t.size() && i < c.sae.autoencoders.size(); ++i)
                c.sae.autoencoders[i].sparsity_target = t[i];
        }
        else if (key == "sparsity_weights") {
            auto t = parse_double_list(value);
            for (std::size_t i = 0; i < t.size() && i < c.sae.autoencoders.size(); ++i)
                c.sae.autoencoders[i].sparsity_weight = t[i];
        }
        else if (key == "ae_learning_rates") {
            auto t = parse_double_list(value);
            for (std::size_t i = 0; i < t.size() && i < c.sae.autoencoders.size(); ++i)
                c.sae.autoencoders[i].learning_rate = t[i];
        }
        else if (key == "corruption") {
            for (auto& ae : c.sae.autoencoders) ae.corruption = std::stod(value);
        }
        // lstm
        else if (key == "input_dimension") c.lstm.input_dimension = std::stoi(value);
        else if (key == "hidden_sizes") c.lstm.hidden_sizes = parse_int_list(value);
        else if (key == "lstm_learning_rate") c.lstm.learning_rate = std::stod(value);
        else if (key == "lstm_momentum") c.lstm.momentum = std::stod(value);
        else if (key == "lstm_epochs") c.lstm.epochs = std::stoi(value);
        else if (key == "frame") c.lstm.frame = std::stoi(value);
        else if (key == "loss") {
            if (value == "squared") c.lstm.loss = LstmLoss::SquaredError;
            else if (value == "cross_entropy") c.lstm.loss = LstmLoss::CrossEntropy;
            else throw ConfigError("loss must be squared or cross_entropy");
        }
        else if (key == "threshold") c.lstm.threshold = std::stod(value);
        else bad_key();
    } else if (section == "output") {
        if (key == "dir") c.out_dir = value;
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "jobs") c.jobs = std::stoi(value);
        else if (key == "determinism") {
            if (value == "strict") c.determinism = DeterminismMode::Strict;
            else if (value == "fast") c.determinism = DeterminismMode::Fast;
            else throw ConfigError("determinism must be strict or fast");
        }
        else bad_key();
    } else {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
    }
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text, const std::string& origin) {
    PipelineConfig config;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        apply_key(config, section, key, value, origin, lineno);
    }
    return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_text_file(path), path);
}

void validate_composition(const PipelineConfig& config) {
    if (config.technique < 1 || config.technique > 3)
        throw ConfigError("technique must be 1, 2 or 3");
    if (config.technique == 3) {
        if (config.model != ModelKind::Lstm)
            throw ConfigError("technique 3 produces sequences and pairs only with the lstm model");
        if (config.selection.kind != SelectionKind::All)
            throw ConfigError(
                "technique 3 does not support candidate selection; sentence sequences cannot be "
                "divided");
    } else if (config.model == ModelKind::Lstm) {
        throw ConfigError("the lstm model requires technique 3 sequences");
    }
    if (config.selection.kind == SelectionKind::Cluster &&
        (config.selection.x < 1 || config.selection.x >= config.selection.y))
        throw ConfigError("cluster selection requires 1 <= x < y");
}

namespace {

std::vector<std::pair<std::string, std::string>> config_echo(const PipelineConfig& c) {
    std::vector<std::pair<std::string, std::string>> e;
    auto put = [&](const std::string& k, const std::string& v) { e.emplace_back(k, v); };
    put("corpus.train", c.train_path);
    put("corpus.test", c.test_path);
    put("corpus.format", c.corpus_format == CorpusFormat::Xml ? "xml" : "tsv");
    put("corpus.aux_text", c.aux_text_path);
    put("embedding.dimension", std::to_string(c.embedding.dimension));
    put("embedding.window", std::to_string(c.embedding.window));
    put("embedding.epochs", std::to_string(c.embedding.epochs));
    put("embedding.learning_rate", fmt_g9(c.embedding.learning_rate));
    put("embedding.negative_samples", std::to_string(c.embedding.negative_samples));
    put("embedding.min_count", std::to_string(c.embedding.min_count));
    put("embedding.seed", std::to_string(c.embedding.rng_seed));
    put("representation.technique", std::to_string(c.technique));
    put("representation.distance_block",
        c.distance_block == DistanceBlock::Displacement ? "displacement" : "scalar_broadcast");
    put("selection.strategy", selection_kind_name(c.selection.kind));
    if (c.selection.kind == SelectionKind::Cluster) {
        put("selection.x", std::to_string(c.selection.x));
        put("selection.y", std::to_string(c.selection.y));
        put("selection.seed", std::to_string(c.selection_seed));
    }
    put("model.kind", model_kind_name(c.model));
    switch (c.model) {
        case ModelKind::Mlp: {
            std::vector<std::string> sizes;
            for (int s : c.mlp.layer_sizes) sizes.push_back(std::to_string(s));
            put("model.layer_sizes", join(sizes, ","));
            put("model.learning_rate", fmt_g9(c.mlp.learning_rate));
            put("model.momentum", fmt_g9(c.mlp.momentum));
            put("model.epochs", std::to_string(c.mlp.epochs));
            put("model.batch_size", std::to_string(c.mlp.batch_size));
            put("model.regularization", reg_kind_name(c.mlp.regularization));
            put("model.seed", std::to_string(c.mlp.rng_seed));
            break;
        }
        case ModelKind::Dbn: {
            std::vector<std::string> sizes;
            for (auto [v, h] : c.dbn.rbm_sizes) {
                sizes.push_back(std::to_string(v));
                sizes.push_back(std::to_string(h));
            }
            put("model.rbm_sizes", join(sizes, ","));
            put("model.alpha", fmt_g9(c.dbn.pretrain.alpha));
            put("model.pretrain_momentum", fmt_g9(c.dbn.pretrain.momentum));
            put("model.cd_steps", std::to_string(c.dbn.pretrain.cd_steps));
            put("model.pretrain_epochs", std::to_string(c.dbn.pretrain.epochs));
            put("model.batch_size", std::to_string(c.dbn.pretrain.batch_size));
            put("model.finetune_learning_rate", fmt_g9(c.dbn.finetune_learning_rate));
            put("model.finetune_momentum", fmt_g9(c.dbn.finetune_momentum));
            put("model.finetune_epochs", std::to_string(c.dbn.finetune_epochs));
            put("model.freeze_pretrained", c.dbn.freeze_pretrained ? "true" : "false");
            put("model.seed", std::to_string(c.dbn.rng_seed));
            break;
        }
        case ModelKind::Sae: {
            for (std::size_t i = 0; i < c.sae.autoencoders.size(); ++i) {
                const auto& ae = c.sae.autoencoders[i];
                std::string pre = "model.ae" + std::to_string(i + 1) + ".";
                put(pre + "input", std::to_string(ae.input));
                put(pre + "hidden", std::to_string(ae.hidden));
                put(pre + "activation", ae.activation == nn::Act::Tanh ? "tanh" : "sigmoid");
                put(pre + "learning_rate", fmt_g9(ae.learning_rate));
                put(pre + "momentum", fmt_g9(ae.momentum));
                put(pre + "sparsity_target", fmt_g9(ae.sparsity_target));
                put(pre + "sparsity_weight", fmt_g9(ae.sparsity_weight));
                put(pre + "epochs", std::to_string(ae.epochs));
                put(pre + "corruption", fmt_g9(ae.corruption));
            }
            put("model.finetune_learning_rate", fmt_g9(c.sae.finetune_learning_rate));
            put("model.finetune_momentum", fmt_g9(c.sae.finetune_momentum));
            put("model.finetune_epochs", std::to_string(c.sae.finetune_epochs));
            put("model.seed", std::to_string(c.sae.rng_seed));
            break;
        }
        case ModelKind::Lstm: {
            put("model.input_dimension", std::to_string(c.lstm.input_dimension));
            std::vector<std::string> sizes;
            for (int s : c.lstm.hidden_sizes) sizes.push_back(std::to_string(s));
            put("model.hidden_sizes", join(sizes, ","));
            put("model.learning_rate", fmt_g9(c.lstm.learning_rate));
            put("model.momentum", fmt_g9(c.lstm.momentum));
            put("model.epochs", std::to_string(c.lstm.epochs));
            put("model.frame", std::to_string(c.lstm.frame));
            put("model.loss",
                c.lstm.loss == LstmLoss::SquaredError ? "squared" : "cross_entropy");
            put("model.threshold", fmt_g9(c.lstm.threshold));
            put("model.seed", std::to_string(c.lstm.rng_seed));
            break;
        }
    }
    return e;
}

std::string echo_to_string(const std::vector<std::pair<std::string, std::string>>& echo) {
    std::string out;
    for (const auto& [k, v] : echo) out += k + " = " + v + "\n";
    return out;
}

std::vector<TokenizedSentence> load_aux_sentences(const std::string& path) {
    std::vector<TokenizedSentence> out;
    if (path.empty()) return out;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        auto t = tokenize_text(line);
        if (!t.tokens.empty()) out.push_back(std::move(t));
    }
    return out;
}

void check_widths(const PipelineConfig& c) {
    const int d = c.embedding.dimension;
    if (c.technique == 3) {
        if (c.lstm.input_dimension != 2 * d)
            throw ConfigError("lstm input_dimension must be 2*embedding dimension (" +
                              std::to_string(2 * d) + ")");
        return;
    }
    const int width = kTupleWidth * d;
    switch (c.model) {
        case ModelKind::Mlp:
            if (c.mlp.layer_sizes.empty() || c.mlp.layer_sizes.front() != width)
                throw ConfigError("mlp input width must be 5*embedding dimension (" +
                                  std::to_string(width) + ")");
            break;
        case ModelKind::Dbn:
            if (c.dbn.rbm_sizes.empty() || c.dbn.rbm_sizes.front().first != width)
                throw ConfigError("dbn visible width must be 5*embedding dimension (" +
                                  std::to_string(width) + ")");
            break;
        case ModelKind::Sae:
            if (c.sae.autoencoders.empty() || c.sae.autoencoders.front().input != width)
                throw ConfigError("sae input width must be 5*embedding dimension (" +
                                  std::to_string(width) + ")");
            break;
        case ModelKind::Lstm: break;
    }
}

}  // namespace

ScenarioResult run_scenario(const std::vector<AnnotatedSentence>& train,
                            const std::vector<AnnotatedSentence>& test,
                            const PipelineConfig& config) {
    validate_composition(config);
    check_widths(config);

    auto train_tok = tokenize_all(train);
    auto test_tok = tokenize_all(test);
    FrequencyTable freq = build_frequency_table(train_tok);

    std::vector<TokenizedSentence> emb_corpus = train_tok;
    emb_corpus.insert(emb_corpus.end(), test_tok.begin(), test_tok.end());
    for (auto& s : load_aux_sentences(config.aux_text_path)) emb_corpus.push_back(std::move(s));
    EmbeddingTable emb = train_cbow(emb_corpus, config.embedding);

    DrugLexicon train_lex = build_drug_lexicon(train);
    DrugLexicon test_lex = build_drug_lexicon(test);

    ScenarioResult result;
    result.gold = gold_nameset(test);

    if (config.technique == 3) {
        std::vector<std::string> train_ids, test_ids;
        for (const auto& s : train) train_ids.push_back(s.id);
        for (const auto& s : test) test_ids.push_back(s.id);
        auto seq_train = technique3_sequences(train_tok, emb, train_lex, config.distance_block,
                                              &train_ids);
        auto seq_test =
            technique3_sequences(test_tok, emb, test_lex, config.distance_block, &test_ids);
        result.train_samples = seq_train.size();
        result.test_tuples_all = result.test_tuples_selected = seq_test.size();
        auto trained = lstm_train(seq_train, config.lstm);
        auto pred = lstm_predict(trained.params, seq_test, config.lstm.threshold);
        result.extracted = sequences_to_nameset(pred, seq_test);
    } else {
        auto make_tuples = [&](const std::vector<TokenizedSentence>& toks,
                               const DrugLexicon& lex) {
            return config.technique == 1 ? technique1_tuples(toks, emb, lex)
                                         : technique2_tuples(toks, emb, lex);
        };
        auto tuples_train = make_tuples(train_tok, train_lex);
        auto tuples_test = make_tuples(test_tok, test_lex);
        result.train_samples = tuples_train.size();
        result.test_tuples_all = tuples_test.size();
        auto selected = apply_selection(tuples_test, config.selection, freq, config.selection_seed);
        result.test_tuples_selected = selected.size();

        Prediction pred;
        switch (config.model) {
            case ModelKind::Mlp: {
                auto [params, report] = mlp_train(tuples_train, config.mlp);
                pred = mlp_predict(params, selected);
                break;
            }
            case ModelKind::Dbn: {
                auto model = dbn_train(tuples_train, config.dbn);
                pred = dbn_predict(model, selected);
                break;
            }
            case ModelKind::Sae: {
                auto model = sae_train(tuples_train, config.sae);
                pred = sae_predict(model, selected);
                break;
            }
            case ModelKind::Lstm:
                throw ConfigError("unreachable: lstm with tuple technique");
        }
        result.extracted = tuples_to_nameset(pred.classes, selected);
    }
    result.report = score(result.extracted, result.gold);
    return result;
}

CrossValidationResult cross_validate(const std::vector<AnnotatedSentence>& corpus,
                                     const PipelineConfig& config, int k_runs,
                                     double train_fraction, std::uint64_t base_seed) {
    if (k_runs < 1) throw ConfigError("cross_validate: k_runs must be >= 1");
    if (train_fraction <= 0.0 || train_fraction > 1.0)
        throw ConfigError("cross_validate: train_fraction must be in (0, 1]");
    if (corpus.size() < 2) throw ConfigError("cross_validate: corpus too small to split");

    CrossValidationResult result;
    for (int run = 0; run < k_runs; ++run) {
        std::vector<std::size_t> idx(corpus.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(base_seed + static_cast<std::uint64_t>(run));
        rng.shuffle(idx);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(corpus.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, corpus.size());
        std::vector<AnnotatedSentence> train, test;
        for (std::size_t i = 0; i < n_train; ++i) train.push_back(corpus[idx[i]]);
        for (std::size_t i = n_train; i < idx.size(); ++i) test.push_back(corpus[idx[i]]);
        if (test.empty()) {
            warn("cross_validate: train_fraction leaves no test split, testing on train");
            test = train;
        }
        result.runs.push_back(run_scenario(train, test, config).report);
    }

    auto& mean = result.mean;
    auto& mn = result.min;
    auto& mx = result.max;
    mn.precision = mn.recall = mn.f_score = 1.0;
    for (const auto& r : result.runs) {
        mean.precision += r.precision;
        mean.recall += r.recall;
        mean.f_score += r.f_score;
        mean.true_positive += r.true_positive;
        mean.false_positive += r.false_positive;
        mean.false_negative += r.false_negative;
        mn.precision = std::min(mn.precision, r.precision);
        mn.recall = std::min(mn.recall, r.recall);
        mn.f_score = std::min(mn.f_score, r.f_score);
        mx.precision = std::max(mx.precision, r.precision);
        mx.recall = std::max(mx.recall, r.recall);
        mx.f_score = std::max(mx.f_score, r.f_score);
    }
    mean.precision /= result.runs.size();
    mean.recall /= result.runs.size();
    mean.f_score /= result.runs.size();
    return result;
}

std::vector<std::pair<std::string, std::string>> model_config_echo(const PipelineConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& [k, v] : config_echo(config))
        if (k.rfind("model.", 0) == 0) out.emplace_back(k, v);
    return out;
}

std::string scenario_manifest(const PipelineConfig& config, const ScenarioResult& result,
                              const std::vector<std::pair<std::string, std::string>>& checksums) {
    std::string out;
    out += "scenario = technique" + std::to_string(config.technique) + "+" +
           model_kind_name(config.model) + "\n";
    out += echo_to_string(config_echo(config));
    for (const auto& [k, v] : checksums) out += "checksum." + k + " = " + v + "\n";
    out += "counts.train_samples = " + std::to_string(result.train_samples) + "\n";
    out += "counts.test_all = " + std::to_string(result.test_tuples_all) + "\n";
    out += "counts.test_selected = " + std::to_string(result.test_tuples_selected) + "\n";
    return out;
}

namespace {

struct Cache {
    fs::path dir;
    fs::path path(const std::string& stage, std::uint64_t key, const std::string& ext) const {
        return dir / (stage + "-" + hash_hex(key) + ext);
    }
};

// Stage artifacts round-trip through files so warm and cold runs read
// identical bytes.
struct Staged {
    std::string train_raw, test_raw, aux_raw;
    std::vector<AnnotatedSentence> train, test;
};

}  // namespace

ScenarioResult run_pipeline(const PipelineConfig& config) {
    validate_composition(config);
    check_widths(config);

    fs::create_directories(config.out_dir);
    Cache cache{fs::path(config.out_dir) / "cache"};
    fs::create_directories(cache.dir);

    Staged staged;
    staged.train_raw = read_text_file(config.train_path);
    staged.test_raw = read_text_file(config.test_path);
    if (!config.aux_text_path.empty()) staged.aux_raw = read_text_file(config.aux_text_path);
    staged.train = config.corpus_format == CorpusFormat::Xml
                       ? parse_corpus_xml_text(staged.train_raw, config.train_path)
                       : parse_corpus_tsv_text(staged.train_raw, config.train_path);
    staged.test = config.corpus_format == CorpusFormat::Xml
                      ? parse_corpus_xml_text(staged.test_raw, config.test_path)
                      : parse_corpus_tsv_text(staged.test_raw, config.test_path);

    const auto echo = config_echo(config);
    std::uint64_t h_corpus = fnv1a64(staged.train_raw);
    h_corpus = fnv1a64_mix(h_corpus, staged.test_raw);
    h_corpus = fnv1a64_mix(h_corpus, staged.aux_raw);

    std::vector<std::pair<std::string, std::string>> checksums;
    checksums.emplace_back("corpus.train", hash_hex(fnv1a64(staged.train_raw)));
    checksums.emplace_back("corpus.test", hash_hex(fnv1a64(staged.test_raw)));
    if (!config.aux_text_path.empty())
        checksums.emplace_back("corpus.aux", hash_hex(fnv1a64(staged.aux_raw)));

    // --- embedding stage ---
    std::string emb_echo;
    for (const auto& [k, v] : echo)
        if (k.rfind("embedding.", 0) == 0) emb_echo += k + "=" + v + ";";
    std::uint64_t h_emb = fnv1a64_mix(h_corpus, emb_echo);
    fs::path emb_path = cache.path("embed", h_emb, ".txt");
    if (!fs::exists(emb_path)) {
        auto train_tok = tokenize_all(staged.train);
        auto test_tok = tokenize_all(staged.test);
        std::vector<TokenizedSentence> corpus = train_tok;
        corpus.insert(corpus.end(), test_tok.begin(), test_tok.end());
        for (auto& s : load_aux_sentences(config.aux_text_path)) corpus.push_back(std::move(s));
        EmbeddingTable emb = train_cbow(corpus, config.embedding);
        save_embedding_text(emb, emb_path.string());
    }
    EmbeddingTable emb = load_embedding_text(emb_path.string());
    checksums.emplace_back("embedding", hash_hex(fnv1a64(read_text_file(emb_path.string()))));

    FrequencyTable freq = build_frequency_table(tokenize_all(staged.train));
    DrugLexicon train_lex = build_drug_lexicon(staged.train);
    DrugLexicon test_lex = build_drug_lexicon(staged.test);

    ScenarioResult result;
    result.gold = gold_nameset(staged.test);

    std::string repr_echo = "technique=" + std::to_string(config.technique) + ";block=" +
                            (config.distance_block == DistanceBlock::Displacement ? "d" : "s");
    std::uint64_t h_repr = fnv1a64_mix(h_emb, repr_echo);

    std::string model_echo;
    for (const auto& [k, v] : echo)
        if (k.rfind("model.", 0) == 0) model_echo += k + "=" + v + ";";

    const fs::path out_dir(config.out_dir);

    if (config.technique == 3) {
        fs::path train_ds = cache.path("sequences-train", h_repr, ".tsv");
        fs::path test_ds = cache.path("sequences-test", h_repr, ".tsv");
        if (!fs::exists(train_ds) || !fs::exists(test_ds)) {
            std::vector<std::string> train_ids, test_ids;
            for (const auto& s : staged.train) train_ids.push_back(s.id);
            for (const auto& s : staged.test) test_ids.push_back(s.id);
            write_text_file(train_ds.string(),
                            sequences_to_tsv(technique3_sequences(tokenize_all(staged.train), emb,
                                                                  train_lex, config.distance_block,
                                                                  &train_ids)));
            write_text_file(test_ds.string(),
                            sequences_to_tsv(technique3_sequences(tokenize_all(staged.test), emb,
                                                                  test_lex, config.distance_block,
                                                                  &test_ids)));
        }
        auto seq_train = sequences_from_tsv(read_text_file(train_ds.string()));
        auto seq_test = sequences_from_tsv(read_text_file(test_ds.string()));
        result.train_samples = seq_train.size();
        result.test_tuples_all = result.test_tuples_selected = seq_test.size();

        std::uint64_t h_model = fnv1a64_mix(fnv1a64_mix(h_repr, model_echo), "lstm");
        fs::path ckpt_path = cache.path("model", h_model, ".ckpt");
        fs::path log_path = cache.path("model", h_model, ".log");
        if (!fs::exists(ckpt_path)) {
            auto trained = lstm_train(seq_train, config.lstm);
            save_checkpoint(lstm_to_checkpoint(trained.params, config.lstm.rng_seed,
                                               model_config_echo(config)),
                            ckpt_path.string());
            write_text_file(log_path.string(), train_report_to_log(trained.report));
        }
        LstmParams params = lstm_from_checkpoint(load_checkpoint(ckpt_path.string()));
        auto pred = lstm_predict(params, seq_test, config.lstm.threshold);
        result.extracted = sequences_to_nameset(pred, seq_test);

        fs::copy_file(train_ds, out_dir / "train_dataset.tsv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(test_ds, out_dir / "test_dataset.tsv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(ckpt_path, out_dir / "model.ckpt", fs::copy_options::overwrite_existing);
        if (fs::exists(log_path))
            fs::copy_file(log_path, out_dir / "train_log.txt",
                          fs::copy_options::overwrite_existing);
    } else {
        fs::path train_ds = cache.path("tuples-train", h_repr, ".tsv");
        fs::path test_ds = cache.path("tuples-test", h_repr, ".tsv");
        if (!fs::exists(train_ds) || !fs::exists(test_ds)) {
            auto make = [&](const std::vector<AnnotatedSentence>& sents, const DrugLexicon& lex) {
                auto toks = tokenize_all(sents);
                return config.technique == 1 ? technique1_tuples(toks, emb, lex)
                                             : technique2_tuples(toks, emb, lex);
            };
            write_text_file(train_ds.string(), tuples_to_tsv(make(staged.train, train_lex)));
            write_text_file(test_ds.string(), tuples_to_tsv(make(staged.test, test_lex)));
        }
        auto tuples_train = tuples_from_tsv(read_text_file(train_ds.string()));
        auto tuples_test = tuples_from_tsv(read_text_file(test_ds.string()));
        result.train_samples = tuples_train.size();
        result.test_tuples_all = tuples_test.size();

        std::string sel_echo = std::string("strategy=") + selection_kind_name(config.selection.kind) +
                               ";x=" + std::to_string(config.selection.x) +
                               ";y=" + std::to_string(config.selection.y) +
                               ";seed=" + std::to_string(config.selection_seed);
        std::uint64_t h_sel = fnv1a64_mix(h_repr, sel_echo);
        fs::path sel_ds = cache.path("selected", h_sel, ".tsv");
        if (!fs::exists(sel_ds)) {
            auto selected =
                apply_selection(tuples_test, config.selection, freq, config.selection_seed);
            write_text_file(sel_ds.string(), tuples_to_tsv(selected));
        }
        auto selected = tuples_from_tsv(read_text_file(sel_ds.string()));
        result.test_tuples_selected = selected.size();
        write_text_file((out_dir / "selection_manifest.txt").string(),
                        selection_manifest(config.selection, tuples_test.size(), selected.size(),
                                           config.selection_seed));

        std::uint64_t h_model = fnv1a64_mix(fnv1a64_mix(h_repr, model_echo),
                                            model_kind_name(config.model));
        fs::path ckpt_path = cache.path("model", h_model, ".ckpt");
        fs::path log_path = cache.path("model", h_model, ".log");
        if (!fs::exists(ckpt_path)) {
            switch (config.model) {
                case ModelKind::Mlp: {
                    auto [params, report] = mlp_train(tuples_train, config.mlp);
                    save_checkpoint(net_to_checkpoint(params.net, "mlp", config.mlp.rng_seed,
                                                      model_config_echo(config)),
                                    ckpt_path.string());
                    write_text_file(log_path.string(), train_report_to_log(report));
                    break;
                }
                case ModelKind::Dbn: {
                    auto model = dbn_train(tuples_train, config.dbn);
                    save_checkpoint(net_to_checkpoint(model.net, "dbn", config.dbn.rng_seed,
                                                      model_config_echo(config)),
                                    ckpt_path.string());
                    write_text_file(log_path.string(), train_report_to_log(model.finetune));
                    break;
                }
                case ModelKind::Sae: {
                    auto model = sae_train(tuples_train, config.sae);
                    save_checkpoint(net_to_checkpoint(model.net, "sae", config.sae.rng_seed,
                                                      model_config_echo(config)),
                                    ckpt_path.string());
                    write_text_file(log_path.string(), train_report_to_log(model.finetune));
                    break;
                }
                case ModelKind::Lstm: throw ConfigError("unreachable");
            }
        }
        Checkpoint ckpt = load_checkpoint(ckpt_path.string());
        nn::Net net = net_from_checkpoint(ckpt);
        std::vector<std::vector<double>> X;
        X.reserve(selected.size());
        for (const auto& t : selected) X.emplace_back(t.vec.begin(), t.vec.end());
        if (ckpt.kind == "dbn") X = scale_unit_interval(X);
        Prediction pred = net_predict_classes(net, X);
        result.extracted = tuples_to_nameset(pred.classes, selected);

        fs::copy_file(train_ds, out_dir / "train_dataset.tsv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(test_ds, out_dir / "test_dataset.tsv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(sel_ds, out_dir / "test_selected.tsv",
                      fs::copy_options::overwrite_existing);
        fs::copy_file(ckpt_path, out_dir / "model.ckpt", fs::copy_options::overwrite_existing);
        if (fs::exists(log_path))
            fs::copy_file(log_path, out_dir / "train_log.txt",
                          fs::copy_options::overwrite_existing);
    }

    fs::copy_file(emb_path, out_dir / "embedding.txt", fs::copy_options::overwrite_existing);
    result.report = score(result.extracted, result.gold);
    write_text_file((out_dir / "report.txt").string(), report_to_text(result.report));
    write_text_file((out_dir / "manifest.txt").string(),
                    scenario_manifest(config, result, checksums));
    return result;
}

}  // namespace drugner
