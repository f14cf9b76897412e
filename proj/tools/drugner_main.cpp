// drugner: drug name extraction pipeline over annotated medical text.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

#include "drugner/checkpoint.hpp"
#include "drugner/pipeline.hpp"
#include "drugner/util.hpp"

namespace fs = std::filesystem;
using namespace drugner;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out = "out";
    int jobs = 0;  // 0 = pick by determinism mode
    std::string determinism = "strict";
};

CorpusFormat format_from(const std::string& name) {
    if (name == "xml") return CorpusFormat::Xml;
    if (name == "tsv") return CorpusFormat::Tsv;
    throw ConfigError("format must be xml or tsv");
}

void cmd_ingest(const std::string& input, const std::string& format, const GlobalOpts& g) {
    auto sentences = parse_semeval_corpus(input, format_from(format));
    if (sentences.empty()) warn("ingest: no sentences found in " + input);
    fs::create_directories(g.out);
    write_text_file((fs::path(g.out) / "corpus.tsv").string(), corpus_to_tsv(sentences));
    FrequencyTable freq = build_frequency_table(tokenize_all(sentences));
    write_text_file((fs::path(g.out) / "freq.tsv").string(), frequency_table_to_tsv(freq));
    std::cout << "ingested " << sentences.size() << " sentences, " << freq.total_tokens()
              << " tokens (" << freq.unique_tokens() << " unique)\n";
}

void cmd_stats(const std::string& store, int parts, const GlobalOpts& g) {
    auto sentences = parse_semeval_corpus(store, CorpusFormat::Tsv);
    FrequencyTable freq = build_frequency_table(tokenize_all(sentences));
    std::string report = stats_report(freq, parts);
    std::cout << report;
    fs::create_directories(g.out);
    write_text_file((fs::path(g.out) / "stats.txt").string(), report);
}

void cmd_embed(const std::vector<std::string>& stores, const std::string& aux, CbowConfig config,
               bool binary, const GlobalOpts& g) {
    std::vector<TokenizedSentence> corpus;
    for (const auto& store : stores) {
        auto sentences = parse_semeval_corpus(store, CorpusFormat::Tsv);
        for (auto& t : tokenize_all(sentences)) corpus.push_back(std::move(t));
    }
    if (!aux.empty()) {
        std::istringstream in(read_text_file(aux));
        std::string line;
        while (std::getline(in, line)) {
            auto t = tokenize_text(line);
            if (!t.tokens.empty()) corpus.push_back(std::move(t));
        }
    }
    EmbeddingTable table = train_cbow(corpus, config);
    fs::create_directories(g.out);
    fs::path out = fs::path(g.out) / (binary ? "embedding.bin" : "embedding.txt");
    if (binary) {
        save_embedding_binary(table, out.string());
    } else {
        save_embedding_text(table, out.string());
    }
    std::cout << "trained " << table.size() << " vectors of dimension " << table.dimension()
              << " -> " << out.string() << "\n";
}

void cmd_represent(const std::string& store, const std::string& emb_path, int technique,
                   const std::string& block, const GlobalOpts& g) {
    auto sentences = parse_semeval_corpus(store, CorpusFormat::Tsv);
    EmbeddingTable emb = load_embedding_text(emb_path);
    DrugLexicon lexicon = build_drug_lexicon(sentences);
    auto toks = tokenize_all(sentences);
    fs::create_directories(g.out);
    if (technique == 3) {
        std::vector<std::string> ids;
        for (const auto& s : sentences) ids.push_back(s.id);
        DistanceBlock b = block == "scalar_broadcast" ? DistanceBlock::ScalarBroadcast
                                                      : DistanceBlock::Displacement;
        auto seqs = technique3_sequences(toks, emb, lexicon, b, &ids);
        fs::path out = fs::path(g.out) / "sequences.tsv";
        write_text_file(out.string(), sequences_to_tsv(seqs));
        std::cout << "wrote " << seqs.size() << " sequences -> " << out.string() << "\n";
    } else if (technique == 1 || technique == 2) {
        auto tuples = technique == 1 ? technique1_tuples(toks, emb, lexicon)
                                     : technique2_tuples(toks, emb, lexicon);
        fs::path out = fs::path(g.out) / "tuples.tsv";
        write_text_file(out.string(), tuples_to_tsv(tuples));
        std::cout << "wrote " << tuples.size() << " tuples -> " << out.string() << "\n";
    } else {
        throw ConfigError("technique must be 1, 2 or 3");
    }
}

void cmd_select(const std::string& dataset, const std::string& freq_path,
                const std::string& strategy, int x, int y, const GlobalOpts& g) {
    auto tuples = tuples_from_tsv(read_text_file(dataset));
    FrequencyTable freq = frequency_table_from_tsv(read_text_file(freq_path));
    SelectionStrategy s;
    s.kind = selection_kind_from(strategy);
    s.x = x;
    s.y = y;
    auto kept = apply_selection(tuples, s, freq, g.seed);
    fs::create_directories(g.out);
    write_text_file((fs::path(g.out) / "selected.tsv").string(), tuples_to_tsv(kept));
    write_text_file((fs::path(g.out) / "selection_manifest.txt").string(),
                    selection_manifest(s, tuples.size(), kept.size(), g.seed));
    std::cout << "kept " << kept.size() << " of " << tuples.size() << " tuples\n";
}

void cmd_train(const std::string& dataset, const std::string& config_path, const GlobalOpts& g) {
    PipelineConfig config =
        config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
    fs::create_directories(g.out);
    fs::path ckpt = fs::path(g.out) / "model.ckpt";
    fs::path log = fs::path(g.out) / "train_log.txt";
    if (config.model == ModelKind::Lstm) {
        auto sequences = sequences_from_tsv(read_text_file(dataset));
        if (!sequences.empty() && !sequences.front().steps.empty())
            config.lstm.input_dimension =
                static_cast<int>(sequences.front().steps.front().features.size());
        auto trained = lstm_train(sequences, config.lstm);
        save_checkpoint(lstm_to_checkpoint(trained.params, config.lstm.rng_seed,
                                           model_config_echo(config)),
                        ckpt.string());
        write_text_file(log.string(), train_report_to_log(trained.report));
    } else {
        auto tuples = tuples_from_tsv(read_text_file(dataset));
        if (!tuples.empty()) {
            int width = static_cast<int>(tuples.front().vec.size());
            if (config.mlp.layer_sizes.front() != width && config.model == ModelKind::Mlp)
                throw ConfigError("dataset width " + std::to_string(width) +
                                  " does not match model.layer_sizes");
        }
        switch (config.model) {
            case ModelKind::Mlp: {
                auto [params, report] = mlp_train(tuples, config.mlp);
                save_checkpoint(net_to_checkpoint(params.net, "mlp", config.mlp.rng_seed,
                                                  model_config_echo(config)),
                                ckpt.string());
                write_text_file(log.string(), train_report_to_log(report));
                break;
            }
            case ModelKind::Dbn: {
                auto model = dbn_train(tuples, config.dbn);
                save_checkpoint(net_to_checkpoint(model.net, "dbn", config.dbn.rng_seed,
                                                  model_config_echo(config)),
                                ckpt.string());
                write_text_file(log.string(), train_report_to_log(model.finetune));
                break;
            }
            case ModelKind::Sae: {
                auto model = sae_train(tuples, config.sae);
                save_checkpoint(net_to_checkpoint(model.net, "sae", config.sae.rng_seed,
                                                  model_config_echo(config)),
                                ckpt.string());
                write_text_file(log.string(), train_report_to_log(model.finetune));
                break;
            }
            case ModelKind::Lstm: break;
        }
    }
    std::cout << "checkpoint -> " << ckpt.string() << "\n";
}

void cmd_evaluate(const std::string& ckpt_path, const std::string& dataset,
                  const std::string& gold_store, double threshold, const GlobalOpts& g) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    NameSet gold = gold_nameset(parse_semeval_corpus(gold_store, CorpusFormat::Tsv));
    NameSet extracted;
    if (ckpt.kind == "lstm") {
        auto sequences = sequences_from_tsv(read_text_file(dataset));
        LstmParams params = lstm_from_checkpoint(ckpt);
        extracted = sequences_to_nameset(lstm_predict(params, sequences, threshold), sequences);
    } else {
        auto tuples = tuples_from_tsv(read_text_file(dataset));
        nn::Net net = net_from_checkpoint(ckpt);
        std::vector<std::vector<double>> X;
        X.reserve(tuples.size());
        for (const auto& t : tuples) X.emplace_back(t.vec.begin(), t.vec.end());
        if (ckpt.kind == "dbn") X = scale_unit_interval(X);
        extracted = tuples_to_nameset(net_predict_classes(net, X).classes, tuples);
    }
    EvalReport report = score(extracted, gold);
    std::string text = report_to_text(report);
    std::cout << text;
    fs::create_directories(g.out);
    write_text_file((fs::path(g.out) / "report.txt").string(), text);
}

int cmd_pipeline(const std::vector<std::string>& config_paths, const GlobalOpts& g) {
    int jobs = g.jobs;
    if (jobs <= 0)
        jobs = g.determinism == "fast"
                   ? std::max(1u, std::thread::hardware_concurrency())
                   : 1;
    std::vector<PipelineConfig> configs;
    for (const auto& path : config_paths) {
        PipelineConfig c = load_pipeline_config(path);
        if (config_paths.size() == 1) {
            if (c.out_dir == "out") c.out_dir = g.out;
        } else {
            c.out_dir = (fs::path(g.out) / fs::path(path).stem()).string();
        }
        c.determinism = g.determinism == "fast" ? DeterminismMode::Fast : DeterminismMode::Strict;
        configs.push_back(std::move(c));
    }

    std::vector<std::string> failures(configs.size());
    std::vector<int> codes(configs.size(), 0);
    std::vector<std::string> summaries(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) break;
            try {
                ScenarioResult r = run_pipeline(configs[i]);
                summaries[i] = config_paths[i] + ": P=" + fmt_f4(r.report.precision) +
                               " R=" + fmt_f4(r.report.recall) +
                               " F=" + fmt_f4(r.report.f_score) + " -> " + configs[i].out_dir;
            } catch (const ConfigError& e) {
                failures[i] = e.what();
                codes[i] = 1;
            } catch (const DivergenceError& e) {
                failures[i] = e.what();
                codes[i] = 3;
            } catch (const std::exception& e) {
                failures[i] = e.what();
                codes[i] = 2;
            }
        }
    };
    if (jobs == 1 || configs.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int rc = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!failures[i].empty()) {
            std::cerr << "error: " << config_paths[i] << ": " << failures[i] << "\n";
            rc = codes[i];
        } else {
            std::cout << summaries[i] << "\n";
        }
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drug name extraction pipeline"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "global rng seed")->envname("DRUGNER_SEED");
    app.add_option("--out", g.out, "output directory")->envname("DRUGNER_OUT");
    app.add_option("--jobs", g.jobs, "parallel pipeline jobs")->envname("DRUGNER_JOBS");
    app.add_option("--determinism", g.determinism, "strict|fast")
        ->check(CLI::IsMember({"strict", "fast"}))
        ->envname("DRUGNER_DETERMINISM");

    std::string input, format = "tsv", store, emb_path, aux, dataset, freq_path, ckpt_path;
    std::string gold_store, config_path, strategy = "all", block = "displacement";
    std::vector<std::string> stores, config_paths;
    int parts = 3, technique = 2, x = 2, y = 3;
    double threshold = 0.5;
    bool binary = false;
    CbowConfig cbow;

    auto* ingest = app.add_subcommand("ingest", "parse a corpus into the canonical store");
    ingest->add_option("--input", input, "corpus file")->required();
    ingest->add_option("--format", format, "xml|tsv")->check(CLI::IsMember({"xml", "tsv"}));

    auto* stats = app.add_subcommand("stats", "token distribution report");
    stats->add_option("--store", store, "corpus.tsv from ingest")->required();
    stats->add_option("--parts", parts, "cumulative-frequency partitions");

    auto* embed = app.add_subcommand("embed", "train CBOW embeddings");
    embed->add_option("--store", stores, "corpus store(s)")->required();
    embed->add_option("--aux", aux, "auxiliary plain-text corpus");
    embed->add_option("--dimension", cbow.dimension, "vector dimension");
    embed->add_option("--window", cbow.window, "context window per side");
    embed->add_option("--epochs", cbow.epochs, "training epochs");
    embed->add_option("--learning-rate", cbow.learning_rate, "initial learning rate");
    embed->add_option("--negative", cbow.negative_samples, "negative samples");
    embed->add_option("--min-count", cbow.min_count, "minimum token count");
    embed->add_flag("--binary", binary, "write the binary format");

    auto* represent = app.add_subcommand("represent", "build a labeled dataset");
    represent->add_option("--store", store, "corpus store")->required();
    represent->add_option("--emb", emb_path, "embedding file")->required();
    represent->add_option("--technique", technique, "1|2|3");
    represent->add_option("--distance-block", block, "displacement|scalar_broadcast");

    auto* select = app.add_subcommand("select", "candidate selection on a tuple dataset");
    select->add_option("--dataset", dataset, "tuples.tsv")->required();
    select->add_option("--freq", freq_path, "freq.tsv of the training corpus")->required();
    select->add_option("--strategy", strategy, "all|lower_two_thirds|cluster");
    select->add_option("-x", x, "clusters kept");
    select->add_option("-y", y, "clusters formed");

    auto* train = app.add_subcommand("train", "train a classifier on a dataset");
    train->add_option("--dataset", dataset, "tuples.tsv or sequences.tsv")->required();
    train->add_option("--config", config_path, "pipeline config supplying the [model] section");

    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint against gold names");
    evaluate->add_option("--ckpt", ckpt_path, "model checkpoint")->required();
    evaluate->add_option("--dataset", dataset, "test dataset")->required();
    evaluate->add_option("--gold", gold_store, "gold corpus store")->required();
    evaluate->add_option("--threshold", threshold, "lstm decision threshold");

    auto* pipeline = app.add_subcommand("pipeline", "run full scenarios from config files");
    pipeline->add_option("configs", config_paths, "pipeline config file(s)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        cbow.rng_seed = g.seed;
        if (*ingest) cmd_ingest(input, format, g);
        else if (*stats) cmd_stats(store, parts, g);
        else if (*embed) cmd_embed(stores, aux, cbow, binary, g);
        else if (*represent) cmd_represent(store, emb_path, technique, block, g);
        else if (*select) cmd_select(dataset, freq_path, strategy, x, y, g);
        else if (*train) cmd_train(dataset, config_path, g);
        else if (*evaluate) cmd_evaluate(ckpt_path, dataset, gold_store, threshold, g);
        else if (*pipeline) return cmd_pipeline(config_paths, g);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
