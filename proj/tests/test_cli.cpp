#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "drugner/corpus.hpp"
#include "drugner/util.hpp"
#include "support/fixtures.hpp"

using namespace drugner;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(DRUGNER_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string capture(const std::string& args, const fs::path& dir) {
    auto out_file = dir / "stdout.txt";
    std::string cmd = std::string(DRUGNER_CLI_PATH) + " " + args + " >" + out_file.string() +
                      " 2>" + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    return read_text_file(out_file.string());
}

std::string fixture_config(const fs::path& dir, const std::string& out_name) {
    auto corpus = fixtures::random_corpus(25, 99);
    auto train = dir / "train.tsv";
    write_text_file(train.string(), corpus_to_tsv(corpus.sentences));
    std::string ini =
        "[corpus]\ntrain = " + train.string() + "\ntest = " + train.string() +
        "\nformat = tsv\n"
        "[embedding]\ndimension = 4\nepochs = 2\nseed = 3\n"
        "[representation]\ntechnique = 2\n"
        "[selection]\nstrategy = all\n"
        "[model]\nkind = mlp\nlayer_sizes = 20,8,6\nlearning_rate = 0.1\nmomentum = 0.9\n"
        "epochs = 15\nbatch_size = 20\nseed = 4\n"
        "[output]\ndir = " + (dir / out_name).string() + "\n";
    auto cfg = dir / (out_name + ".ini");
    write_text_file(cfg.string(), ini);
    return cfg.string();
}

}  // namespace

TEST_CASE("ingest writes the store and exits 0; empty input warns but succeeds") {
    auto dir = fixtures::temp_dir("cli-ingest");
    auto corpus = fixtures::drugbank_sample();
    auto input = dir / "in.tsv";
    write_text_file(input.string(), corpus_to_tsv(corpus));
    CHECK(run("--out " + (dir / "o").string() + " ingest --input " + input.string() +
              " --format tsv") == 0);
    CHECK(fs::exists(dir / "o" / "corpus.tsv"));
    CHECK(fs::exists(dir / "o" / "freq.tsv"));

    auto empty = dir / "empty.tsv";
    write_text_file(empty.string(), "");
    CHECK(run("--out " + (dir / "o2").string() + " ingest --input " + empty.string() +
              " --format tsv") == 0);
}

TEST_CASE("bad xml exits 2 and the message names a line") {
    auto dir = fixtures::temp_dir("cli-badxml");
    auto bad = dir / "bad.xml";
    write_text_file(bad.string(), "<document>\n<sentence id='s' text='x'>\n</document>\n");
    std::string cmd = std::string(DRUGNER_CLI_PATH) + " --out " + (dir / "o").string() +
                      " ingest --input " + bad.string() + " --format xml 2>" +
                      (dir / "err.txt").string();
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    auto err = read_text_file((dir / "err.txt").string());
    CHECK(err.find("line") != std::string::npos);
}

TEST_CASE("stats prints partition records") {
    auto dir = fixtures::temp_dir("cli-stats");
    auto corpus = fixtures::random_corpus(20, 7);
    auto store = dir / "corpus.tsv";
    write_text_file(store.string(), corpus_to_tsv(corpus.sentences));
    auto out = capture("--out " + (dir / "o").string() + " stats --store " + store.string() +
                           " --parts 3",
                       dir);
    CHECK(out.find("partition 1") != std::string::npos);
    CHECK(out.find("partition 3") != std::string::npos);
    CHECK(fs::exists(dir / "o" / "stats.txt"));
}

TEST_CASE("missing store exits 2") {
    auto dir = fixtures::temp_dir("cli-missing");
    CHECK(run("--out " + (dir / "o").string() + " stats --store " +
              (dir / "nope.tsv").string()) == 2);
}

TEST_CASE("embed then represent then select then train then evaluate chain") {
    auto dir = fixtures::temp_dir("cli-chain");
    auto corpus = fixtures::random_corpus(30, 17);
    auto input = dir / "in.tsv";
    write_text_file(input.string(), corpus_to_tsv(corpus.sentences));
    auto o = [&](const std::string& sub) { return (dir / sub).string(); };

    REQUIRE(run("--out " + o("ing") + " ingest --input " + input.string()) == 0);
    REQUIRE(run("--out " + o("emb") + " --seed 3 embed --store " + o("ing") +
                "/corpus.tsv --dimension 4 --epochs 2") == 0);
    REQUIRE(run("--out " + o("rep") + " represent --store " + o("ing") + "/corpus.tsv --emb " +
                o("emb") + "/embedding.txt --technique 2") == 0);
    REQUIRE(run("--out " + o("sel") + " select --dataset " + o("rep") + "/tuples.tsv --freq " +
                o("ing") + "/freq.tsv --strategy lower_two_thirds") == 0);
    CHECK(fs::exists(dir / "sel" / "selected.tsv"));
    CHECK(fs::exists(dir / "sel" / "selection_manifest.txt"));

    std::string ini =
        "[model]\nkind = mlp\nlayer_sizes = 20,8,6\nlearning_rate = 0.1\nmomentum = 0.9\n"
        "epochs = 10\nbatch_size = 20\nseed = 4\n";
    write_text_file((dir / "model.ini").string(), ini);
    REQUIRE(run("--out " + o("mod") + " train --dataset " + o("rep") + "/tuples.tsv --config " +
                (dir / "model.ini").string()) == 0);
    CHECK(fs::exists(dir / "mod" / "model.ckpt"));
    CHECK(fs::exists(dir / "mod" / "train_log.txt"));

    REQUIRE(run("--out " + o("ev") + " evaluate --ckpt " + o("mod") + "/model.ckpt --dataset " +
                o("rep") + "/tuples.tsv --gold " + o("ing") + "/corpus.tsv") == 0);
    auto report = read_text_file((dir / "ev" / "report.txt").string());
    CHECK(report.find("precision") != std::string::npos);
    CHECK(report.find("f_score") != std::string::npos);
}

TEST_CASE("pipeline runs a config end to end and repeat runs are byte-identical") {
    auto dir = fixtures::temp_dir("cli-pipe");
    auto cfg = fixture_config(dir, "run1");
    REQUIRE(run("pipeline " + cfg) == 0);
    auto report1 = read_text_file((dir / "run1" / "report.txt").string());

    auto cfg2 = fixture_config(dir, "run2");
    REQUIRE(run("pipeline " + cfg2) == 0);
    auto report2 = read_text_file((dir / "run2" / "report.txt").string());
    CHECK(report1 == report2);
    CHECK(read_text_file((dir / "run1" / "model.ckpt").string()) ==
          read_text_file((dir / "run2" / "model.ckpt").string()));
}

TEST_CASE("multi-config pipeline fan-out isolates outputs per config") {
    auto dir = fixtures::temp_dir("cli-fanout");
    auto cfg_a = fixture_config(dir, "a");
    auto cfg_b = fixture_config(dir, "b");
    REQUIRE(run("--determinism fast --jobs 2 --out " + (dir / "batch").string() + " pipeline " +
                cfg_a + " " + cfg_b) == 0);
    CHECK(fs::exists(dir / "batch" / "a" / "report.txt"));
    CHECK(fs::exists(dir / "batch" / "b" / "report.txt"));
}

TEST_CASE("binary embeddings round-trip through the cli") {
    auto dir = fixtures::temp_dir("cli-binemb");
    auto corpus = fixtures::random_corpus(12, 23);
    auto input = dir / "in.tsv";
    write_text_file(input.string(), corpus_to_tsv(corpus.sentences));
    REQUIRE(run("--out " + (dir / "i").string() + " ingest --input " + input.string()) == 0);
    REQUIRE(run("--out " + (dir / "e").string() + " embed --store " +
                (dir / "i" / "corpus.tsv").string() + " --dimension 4 --epochs 1 --binary") == 0);
    auto table = load_embedding_binary((dir / "e" / "embedding.bin").string());
    CHECK(table.dimension() == 4);
    CHECK(table.size() > 0);
}

TEST_CASE("invalid composition exits 1 naming the constraint") {
    auto dir = fixtures::temp_dir("cli-badcomp");
    auto corpus = fixtures::random_corpus(10, 3);
    auto train = dir / "train.tsv";
    write_text_file(train.string(), corpus_to_tsv(corpus.sentences));
    std::string ini =
        "[corpus]\ntrain = " + train.string() + "\ntest = " + train.string() + "\n" +
        "[representation]\ntechnique = 3\n"
        "[selection]\nstrategy = lower_two_thirds\n"
        "[model]\nkind = lstm\n"
        "[output]\ndir = " + (dir / "o").string() + "\n";
    auto cfg = dir / "bad.ini";
    write_text_file(cfg.string(), ini);
    std::string cmd = std::string(DRUGNER_CLI_PATH) + " pipeline " + cfg.string() + " 2>" +
                      (dir / "err.txt").string() + " >/dev/null";
    int status = std::system(cmd.c_str());
    auto err = read_text_file((dir / "err.txt").string());
    CHECK(err.find("selection") != std::string::npos);
    CHECK(WEXITSTATUS(status) != 0);
}

TEST_CASE("unknown flags and missing subcommand exit 1") {
    CHECK(run("--bogus") == 1);
    CHECK(run("") == 1);
}
