#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "emomix/config.hpp"
#include "emomix/models.hpp"
#include "emomix/vocab.hpp"

using namespace emomix;

namespace {

const char* kGoldenDefaults =
    "[paths]\n"
    "corpus_in = \n"
    "corpus_out = \n"
    "diagnostics_out = \n"
    "hindi_lexicon = \n"
    "english_lexicon = \n"
    "hashtag_map = \n"
    "vocab_out = \n"
    "vec_out = \n"
    "checkpoint_dir = \n"
    "history_out = \n"
    "report_out = \n"
    "grid_out = \n"
    "model_in = \n"
    "\n"
    "[embedding]\n"
    "size = 300\n"
    "window = 10\n"
    "negatives = 5\n"
    "epochs = 5\n"
    "lr_start = 0.025\n"
    "lr_floor = 0.0001\n"
    "mode = word\n"
    "nmin = 3\n"
    "nmax = 6\n"
    "buckets = 200000\n"
    "alpha = 0.75\n"
    "\n"
    "[cnn]\n"
    "dropout = 0.5\n"
    "stride = 1\n"
    "kernels = 200\n"
    "ks1 = 3\n"
    "ks2 = 6\n"
    "ks3 = 9\n"
    "ks4 = 12\n"
    "hidden1 = 256\n"
    "hidden2 = 64\n"
    "\n"
    "[rnn]\n"
    "lstm_units = 150\n"
    "input_dropout = 0.2\n"
    "recurrent_dropout = 0.2\n"
    "hidden = 64\n"
    "attn_dim = 64\n"
    "\n"
    "[training]\n"
    "epochs = 20\n"
    "batch_size = 64\n"
    "lr = 0.001\n"
    "adam_epsilon = 1e-08\n"
    "val_fraction = 0.1\n"
    "seed = 42\n"
    "max_len = 64\n"
    "min_count = 10\n"
    "architecture = attn_bilstm\n"
    "freeze_embedding = 0\n";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EMOMIX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string run_cli_capture(const std::string& args, const std::string& out_file) {
    const std::string cmd =
        std::string(EMOMIX_CLI_PATH) + " " + args + " >" + out_file + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    std::remove(out_file.c_str());
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("config defaults dump to the golden text") {
    CHECK(PipelineConfig().dump_string() == kGoldenDefaults);
}

TEST_CASE("config load") {
    const std::string path = "cfg_test.conf";
    SUBCASE("dump/load round trip") {
        PipelineConfig cfg;
        cfg.embedding.size = 64;
        cfg.training.architecture = "cnn";
        cfg.paths.corpus_in = "some.jsonl";
        write_file(path, cfg.dump_string());
        auto loaded = PipelineConfig::load(path);
        CHECK(loaded.dump_string() == cfg.dump_string());
    }
    SUBCASE("comments and blank lines are skipped") {
        write_file(path, "# a comment\n\n[training]\nepochs = 7\n");
        CHECK(PipelineConfig::load(path).training.epochs == 7);
    }
    SUBCASE("unknown keys are rejected with a line number") {
        write_file(path, "[training]\nnot_a_key = 1\n");
        try {
            PipelineConfig::load(path);
            FAIL("expected an exception");
        } catch (const std::exception& e) {
            const std::string msg = e.what();
            CHECK(msg.find("not_a_key") != std::string::npos);
            CHECK(msg.find("line 2") != std::string::npos);
        }
    }
    SUBCASE("bad values are rejected") {
        write_file(path, "[training]\nepochs = soon\n");
        CHECK_THROWS(PipelineConfig::load(path));
    }
    SUBCASE("missing file is rejected") { CHECK_THROWS(PipelineConfig::load("no_such.conf")); }
    std::remove(path.c_str());
}

TEST_CASE("config apply") {
    PipelineConfig cfg;
    cfg.apply("training.epochs", "3");
    CHECK(cfg.training.epochs == 3);
    cfg.apply("embedding.mode", "subword");
    CHECK(cfg.embedding.mode == "subword");
    cfg.apply("training.freeze_embedding", "true");
    CHECK(cfg.training.freeze_embedding);
    CHECK_THROWS(cfg.apply("training.unknown", "1"));
    CHECK_THROWS(cfg.apply("noseparator", "1"));
}

TEST_CASE("config validate") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("stride other than 1") {
        cfg.cnn.stride = 2;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("bad embedding mode") {
        cfg.embedding.mode = "glove";
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("val_fraction bounds") {
        cfg.training.val_fraction = 0.0;
        CHECK_THROWS(cfg.validate());
        cfg.training.val_fraction = 1.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("nmin > nmax") {
        cfg.embedding.nmin = 7;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("min_count >= 1") {
        cfg.training.min_count = 0;
        CHECK_THROWS(cfg.validate());
    }
}

TEST_CASE("cli exit codes") {
    SUBCASE("missing input corpus -> 2") {
        CHECK(run_cli("preprocess --set paths.corpus_in=absent.jsonl "
                      "--set paths.corpus_out=out.jsonl") == 2);
        CHECK(run_cli("build-vocab --set paths.corpus_in=absent.jsonl "
                      "--set paths.vocab_out=v.tsv") == 2);
    }
    SUBCASE("corpus below min_count -> 3") {
        write_file("cli_tiny.jsonl",
                   R"({"id":"1","text":"x","clean_text":"ekbar hi aata"})" "\n");
        CHECK(run_cli("build-vocab --set paths.corpus_in=cli_tiny.jsonl "
                      "--set paths.vocab_out=cli_v.tsv --set training.min_count=2") == 3);
        std::remove("cli_tiny.jsonl");
    }
    SUBCASE("unknown architecture -> 4") {
        CHECK(run_cli("train --set training.architecture=transformer") == 4);
    }
    SUBCASE("unknown config key -> 1") {
        CHECK(run_cli("build-vocab --set nope.nope=1") == 1);
    }
}

TEST_CASE("cli predict") {
    // save a small model and matching vocab, then drive the binary
    std::vector<std::string> stream;
    for (const auto& w : {"kya", "baat", "hai", "yaar"}) {
        for (int i = 0; i < 3; ++i) stream.emplace_back(w);
    }
    auto vocab = Vocab::build(stream, 1);
    vocab.save("cli_vocab.tsv");
    ModelHyper hyper;
    hyper.arch = Architecture::lstm;
    hyper.max_len = 6;
    hyper.emb_dim = 5;
    hyper.lstm_units = 4;
    hyper.rnn_hidden = 4;
    auto params = ModelParams::init_random(hyper, vocab.size(), 9);
    save_model(params, "cli_model.ckpt");

    const std::string common =
        "--set paths.model_in=cli_model.ckpt --set paths.vocab_out=cli_vocab.tsv";
    SUBCASE("normal text -> 0 and an emotion name on stdout") {
        CHECK(run_cli("predict " + common + " --text \"kya baat hai\"") == 0);
        auto out = run_cli_capture("predict " + common + " --text \"kya baat hai\"",
                                   "cli_predict.out");
        bool starts_with_emotion = false;
        for (const char* name :
             {"happiness", "sadness", "anger", "fear", "disgust", "surprise"}) {
            if (out.rfind(name, 0) == 0) starts_with_emotion = true;
        }
        CHECK(starts_with_emotion);
    }
    SUBCASE("input empty after cleaning -> 5") {
        CHECK(run_cli("predict " + common + " --text \"@user http://t.co/x\"") == 5);
    }
    SUBCASE("missing model -> 2") {
        CHECK(run_cli("predict --set paths.model_in=absent.ckpt --text hi") == 2);
    }
    std::remove("cli_model.ckpt");
    std::remove("cli_model.ckpt.manifest");
    std::remove("cli_vocab.tsv");
}

TEST_CASE("cli preprocess end to end") {
    const std::string in_path = "cli_raw.jsonl";
    const std::string out_path = "cli_clean.jsonl";
    std::ostringstream corpus;
    for (int i = 0; i < 12; ++i) {
        corpus << R"({"id":")" << i
               << R"(","text":"badi khushi wali baat hai aaj #happy @someone"})" << "\n";
        corpus << R"({"id":"s)" << i << R"(","text":"bahut bura din tha aaj #sad"})" << "\n";
    }
    write_file(in_path, corpus.str());
    const std::string args = "preprocess --set paths.corpus_in=" + in_path +
                             " --set paths.corpus_out=" + out_path +
                             " --set training.min_count=2";
    CHECK(run_cli(args) == 0);
    REQUIRE(std::filesystem::exists(out_path));

    SUBCASE("stdout reports the class counts") {
        auto out = run_cli_capture(args, "cli_pre.out");
        CHECK(out.find("Emotion") != std::string::npos);
        CHECK(out.find("happiness") != std::string::npos);
        CHECK(out.find("Total") != std::string::npos);
    }
    SUBCASE("rerun is byte-identical") {
        std::ifstream first(out_path);
        std::stringstream s1;
        s1 << first.rdbuf();
        CHECK(run_cli(args) == 0);
        std::ifstream second(out_path);
        std::stringstream s2;
        s2 << second.rdbuf();
        CHECK(s1.str() == s2.str());
    }
    std::remove(in_path.c_str());
    std::remove(out_path.c_str());
}

TEST_CASE("cli help lists the config keys") {
    auto out = run_cli_capture("train --help", "cli_help.out");
    CHECK(out.find("Config keys and defaults:") != std::string::npos);
    CHECK(out.find("min_count") != std::string::npos);
    CHECK(out.find("[embedding]") != std::string::npos);
}
