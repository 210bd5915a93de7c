// tests/test_cli.cpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "msam/msam.hpp"

namespace msam {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string &args, const std::filesystem::path &dir) {
  const auto out = dir / "stdout.txt";
  const std::string cmd = std::string("MSAM_THREADS=2 ") + MSAM_CLI_PATH + " " + args + " > " +
                          out.string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  r.out = ss.str();
  return r;
}

std::string field(const std::string &text, const std::string &key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key + "\t", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

std::string last_line(const std::filesystem::path &p) {
  std::ifstream is(p);
  std::string line, last;
  while (std::getline(is, line))
    if (!line.empty()) last = line;
  return last;
}

constexpr const char *kTinyConfig = R"([model]
spec = M_3,5^20,30
first_map_size = 8
first_num_kernels = 4
second_kernel_len = 8
second_stride = 4
second_num_kernels = 4
projection_dim = 8
hidden_dim = 16
hidden_layers = 2

[train]
learning_rate = 0.02
batch_size = 32
max_epochs = 4
seed = 3

[data]
synth = classes=3,utterances=6,duration=1,snr=20,seed=2
normalization = global
)";

TEST(ModelSpecGrammar, SystemNotation) {
  const auto m = parse_model_spec("M_4,9,15^50,50,50");
  EXPECT_EQ(m.kind, ModelKind::MultiSpan);
  EXPECT_EQ(m.strides, (std::vector<std::size_t>{4, 9, 15}));
  EXPECT_EQ(m.kernel_lens, (std::vector<std::size_t>{50, 50, 50}));
  EXPECT_EQ(parse_model_spec("M_{4,9,15}^{50,50,50}"), m);
  const auto i = parse_model_spec("I_15^50");
  EXPECT_EQ(i.kind, ModelKind::SingleSpan);
  EXPECT_EQ(i.strides, std::vector<std::size_t>{15});
  EXPECT_EQ(i.kernel_lens, std::vector<std::size_t>{50});
  EXPECT_EQ(parse_model_spec("F_160^400").kind, ModelKind::FbankDnn);
}

TEST(ModelSpecGrammar, Errors) {
  try {
    parse_model_spec("M_4,9^50,50,50");
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
  }
  for (const char *bad : {"X_4^50", "I_4,9^50,50", "M_4^50", "I_4", "I_0^50", "I_4^5a",
                          "M_4,,9^50,50,50", "I_4^50^3", ""})
    EXPECT_THROW(parse_model_spec(bad), ValidationError) << bad;
}

TEST(ModelSpecGrammar, FormatParseFixedPoint) {
  for (const char *s : {"M_4,9,15^50,50,50", "M_{10,20}^{400,50}", "I_10^25", "F_160^400",
                        "M_1,2,3,4,5^5,4,3,2,1"}) {
    const auto once = parse_model_spec(s);
    const auto text = format_model_spec(once);
    EXPECT_EQ(parse_model_spec(text), once);
    EXPECT_EQ(format_model_spec(parse_model_spec(text)), text);
  }
}

TEST(RunConfigFile, ParsesSections) {
  std::istringstream is(kTinyConfig);
  auto rc = parse_run_config(is);
  rc.finalize();
  EXPECT_NO_THROW(rc.validate());
  EXPECT_EQ(rc.model.spec.strides, (std::vector<std::size_t>{3, 5}));
  EXPECT_EQ(rc.model.stream_template.second_map_size, 7u);
  EXPECT_EQ(rc.model.hidden_dim, 16u);
  EXPECT_EQ(rc.train.batch_size, 32u);
  EXPECT_EQ(rc.train.learning_rate, 0.02);
  ASSERT_TRUE(rc.synth.has_value());
  EXPECT_EQ(rc.synth->num_utterances, 6u);
  EXPECT_EQ(rc.newbob.improvement_threshold_start, 0.5);
}

TEST(RunConfigFile, RejectsUnknownOrBadEntries) {
  auto parse = [](const std::string &text) {
    std::istringstream is(text);
    return parse_run_config(is);
  };
  EXPECT_THROW(parse("[model]\nspce = I_4^50\n"), ValidationError);
  EXPECT_THROW(parse("[modle]\nspec = I_4^50\n"), ValidationError);
  EXPECT_THROW(parse("[train]\nbatch_size = -3\n"), ValidationError);
  EXPECT_THROW(parse("[train]\nlearning_rate = fast\n"), ValidationError);
  EXPECT_THROW(parse("[newbob]\ndecay_factor = 1.5\n"), ValidationError);
  EXPECT_THROW(parse("[model]\nspec = M_4^50\n"), ValidationError);
  auto both = parse("[data]\ncorpus = a.tsv\nsynth = classes=2\n");
  EXPECT_THROW(both.validate(), ValidationError);
  auto explicit_m2 = parse("[model]\nsecond_map_size = 12\n[data]\nsynth = classes=2\n");
  explicit_m2.finalize();
  EXPECT_EQ(explicit_m2.model.stream_template.second_map_size, 12u);
}

TEST(Cli, SpansAndExitCodes) {
  const auto dir = fixture::scratch_dir("cli_codes");
  auto r = run_cli("spans M_4,9,15^50,50,50", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("3035"), std::string::npos);
  EXPECT_EQ(field(r.out, "front_end_dim"), "450");
  EXPECT_EQ(run_cli("spans M_4,9^50,50,50", dir).code, 1);
  EXPECT_EQ(run_cli("--bogus", dir).code, 1);
  EXPECT_EQ(run_cli("analyze --checkpoint " + (dir / "missing.msam").string(), dir).code, 2);
  EXPECT_EQ(run_cli("fbank --wav " + (dir / "missing.wav").string(), dir).code, 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "missing.ini").string(), dir).code, 2);

  // A silent corpus cannot be variance-normalised.
  Corpus silent;
  silent.num_classes = 2;
  for (int i = 0; i < 3; ++i) {
    Utterance u;
    u.id = "u" + std::to_string(i);
    u.signal = Signal(std::vector<double>(800, 0.0));
    u.labels.assign(5, static_cast<std::size_t>(i % 2));
    silent.utterances.push_back(u);
  }
  const auto manifest = write_corpus((dir / "silent").string(), silent);
  EXPECT_EQ(run_cli("train --model I_10^50 --corpus " + manifest + " --out " +
                        (dir / "silent_out").string(),
                    dir)
                .code,
            3);
}

TEST(Cli, TrainEvalAnalyze) {
  const auto dir = fixture::scratch_dir("cli_e2e");
  std::ofstream(dir / "run.ini") << kTinyConfig;
  const auto out = dir / "out";
  auto r = run_cli("train --config " + (dir / "run.ini").string() + " --out " + out.string(), dir);
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_TRUE(std::filesystem::exists(out / "model.msam"));
  const auto log_last = last_line(out / "train.log");
  const std::string logged_acc = log_last.substr(log_last.rfind('\t') + 1);

  const std::string synth = "classes=3,utterances=6,duration=1,snr=20,seed=2";
  auto e = run_cli("eval --checkpoint " + (out / "model.msam").string() + " --synth " + synth +
                       " --split cv",
                   dir);
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(field(e.out, "accuracy"), logged_acc);
  EXPECT_EQ(field(e.out, "accuracy"), field(r.out, "cv_accuracy"));

  auto a = run_cli("analyze --checkpoint " + (out / "model.msam").string() + " --out " +
                       (dir / "analysis").string(),
                   dir);
  ASSERT_EQ(a.code, 0);
  for (const char *f : {"stream0_spectra.csv", "stream1_spectra.csv", "stream0_lengths.csv",
                        "stream1_lengths.csv", "mel_reference.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / "analysis" / f)) << f;

  // The same seed and config reproduce the checkpoint byte for byte.
  auto again = run_cli("train --config " + (dir / "run.ini").string() + " --out " +
                           (dir / "out2").string(),
                       dir);
  ASSERT_EQ(again.code, 0);
  auto bytes = [](const std::filesystem::path &p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  EXPECT_EQ(bytes(out / "model.msam"), bytes(dir / "out2" / "model.msam"));
}

TEST(Cli, FbankCheckpointCannotBeAnalyzed) {
  const auto dir = fixture::scratch_dir("cli_fbank");
  auto m = fixture::random_model<float>(fixture::tiny_config(ModelKind::FbankDnn, {160}), 2);
  save_checkpoint((dir / "f.msam").string(), m);
  auto r = run_cli("analyze --checkpoint " + (dir / "f.msam").string(), dir);
  EXPECT_EQ(r.code, 1);
  std::ifstream err(dir / "stderr.txt");
  std::string msg((std::istreambuf_iterator<char>(err)), {});
  EXPECT_NE(msg.find("no waveform kernels to analyze"), std::string::npos);
}

TEST(Cli, RandomModelIsAtChanceOnBalancedCorpus) {
  // Labels cycle through the classes frame by frame over white noise, so an
  // untrained model's predictions are independent of the labels.
  const auto dir = fixture::scratch_dir("cli_chance");
  const std::size_t C = 3, frames_per_utt = 500, utts = 6;
  Corpus c;
  c.num_classes = C;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0, 0.1);
  for (std::size_t u = 0; u < utts; ++u) {
    Utterance utt;
    utt.id = "n" + std::to_string(u);
    std::vector<double> x(frames_per_utt * kFrameShift);
    for (auto &v : x) v = d(rng);
    utt.signal = Signal(std::move(x));
    for (std::size_t f = 0; f < frames_per_utt; ++f) utt.labels.push_back((f + u) % C);
    c.utterances.push_back(std::move(utt));
  }
  const auto manifest = write_corpus((dir / "corpus").string(), c);
  auto cfg = fixture::tiny_config(ModelKind::MultiSpan, {2, 3}, C);
  auto m = fixture::random_model<float>(cfg, 5);
  Metadata meta{{"data.normalization", "global"}};
  save_checkpoint((dir / "r.msam").string(), m, meta);
  auto r = run_cli("eval --checkpoint " + (dir / "r.msam").string() + " --corpus " + manifest, dir);
  ASSERT_EQ(r.code, 0);
  const double n = static_cast<double>(frames_per_utt * utts), p = 1.0 / C;
  const double se = std::sqrt(p * (1 - p) / n);
  EXPECT_EQ(field(r.out, "frames"), std::to_string(frames_per_utt * utts));
  EXPECT_NEAR(std::stod(field(r.out, "accuracy")) / 100.0, p, 3 * se);

  Corpus empty;
  empty.num_classes = C;
  const auto empty_manifest = write_corpus((dir / "empty").string(), empty);
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir / "r.msam").string() + " --corpus " +
                        empty_manifest,
                    dir)
                .code,
            1);
}

}  // namespace
}  // namespace msam
