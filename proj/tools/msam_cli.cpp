// tools/msam_cli.cpp

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

// msam: train, evaluate and inspect multi-span raw-waveform acoustic models.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "msam/msam.hpp"

namespace {

using namespace msam;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(const Error &e) {
  const auto &k = e.kind();
  if (k == "io" || k == "format") return kExitIo;
  if (k == "numerical" || k == "degenerate-input") return kExitNumerical;
  return kExitValidation;
}

std::size_t thread_cap(std::size_t requested) {
  if (const char *env = std::getenv("MSAM_THREADS")) {
    const std::string s(env);
    if (s.empty() || s.find_first_not_of("0123456789") != s.npos || std::stoul(s) == 0)
      throw ValidationError("MSAM_THREADS must be a positive integer");
    requested = std::min<std::size_t>(requested, std::stoul(s));
  }
  return std::max<std::size_t>(1, requested);
}

Corpus load_corpus(const std::string &manifest, const std::optional<SynthSpec> &synth,
                   std::size_t num_classes = 0) {
  if (synth) return synth_corpus(*synth);
  Corpus c = load_manifest(manifest);
  if (c.utterances.empty()) throw ValidationError("corpus " + manifest + " is empty");
  if (num_classes) {
    if (c.num_classes > num_classes)
      throw ValidationError("corpus has labels up to " + std::to_string(c.num_classes - 1) +
                            " but the model has " + std::to_string(num_classes) + " classes");
    c.num_classes = num_classes;
  }
  return c;
}

struct TrainArgs {
  std::string config, model, corpus, synth, out, norm;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool desk = false;
};

int cmd_train(const TrainArgs &a) {
  RunConfig rc;
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is) throw IoError("cannot open config " + a.config);
    rc = parse_run_config(is);
  }
  if (a.desk) rc.model.stream_template = desk_stream_template();
  if (!a.model.empty()) rc.model.spec = parse_model_spec(a.model);
  if (!a.corpus.empty()) {
    rc.corpus = a.corpus;
    rc.synth.reset();
  }
  if (!a.synth.empty()) {
    rc.synth = parse_synth_spec(a.synth);
    rc.corpus.clear();
  }
  if (!a.out.empty()) rc.out_dir = a.out;
  if (!a.norm.empty()) rc.normalization = a.norm;
  if (a.seed) rc.train.seed = *a.seed;
  if (a.epochs) rc.train.max_epochs = *a.epochs;
  if (!rc.threads_set) rc.train.threads = std::max(1u, std::thread::hardware_concurrency());
  rc.train.threads = thread_cap(rc.train.threads);
  rc.finalize();
  rc.validate();

  Corpus corpus = normalize(load_corpus(rc.corpus, rc.synth), rc.normalization);
  if (rc.model.num_classes == 0) rc.model.num_classes = corpus.num_classes;
  if (corpus.num_classes > rc.model.num_classes)
    throw ValidationError("model.num_classes " + std::to_string(rc.model.num_classes) +
                          " is smaller than the corpus class count " +
                          std::to_string(corpus.num_classes));
  corpus.num_classes = rc.model.num_classes;
  rc.model.validate();

  std::filesystem::create_directories(rc.out_dir);
  const auto log_path = std::filesystem::path(rc.out_dir) / "train.log";
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot open " + log_path.string());

  std::cerr << "training " << format_model_spec(rc.model.spec) << " on "
            << corpus.utterances.size() << " utterances (" << corpus.num_frames()
            << " frames, " << corpus.num_classes << " classes)\n";
  auto result = train_model<float>(rc.model, corpus, rc.train, &log, rc.newbob);
  log.flush();

  Metadata meta;
  meta["train.seed"] = std::to_string(rc.train.seed);
  meta["train.cv_fraction"] = std::to_string(rc.train.cv_fraction);
  meta["data.normalization"] = rc.normalization;
  const auto ck = (std::filesystem::path(rc.out_dir) / "model.msam").string();
  save_checkpoint(ck, result.model, meta);

  const auto &last = result.history.back();
  std::printf("epochs\t%zu\ncv_accuracy\t%.6f\ntrain_loss\t%.9g\ncheckpoint\t%s\n",
              result.history.size(), last.cv_accuracy, last.train_loss, ck.c_str());
  return kExitOk;
}

int cmd_eval(const std::string &checkpoint, const std::string &manifest,
             const std::string &synth, const std::string &split) {
  if (manifest.empty() == synth.empty())
    throw ValidationError("eval: give exactly one of --corpus or --synth");
  auto ck = load_checkpoint<float>(checkpoint);
  const auto &mc = ck.model.config;
  const auto norm_it = ck.metadata.find("data.normalization");
  const std::string norm = norm_it == ck.metadata.end() ? "none" : norm_it->second;
  std::optional<SynthSpec> ss;
  if (!synth.empty()) ss = parse_synth_spec(synth);
  Corpus corpus = normalize(load_corpus(manifest, ss, mc.num_classes), norm);
  if (corpus.num_classes != mc.num_classes)
    throw ValidationError("eval: corpus has " + std::to_string(corpus.num_classes) +
                          " classes, checkpoint has " + std::to_string(mc.num_classes));

  std::vector<std::size_t> utts;
  if (split == "all") {
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) utts.push_back(i);
  } else {
    const auto get = [&](const char *k) {
      auto it = ck.metadata.find(k);
      if (it == ck.metadata.end())
        throw ValidationError(std::string("eval: checkpoint lacks ") + k + " needed for --split");
      return it->second;
    };
    const auto s = split_corpus(corpus, std::stod(get("train.cv_fraction")),
                                std::stoull(get("train.seed")));
    utts = split == "cv" ? s.cv : s.train;
  }
  FrameProvider<float> data(mc, corpus);
  const auto r = evaluate(ck.model, data, utts);
  std::printf("frames\t%zu\naccuracy\t%.6f\nmean_loss\t%.9g\n", r.frames, r.accuracy,
              r.mean_loss);
  return kExitOk;
}

int cmd_analyze(const std::string &checkpoint, const std::string &out, std::size_t fft_size,
                double fraction) {
  if (!std::filesystem::exists(checkpoint))
    throw IoError("checkpoint not found: " + checkpoint);
  auto ck = load_checkpoint<float>(checkpoint);
  for (const auto &p : export_analysis(ck.model, out, fft_size, fraction))
    std::printf("%s\n", p.c_str());
  return kExitOk;
}

int cmd_spans(const std::string &spec_text, bool desk) {
  ModelConfig mc;
  mc.spec = parse_model_spec(spec_text);
  if (desk) mc.stream_template = desk_stream_template();
  if (mc.spec.kind == ModelKind::FbankDnn) {
    std::printf("stream\tstride\tkernel\tspan_samples\tspan_ms\n");
    const std::size_t t = required_span(11, mc.spec.strides[0], mc.spec.kernel_lens[0]);
    std::printf("fbank\t%zu\t%zu\t%zu\t%.3f\n", mc.spec.strides[0], mc.spec.kernel_lens[0], t,
                span_ms(t));
    return kExitOk;
  }
  std::printf("stream\tstride\tkernel\tspan_samples\tspan_ms\tfeature_dim\n");
  const auto cfgs = mc.stream_configs();
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    cfgs[i].validate();
    const auto t = stream_input_span(cfgs[i]);
    const auto dim = mc.spec.kind == ModelKind::MultiSpan ? cfgs[i].projection_dim
                                                          : cfgs[i].output_dim();
    std::printf("%zu\t%zu\t%zu\t%zu\t%.3f\t%zu\n", i, cfgs[i].first_stride,
                cfgs[i].first_kernel_len, t, span_ms(t), dim);
  }
  std::printf("front_end_dim\t%zu\n", mc.front_end_dim());
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-span raw-waveform acoustic models"};
  app.require_subcommand(1);

  TrainArgs ta;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  auto *train = app.add_subcommand("train", "Train a model and write model.msam + train.log");
  train->add_option("--config", ta.config, "INI run configuration");
  train->add_option("--model", ta.model, "System spec, e.g. M_4,9,15^50,50,50, I_15^50, F_160^400");
  auto *tc = train->add_option("--corpus", ta.corpus, "Corpus manifest (wav<TAB>labels[<TAB>meeting])");
  auto *ts = train->add_option("--synth", ta.synth, "Synthetic corpus, e.g. classes=3,utterances=12,duration=5");
  tc->excludes(ts);
  train->add_option("--out", ta.out, "Output directory");
  auto *seed_opt = train->add_option("--seed", seed, "RNG seed");
  auto *epochs_opt = train->add_option("--epochs", epochs, "Maximum epochs");
  train->add_option("--norm", ta.norm, "global | utterance_meeting | none");
  train->add_flag("--desk", ta.desk, "Use the reduced desk-scale stream geometry");

  std::string ck, corpus, synth, split = "all", out = "analysis";
  auto *eval = app.add_subcommand("eval", "Frame accuracy and mean CE loss of a checkpoint");
  eval->add_option("--checkpoint", ck, "Checkpoint file")->required();
  auto *ec = eval->add_option("--corpus", corpus, "Corpus manifest");
  auto *es = eval->add_option("--synth", synth, "Synthetic corpus spec");
  ec->excludes(es);
  eval->add_option("--split", split, "all | train | cv (uses the checkpoint's split)")
      ->check(CLI::IsMember({"all", "train", "cv"}));

  std::size_t fft_size = 512;
  double fraction = 0.99;
  auto *analyze = app.add_subcommand("analyze", "Export kernel spectra and effective lengths");
  analyze->add_option("--checkpoint", ck, "Checkpoint file")->required();
  analyze->add_option("--out", out, "Output directory");
  analyze->add_option("--fft-size", fft_size, "Zero-padded DFT length");
  analyze->add_option("--energy-fraction", fraction, "Energy fraction for effective length");

  std::string spec_text;
  bool desk = false;
  auto *spans = app.add_subcommand("spans", "Print per-stream input spans for a system spec");
  spans->add_option("spec", spec_text, "System spec")->required();
  spans->add_flag("--desk", desk, "Use the reduced desk-scale stream geometry");

  std::string synth_out = "synth";
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus as WAV + labels + manifest");
  synth_cmd->add_option("--synth", synth, "Synthetic corpus spec")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory");

  std::string wav, csv;
  std::size_t filters = 40;
  auto *fb = app.add_subcommand("fbank", "Dump log Mel filterbank features of a WAV file as CSV");
  fb->add_option("--wav", wav, "Input WAV (16 kHz mono PCM16)")->required();
  fb->add_option("--out", csv, "Output CSV (stdout if omitted)");
  fb->add_option("--filters", filters, "Number of Mel filters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*train) {
      if (*seed_opt) ta.seed = seed;
      if (*epochs_opt) ta.epochs = epochs;
      return cmd_train(ta);
    }
    if (*eval) return cmd_eval(ck, corpus, synth, split);
    if (*analyze) return cmd_analyze(ck, out, fft_size, fraction);
    if (*spans) return cmd_spans(spec_text, desk);
    if (*synth_cmd) {
      std::printf("%s\n", write_corpus(synth_out, synth_corpus(parse_synth_spec(synth))).c_str());
      return kExitOk;
    }
    if (*fb) {
      FbankConfig cfg;
      cfg.num_filters = filters;
      const auto feats = compute_fbank(load_wav(wav), cfg);
      if (csv.empty()) {
        write_features_csv(std::cout, feats);
      } else {
        std::ofstream os(csv);
        if (!os) throw IoError("cannot open " + csv + " for writing");
        write_features_csv(os, feats);
      }
      return kExitOk;
    }
  } catch (const Error &e) {
    std::cerr << "msam: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "msam: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}
