// msam/trainer.hpp

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

// Frame-level cross-entropy training: mini-batch SGD with momentum and
// weight decay, the NewBob+ learning-rate schedule driven by held-out frame
// accuracy, and layer-by-layer growth of the DNN head for multi-span models.

#ifndef MSAM_TRAINER_HPP_
#define MSAM_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "msam/dataio.hpp"
#include "msam/error.hpp"
#include "msam/fbank.hpp"
#include "msam/model.hpp"
#include "msam/params.hpp"

namespace msam {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  std::size_t batch_size = 256;
  double cv_fraction = 0.10;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (!(learning_rate >= 0)) throw ValidationError("train: learning_rate must be >= 0");
    if (!(momentum >= 0)) throw ValidationError("train: momentum must be >= 0");
    if (!(weight_decay >= 0)) throw ValidationError("train: weight_decay must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(cv_fraction > 0 && cv_fraction < 1))
      throw ValidationError("train: cv_fraction must be in (0, 1)");
    if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
    if (threads < 1) throw ValidationError("train: threads must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// SGD

template <typename T>
struct SgdState {
  std::vector<std::vector<T>> velocity;  // aligned with Model::params()
};

/// v <- momentum*v - lr*(g + weight_decay*w);  w <- w + v
template <typename T>
void sgd_step(std::vector<ParamView<T>> &params, const std::vector<ParamView<T>> &grads,
              SgdState<T> &state, double lr, double momentum, double weight_decay) {
  if (params.size() != grads.size())
    throw ShapeError("sgd: " + std::to_string(params.size()) + " parameter tensors vs " +
                     std::to_string(grads.size()) + " gradients");
  if (state.velocity.empty())
    for (const auto &p : params) state.velocity.emplace_back(p.data.size(), T(0));
  if (state.velocity.size() != params.size()) throw ShapeError("sgd: stale momentum buffers");
  const T mu = static_cast<T>(momentum), eta = static_cast<T>(lr),
          lambda = static_cast<T>(weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].data;
    auto g = grads[i].data;
    auto &v = state.velocity[i];
    if (g.size() != w.size() || v.size() != w.size())
      throw ShapeError("sgd: shape mismatch for " + params[i].name);
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = mu * v[j] - eta * (g[j] + lambda * w[j]);
      w[j] += v[j];
    }
  }
}

// ---------------------------------------------------------------------------
// NewBob+

enum class NewBobDecision { Continue, DecayLr, Stop };

inline const char *to_string(NewBobDecision d) {
  switch (d) {
    case NewBobDecision::Continue: return "continue";
    case NewBobDecision::DecayLr: return "decay_lr";
    case NewBobDecision::Stop: return "stop";
  }
  return "?";
}

/// Accuracies and thresholds are in percentage points.
struct NewBobState {
  double current_lr = 0.01;
  double previous_cv_accuracy = 0.0;
  bool ramping = false;
  bool stopped = false;
  double improvement_threshold_start = 0.5;
  double improvement_threshold_stop = 0.1;
  double decay_factor = 0.5;
};

/// Constant rate until the CV gain drops below the start threshold, then
/// the rate is multiplied by decay_factor every epoch until the gain drops
/// below the stop threshold. Stop is absorbing.
inline NewBobDecision newbob_update(NewBobState &s, double cv_accuracy) {
  if (s.stopped) return NewBobDecision::Stop;
  const double improvement = cv_accuracy - s.previous_cv_accuracy;
  s.previous_cv_accuracy = cv_accuracy;
  if (!s.ramping) {
    if (improvement < s.improvement_threshold_start) {
      s.ramping = true;
      s.current_lr *= s.decay_factor;
      return NewBobDecision::DecayLr;
    }
    return NewBobDecision::Continue;
  }
  if (improvement < s.improvement_threshold_stop) {
    s.stopped = true;
    return NewBobDecision::Stop;
  }
  s.current_lr *= s.decay_factor;
  return NewBobDecision::DecayLr;
}

// ---------------------------------------------------------------------------
// Layer-by-layer pretraining

enum class PretrainStage { Subnet, Extended, Full };

inline const char *to_string(PretrainStage s) {
  switch (s) {
    case PretrainStage::Subnet: return "subnet";
    case PretrainStage::Extended: return "extended";
    case PretrainStage::Full: return "full";
  }
  return "?";
}

struct PretrainSchedule {
  PretrainStage stage = PretrainStage::Subnet;
  std::size_t epochs_per_stage = 1;
};

/// Hidden layers of the head at each stage: none, two, then all.
inline std::size_t head_layers_at(PretrainStage s, const ModelConfig &c) {
  switch (s) {
    case PretrainStage::Subnet: return 0;
    case PretrainStage::Extended: return std::min<std::size_t>(2, c.hidden_layers);
    case PretrainStage::Full: return c.hidden_layers;
  }
  return c.hidden_layers;
}

/// Advances the head to the next stage by inserting freshly initialised
/// hidden layers directly before the output layer. Streams, projections and
/// existing hidden layers are untouched. The output bias is kept; the output
/// weights are kept when their input width does not change and are
/// re-initialised otherwise.
template <typename T>
void pretrain_transition(Model<T> &m, PretrainSchedule &schedule, Rng &rng) {
  if (schedule.stage == PretrainStage::Full)
    throw ValidationError("pretrain: already at the full stage");
  const PretrainStage next =
      schedule.stage == PretrainStage::Subnet ? PretrainStage::Extended : PretrainStage::Full;
  if (m.head.hidden.size() != head_layers_at(schedule.stage, m.config))
    throw ValidationError("pretrain: head depth " + std::to_string(m.head.hidden.size()) +
                          " does not match stage " + to_string(schedule.stage));
  const std::size_t target = head_layers_at(next, m.config);
  const std::size_t width = m.config.hidden_dim;
  while (m.head.hidden.size() < target) {
    const std::size_t in = m.head.hidden.empty() ? m.head.input_dim() : m.head.hidden.back().out_dim();
    AffineLayer<T> layer(in, width);
    layer.init(rng);
    m.head.hidden.push_back(std::move(layer));
  }
  const std::size_t out_in = m.head.hidden.empty() ? m.head.input_dim() : m.head.hidden.back().out_dim();
  if (m.head.output.in_dim() != out_in) {
    AffineLayer<T> out(out_in, m.head.num_classes());
    glorot_uniform(out.weights.flat(), out.in_dim(), out.out_dim(), rng);
    out.biases = m.head.output.biases;
    m.head.output = std::move(out);
  }
  m.head.validate();
  schedule.stage = next;
}

// ---------------------------------------------------------------------------
// Data

struct DataSplit {
  std::vector<std::size_t> train;  // utterance indices
  std::vector<std::size_t> cv;
};

/// Holds out round(cv_fraction * N) utterances (at least one) for
/// cross-validation, chosen by a seeded shuffle.
inline DataSplit split_corpus(const Corpus &c, double cv_fraction, std::uint64_t seed) {
  const std::size_t n = c.utterances.size();
  if (n < 2) throw ValidationError("corpus: need at least 2 utterances for a CV split");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed ^ 0x5eed5eed5eedull);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto ncv = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cv_fraction * static_cast<double>(n))), 1, n - 1);
  DataSplit s;
  s.cv.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ncv));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(ncv), idx.end());
  std::sort(s.cv.begin(), s.cv.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

/// Builds per-frame model inputs: waveform windows for stream models,
/// spliced FBANK vectors (computed once per utterance) for the baseline.
template <typename T>
class FrameProvider {
 public:
  FrameProvider(const ModelConfig &config, const Corpus &corpus)
      : config_(config), corpus_(corpus) {
    if (config.spec.kind == ModelKind::FbankDnn) {
      const auto fc = config.fbank_config();
      for (const auto &u : corpus.utterances)
        fbank_.push_back(stack_context(compute_fbank_aligned(u.signal, u.labels.size(), fc),
                                       config.context_frames));
    } else {
      for (const auto &sc : config.stream_configs()) spans_.push_back(stream_input_span(sc));
    }
  }

  ModelInput<T> input(std::size_t utt, std::size_t frame) const {
    ModelInput<T> in;
    if (config_.spec.kind == ModelKind::FbankDnn) {
      auto row = fbank_.at(utt).row(frame);
      in.blocks.emplace_back(row.begin(), row.end());
    } else {
      const auto center = static_cast<std::ptrdiff_t>(frame * kFrameShift);
      for (auto span : spans_)
        in.blocks.push_back(cut_window<T>(corpus_.utterances[utt].signal.samples, center, span));
    }
    return in;
  }

  std::size_t label(std::size_t utt, std::size_t frame) const {
    return corpus_.utterances[utt].labels[frame];
  }

  const Corpus &corpus() const { return corpus_; }

 private:
  ModelConfig config_;
  const Corpus &corpus_;
  std::vector<Matrix<double>> fbank_;
  std::vector<std::size_t> spans_;
};

struct EvalResult {
  double accuracy = 0;  // percent of frames whose argmax matches the label
  double mean_loss = 0;
  std::size_t frames = 0;
};

template <typename T>
EvalResult evaluate(const Model<T> &m, const FrameProvider<T> &data,
                    const std::vector<std::size_t> &utts) {
  EvalResult r;
  std::size_t correct = 0;
  double loss = 0;
  for (auto u : utts) {
    const auto &labels = data.corpus().utterances[u].labels;
    for (std::size_t f = 0; f < labels.size(); ++f) {
      const auto probs = model_forward(m, data.input(u, f));
      const auto best = static_cast<std::size_t>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      correct += best == labels[f];
      loss += static_cast<double>(cross_entropy<T>(probs, labels[f]));
      ++r.frames;
    }
  }
  if (r.frames == 0) throw ValidationError("evaluate: no frames to evaluate");
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(r.frames);
  r.mean_loss = loss / static_cast<double>(r.frames);
  return r;
}

template <typename T>
struct TrainerState {
  Rng rng{1};
  SgdState<T> sgd;
  NewBobState newbob;
  PretrainSchedule schedule;
  std::size_t epoch = 0;
};

struct EpochResult {
  double lr = 0;
  double train_loss = 0;
  double cv_accuracy = 0;
  double cv_loss = 0;
};

namespace detail {

// Frames of a mini-batch are split into fixed chunks; worker t handles
// chunks t, t+W, ... into its own accumulator and the accumulators are
// summed in worker order, so results are reproducible for a fixed W.
template <typename T>
double batch_gradient(const Model<T> &m, const FrameProvider<T> &data,
                      const std::vector<std::pair<std::size_t, std::size_t>> &frames,
                      std::size_t begin, std::size_t end, std::size_t workers,
                      std::vector<Model<T>> &accum) {
  constexpr std::size_t kChunk = 16;
  const std::size_t nchunks = (end - begin + kChunk - 1) / kChunk;
  workers = std::max<std::size_t>(1, std::min(workers, nchunks));
  std::vector<double> losses(workers, 0.0);
  auto work = [&](std::size_t w) {
    for (auto &p : accum[w].params()) std::fill(p.data.begin(), p.data.end(), T(0));
    for (std::size_t c = w; c < nchunks; c += workers) {
      const std::size_t lo = begin + c * kChunk, hi = std::min(end, lo + kChunk);
      for (std::size_t i = lo; i < hi; ++i) {
        const auto [u, f] = frames[i];
        losses[w] += static_cast<double>(model_backward(m, data.input(u, f), data.label(u, f), accum[w]));
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto &t : pool) t.join();
  }
  auto total = accum[0].params();
  for (std::size_t w = 1; w < workers; ++w) {
    auto part = accum[w].params();
    for (std::size_t i = 0; i < total.size(); ++i)
      for (std::size_t j = 0; j < total[i].data.size(); ++j) total[i].data[j] += part[i].data[j];
  }
  const T scale = T(1) / static_cast<T>(end - begin);
  for (auto &p : total)
    for (auto &x : p.data) x *= scale;
  double loss = 0;
  for (double l : losses) loss += l;
  return loss;
}

}  // namespace detail

/// One shuffled pass over the training frames followed by CV evaluation.
/// Uses state.newbob.current_lr as the step size.
template <typename T>
EpochResult train_epoch(Model<T> &m, const FrameProvider<T> &data, const DataSplit &split,
                        const TrainConfig &config, TrainerState<T> &state) {
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (auto u : split.train)
    for (std::size_t f = 0; f < data.corpus().utterances[u].labels.size(); ++f)
      frames.emplace_back(u, f);
  if (frames.empty()) throw ValidationError("train_epoch: no training frames");
  std::shuffle(frames.begin(), frames.end(), state.rng);

  const std::size_t workers = std::max<std::size_t>(1, config.threads);
  std::vector<Model<T>> accum;
  for (std::size_t w = 0; w < workers; ++w) accum.push_back(zeros_like(m));

  EpochResult r;
  r.lr = state.newbob.current_lr;
  double loss = 0;
  for (std::size_t b = 0; b < frames.size(); b += config.batch_size) {
    const std::size_t e = std::min(frames.size(), b + config.batch_size);
    loss += detail::batch_gradient(m, data, frames, b, e, workers, accum);
    if (!std::isfinite(loss)) throw NumericalError("training loss became non-finite");
    auto params = m.params();
    sgd_step(params, accum[0].params(), state.sgd, r.lr, config.momentum, config.weight_decay);
  }
  r.train_loss = loss / static_cast<double>(frames.size());
  const auto cv = evaluate(m, data, split.cv);
  r.cv_accuracy = cv.accuracy;
  r.cv_loss = cv.mean_loss;
  ++state.epoch;
  return r;
}

inline void write_log_header(std::ostream &os) { os << "epoch\tlr\ttrain_loss\tcv_accuracy\n"; }

inline void write_log_line(std::ostream &os, std::size_t epoch, const EpochResult &r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%.6f\n", epoch, r.lr, r.train_loss,
                r.cv_accuracy);
  os << buf;
}

template <typename T>
struct TrainResult {
  Model<T> model;
  std::vector<EpochResult> history;
  DataSplit split;
};

/// Full training run. Multi-span models grow their head over the
/// subnet/extended/full stages (one epoch each for the first two); other
/// models start with the full head. NewBob+ drives the learning rate from
/// the first full-stage epoch onward. Every epoch counts toward max_epochs.
template <typename T>
TrainResult<T> train_model(const ModelConfig &mc, const Corpus &corpus, const TrainConfig &tc,
                           std::ostream *log = nullptr,
                           NewBobState scheduler = NewBobState{}) {
  tc.validate();
  if (corpus.utterances.empty()) throw ValidationError("train: corpus is empty");
  if (corpus.num_classes != mc.num_classes)
    throw ValidationError("train: corpus has " + std::to_string(corpus.num_classes) +
                          " classes but model expects " + std::to_string(mc.num_classes));
  corpus.validate();

  TrainerState<T> state;
  state.rng.seed(tc.seed);
  state.newbob = scheduler;
  state.newbob.current_lr = tc.learning_rate;
  const bool pretrain = mc.spec.kind == ModelKind::MultiSpan;
  state.schedule.stage = pretrain ? PretrainStage::Subnet : PretrainStage::Full;

  TrainResult<T> result{make_model<T>(mc, head_layers_at(state.schedule.stage, mc)), {},
                        split_corpus(corpus, tc.cv_fraction, tc.seed)};
  init_model(result.model, state.rng);
  FrameProvider<T> data(mc, corpus);
  if (log) write_log_header(*log);

  std::size_t stage_epochs = 0;
  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    if (state.schedule.stage != PretrainStage::Full &&
        stage_epochs == state.schedule.epochs_per_stage) {
      pretrain_transition(result.model, state.schedule, state.rng);
      state.sgd = {};  // topology changed; momentum restarts
      stage_epochs = 0;
    }
    const bool full = state.schedule.stage == PretrainStage::Full;
    const auto r = train_epoch(result.model, data, result.split, tc, state);
    ++stage_epochs;
    result.history.push_back(r);
    if (log) write_log_line(*log, epoch, r);
    if (full) {
      if (newbob_update(state.newbob, r.cv_accuracy) == NewBobDecision::Stop) break;
    } else {
      state.newbob.previous_cv_accuracy = r.cv_accuracy;
    }
  }
  return result;
}

}  // namespace msam

#endif  // MSAM_TRAINER_HPP_
