// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <numeric>
#include <sstream>

#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

std::string serialize_sequence(const text::MixedSequence& seq) {
  std::ostringstream os;
  os << seq.symbols.size();
  for (int s : seq.symbols) os << ' ' << s;
  for (int m : seq.mask) os << ' ' << m;
  os << ' ' << seq.word_spans.size();
  for (const auto& span : seq.word_spans) {
    os << ' ' << span.start << ' ' << span.end << ' ' << static_cast<int>(span.source);
  }
  return os.str();
}

text::MixedSequence parse_sequence(std::string_view text) {
  std::istringstream in{std::string(text)};
  text::MixedSequence seq;
  std::size_t n = 0, spans = 0;
  if (!(in >> n)) throw DataError("sequence state: missing length");
  seq.symbols.resize(n);
  seq.mask.resize(n);
  for (auto& s : seq.symbols) in >> s;
  for (auto& m : seq.mask) in >> m;
  in >> spans;
  for (std::size_t i = 0; i < spans; ++i) {
    text::WordSpan span;
    int source = 0;
    in >> span.start >> span.end >> source;
    span.source = static_cast<text::SpanSource>(source);
    seq.word_spans.push_back(span);
  }
  if (!in) throw DataError("sequence state: truncated");
  return seq;
}

MinibatchPacker::MinibatchPacker(std::vector<const Matrix*> frames, std::size_t batch,
                                 std::size_t tbptt, Mixer mixer, Mode mode, std::uint64_t seed)
    : frames_(std::move(frames)), tbptt_(tbptt), mixer_(std::move(mixer)), mode_(mode), rng_(seed) {
  if (frames_.empty()) throw EmptyCorpus();
  if (batch == 0 || tbptt == 0) throw ConfigError("packer: batch size and window length must be >= 1");
  for (const auto* f : frames_) {
    if (f->rows() == 0) throw DataError("packer: utterance with zero frames");
  }
  refill_queue();
  lanes_.resize(batch);
  for (auto& lane : lanes_) pull(lane);
}

void MinibatchPacker::refill_queue() {
  queue_.resize(frames_.size());
  std::iota(queue_.begin(), queue_.end(), std::size_t{0});
  // Fisher-Yates with our own index draws so the order depends only on rng_.
  for (std::size_t i = queue_.size(); i > 1; --i) std::swap(queue_[i - 1], queue_[rng_.index(i)]);
  queue_pos_ = 0;
}

void MinibatchPacker::pull(Lane& lane) {
  lane.offset = 0;
  lane.sequence.reset();
  if (queue_pos_ == queue_.size()) {
    if (mode_ == Mode::kSinglePass) {
      lane.utterance = PackedBatchWindow::npos;
      return;
    }
    ++epoch_;
    refill_queue();
  }
  lane.utterance = queue_[queue_pos_++];
  if (mixer_) {
    lane.sequence = std::make_shared<const text::MixedSequence>(mixer_(lane.utterance, rng_));
  }
}

std::optional<PackedBatchWindow> MinibatchPacker::next() {
  std::size_t steps = tbptt_;
  bool any = false;
  for (const auto& lane : lanes_) {
    if (lane.utterance == PackedBatchWindow::npos) continue;
    any = true;
    steps = std::min(steps, frames_[lane.utterance]->rows() - lane.offset);
  }
  if (!any) return std::nullopt;

  const std::size_t batch = lanes_.size();
  const std::size_t dims = frames_.front()->cols();
  PackedBatchWindow w;
  w.frames = FrameBatch(batch, steps, dims);
  w.reset_flags.assign(batch, false);
  w.linguistic_refs.resize(batch);
  w.lane_offsets.assign(batch, 0);
  w.lane_lengths.assign(batch, 0);
  w.utterances.assign(batch, PackedBatchWindow::npos);
  for (std::size_t b = 0; b < batch; ++b) {
    Lane& lane = lanes_[b];
    if (lane.utterance == PackedBatchWindow::npos) continue;
    const Matrix& src = *frames_[lane.utterance];
    w.reset_flags[b] = lane.offset == 0;
    w.linguistic_refs[b] = lane.sequence;
    w.lane_offsets[b] = lane.offset;
    w.lane_lengths[b] = steps;
    w.utterances[b] = lane.utterance;
    for (std::size_t s = 0; s < steps; ++s) {
      std::copy_n(src.row(lane.offset + s).begin(), dims, &w.frames.at(b, s, 0));
    }
    lane.offset += steps;
  }
  for (auto& lane : lanes_) {
    if (lane.utterance != PackedBatchWindow::npos &&
        lane.offset == frames_[lane.utterance]->rows()) {
      pull(lane);
    }
  }
  return w;
}

std::string MinibatchPacker::serialize() const {
  std::ostringstream os;
  os << "epoch " << epoch_ << " pos " << queue_pos_ << " queue " << queue_.size();
  for (auto q : queue_) os << ' ' << q;
  os << "\nlanes " << lanes_.size() << '\n';
  for (const auto& lane : lanes_) {
    const long long utt =
        lane.utterance == PackedBatchWindow::npos ? -1 : static_cast<long long>(lane.utterance);
    os << utt << ' ' << lane.offset << ' ' << (lane.sequence ? 1 : 0);
    if (lane.sequence) os << ' ' << serialize_sequence(*lane.sequence);
    os << '\n';
  }
  os << rng_.serialize();
  return os.str();
}

void MinibatchPacker::restore(const std::string& state) {
  std::istringstream in(state);
  std::string word;
  std::size_t qsize = 0, lanes = 0;
  in >> word >> epoch_ >> word >> queue_pos_ >> word >> qsize;
  queue_.resize(qsize);
  for (auto& q : queue_) in >> q;
  in >> word >> lanes;
  if (!in || lanes != lanes_.size()) throw DataError("packer state does not match batch size");
  std::string line;
  std::getline(in, line);
  for (auto& lane : lanes_) {
    std::getline(in, line);
    std::istringstream ls(line);
    long long utt = 0;
    int has = 0;
    ls >> utt >> lane.offset >> has;
    lane.utterance = utt < 0 ? PackedBatchWindow::npos : static_cast<std::size_t>(utt);
    if (lane.utterance != PackedBatchWindow::npos && lane.utterance >= frames_.size()) {
      throw DataError("packer state refers to a missing utterance");
    }
    lane.sequence.reset();
    if (has) {
      std::string rest;
      std::getline(ls, rest);
      lane.sequence = std::make_shared<const text::MixedSequence>(parse_sequence(rest));
    }
  }
  std::string rng_state((std::istreambuf_iterator<char>(in)), {});
  rng_ = Rng::deserialize(rng_state);
}

}  // namespace mixtts::trainer
