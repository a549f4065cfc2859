#include "spga/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spga/errors.hpp"
#include "spga/sample_gen.hpp"

namespace spga {

std::vector<double> GaussianSource::mean_at(std::size_t frame) const {
  std::vector<double> m = mean;
  if (!drift.empty() && frame > 0) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      m[j] += static_cast<double>(frame) * drift[j];
    }
  }
  return m;
}

std::vector<double> GaussianSource::sample(Rng& rng, std::size_t frame) const {
  std::vector<double> v = mean_at(frame);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += std[j] * rng.normal();
  return v;
}

namespace {

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

std::vector<double> gaussian_at(std::span<const double> center, double sd,
                                Rng& rng) {
  std::vector<double> v(center.begin(), center.end());
  for (auto& x : v) x += sd * rng.normal();
  return v;
}

void check_world(const WorldConfig& cfg) {
  if (cfg.dim < 1 || cfg.candidates < 2) {
    throw std::invalid_argument(
        "WorldConfig: need dim >= 1 and at least 2 candidates per frame");
  }
  if (!(cfg.target_std > 0.0) || !(cfg.background_std > 0.0)) {
    throw std::invalid_argument("WorldConfig: stds must be positive");
  }
  if (cfg.easy_clusters < 1) {
    throw std::invalid_argument("WorldConfig: need at least one easy cluster");
  }
}

}  // namespace

Sequence::Sequence(const WorldConfig& cfg, std::size_t length,
                   std::uint64_t seed)
    : config_(cfg), seed_(seed) {
  check_world(cfg);
  Rng rng(seed);
  Rng layout_rng = rng.split();

  const std::size_t d = cfg.dim;
  std::vector<double> drift_dir = random_unit(d, layout_rng);
  hard_direction_ = random_unit(d, layout_rng);
  easy_means_.resize(cfg.easy_clusters);
  for (auto& mean : easy_means_) {
    mean = random_unit(d, layout_rng);
    for (auto& x : mean) x *= cfg.easy_offset;
  }

  target_.mean.assign(d, 0.0);
  target_.std.assign(d, cfg.target_std);
  target_.drift.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    target_.drift[j] = cfg.drift * drift_dir[j];
  }

  frames_.reserve(length);
  const std::size_t n_background = cfg.candidates - 1;
  const std::size_t n_hard = static_cast<std::size_t>(
      std::llround(cfg.hard_fraction * static_cast<double>(n_background)));
  for (std::size_t f = 0; f < length; ++f) {
    Frame frame;
    frame.target_mean = target_.mean_at(f);
    if (cfg.jitter > 0.0) {
      for (auto& x : frame.target_mean) x += cfg.jitter * rng.normal();
    }
    frame.truth = rng.below(cfg.candidates);

    const std::vector<double> hard_center = hard_mean(f);
    frame.candidates = Matrix(cfg.candidates, d);
    std::size_t background_rank = 0;
    for (std::size_t c = 0; c < cfg.candidates; ++c) {
      std::vector<double> v;
      if (c == frame.truth) {
        v = gaussian_at(frame.target_mean, cfg.target_std, rng);
      } else {
        if (background_rank < n_hard) {
          v = gaussian_at(hard_center, cfg.background_std, rng);
        } else {
          const auto& mean =
              easy_means_[background_rank % easy_means_.size()];
          v = gaussian_at(mean, cfg.background_std, rng);
        }
        ++background_rank;
      }
      std::copy(v.begin(), v.end(), frame.candidates.row(c).begin());
    }
    frames_.push_back(std::move(frame));
  }
}

std::vector<double> Sequence::hard_mean(std::size_t frame) const {
  // The hard cluster shadows the drifted target at a fixed offset, so it
  // stays confusable over the whole sequence.
  std::vector<double> m = target_.mean_at(frame);
  for (std::size_t j = 0; j < m.size(); ++j) {
    m[j] += config_.hard_offset * hard_direction_[j];
  }
  return m;
}

Matrix Sequence::sample_positives(std::span<const double> center,
                                  std::size_t count, Rng& rng) const {
  Matrix out(count, config_.dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = gaussian_at(center, config_.target_std, rng);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

Matrix Sequence::sample_negatives(std::size_t frame, std::size_t count,
                                  Rng& rng) const {
  const std::vector<double> hard_center = hard_mean(frame);
  const std::size_t n_hard = static_cast<std::size_t>(
      std::llround(config_.hard_fraction * static_cast<double>(count)));
  Matrix out(count, config_.dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v;
    if (i < n_hard) {
      v = gaussian_at(hard_center, config_.background_std, rng);
    } else {
      const auto& mean = easy_means_[i % easy_means_.size()];
      v = gaussian_at(mean, config_.background_std, rng);
    }
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

Sequence make_sequence(const WorldConfig& cfg, std::size_t length,
                       std::uint64_t seed) {
  return Sequence(cfg, length, seed);
}

namespace {

TrainConfig train_config(const TrackerConfig& cfg, std::size_t iterations,
                         std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.momentum = cfg.momentum;
  tc.iterations = iterations;
  tc.loss_mode = cfg.loss_mode;
  tc.epsilon = cfg.epsilon;
  tc.weight_mode = cfg.weight_mode;
  tc.seed = seed;
  return tc;
}

Matrix store_to_matrix(const std::deque<std::vector<double>>& store,
                       std::size_t take, Rng& rng) {
  if (store.empty()) {
    throw MissingClassError("tracker store is empty");
  }
  Matrix out;
  if (take >= store.size()) {
    for (const auto& row : store) out.append_row(row);
    return out;
  }
  // Partial Fisher-Yates draw of `take` distinct store rows.
  std::vector<std::size_t> idx(store.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.append_row(store[idx[i]]);
  }
  return out;
}

void push_rows(std::deque<std::vector<double>>& store, const Matrix& rows,
               std::size_t cap) {
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto r = rows.row(i);
    store.emplace_back(r.begin(), r.end());
  }
  while (store.size() > cap) store.pop_front();
}

void fit(TrackerState& state, std::size_t iterations,
         const TrackerConfig& cfg) {
  Matrix pos = store_to_matrix(state.pos_store, cfg.n_pos, state.rng);
  Matrix neg = store_to_matrix(state.neg_store, cfg.n_neg, state.rng);
  TrainResult res = train(std::move(state.model), pos, neg,
                          train_config(cfg, iterations, state.rng.next_u64()),
                          cfg.augment);
  state.model = std::move(res.params);
}

}  // namespace

TrackerState initialize(const Sequence& seq, const TrackerConfig& cfg) {
  if (seq.length() == 0) {
    throw std::invalid_argument("initialize: empty sequence");
  }
  const Frame& first = seq.frame(0);
  if (first.candidates.rows() == 0) {
    throw std::invalid_argument("initialize: frame 0 has no candidates");
  }

  TrackerState state;
  state.rng = Rng(cfg.seed);
  Rng init_rng = state.rng.split();
  state.model = ModelParams::init(cfg.architecture, seq.config().dim,
                                  cfg.hidden, init_rng);

  // Positives around the known frame-0 target, negatives from the frame's
  // background candidates (without replacement).
  const Matrix pos = seq.sample_positives(
      first.candidates.row(first.truth), cfg.n_pos, state.rng);
  push_rows(state.pos_store, pos, cfg.update_draws);

  std::vector<std::size_t> background;
  background.reserve(first.candidates.rows() - 1);
  for (std::size_t c = 0; c < first.candidates.rows(); ++c) {
    if (c != first.truth) background.push_back(c);
  }
  Matrix neg;
  const std::size_t take = std::min(cfg.n_neg, background.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + state.rng.below(background.size() - i);
    std::swap(background[i], background[j]);
    neg.append_row(first.candidates.row(background[i]));
  }
  push_rows(state.neg_store, neg, cfg.update_draws);

  fit(state, cfg.init_iterations, cfg);
  return state;
}

Detection detect(const TrackerState& state, const Frame& frame) {
  Detection best{0, -1.0};
  for (std::size_t c = 0; c < frame.candidates.rows(); ++c) {
    const double p = forward(state.model, frame.candidates.row(c)).probability;
    if (p > best.score) best = {c, p};
  }
  return best;
}

void update(TrackerState& state, const Sequence& seq, std::size_t frame_index,
            std::span<const double> predicted, const TrackerConfig& cfg) {
  // Split the update draw budget: a fifth become positives around the
  // prediction, the rest background negatives.
  const std::size_t n_pos_draws = std::max<std::size_t>(1, cfg.update_draws / 5);
  const std::size_t n_neg_draws = cfg.update_draws - n_pos_draws;
  push_rows(state.pos_store,
            seq.sample_positives(predicted, n_pos_draws, state.rng),
            cfg.update_draws);
  push_rows(state.neg_store,
            seq.sample_negatives(frame_index, n_neg_draws, state.rng),
            cfg.update_draws);

  fit(state, cfg.update_iterations, cfg);
  state.frames_since_update = 0;
  state.failure_flag = false;
}

TrackRecord run(const Sequence& seq, const TrackerConfig& cfg) {
  TrackerState state = initialize(seq, cfg);
  TrackRecord record;
  record.frames.reserve(seq.length());
  std::size_t correct = 0;
  for (std::size_t f = 0; f < seq.length(); ++f) {
    const Frame& frame = seq.frame(f);
    const Detection det = detect(state, frame);
    FrameRecord fr;
    fr.frame = f;
    fr.chosen = det.index;
    fr.truth = frame.truth;
    fr.correct = det.index == frame.truth;
    fr.score = det.score;
    if (fr.correct) ++correct;

    state.failure_flag = det.score < cfg.failure_threshold;
    ++state.frames_since_update;
    if (f + 1 < seq.length() &&
        (state.frames_since_update >= cfg.update_period ||
         state.failure_flag)) {
      update(state, seq, f, frame.candidates.row(det.index), cfg);
      fr.updated = true;
    }
    record.frames.push_back(fr);
  }
  record.success_rate =
      static_cast<double>(correct) / static_cast<double>(seq.length());
  return record;
}

}  // namespace spga
