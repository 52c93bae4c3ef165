#include "lem/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include "lem/rng.hpp"
#include "lem/sampler.hpp"

namespace lem {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (lr0 <= 0.0) throw ConfigError("initial learning rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

void PairSet::append(const InputVector& input, TokenId target, int position) {
  if (static_cast<int>(input.size()) != width_) {
    throw Error("pair width mismatch: " + std::to_string(input.size()));
  }
  if (!position_mask(position).contains(target)) {
    throw DataError("target token " + std::to_string(target) +
                    " illegal for position " + std::to_string(position));
  }
  for (TokenId t : input) slots_.push_back(static_cast<std::uint8_t>(t));
  targets_.push_back(static_cast<std::uint8_t>(target));
  positions_.push_back(static_cast<std::uint8_t>(position));
}

void PairSet::append_all(const PairSet& other) {
  if (other.width_ != width_) throw Error("cannot merge pair sets of different widths");
  slots_.insert(slots_.end(), other.slots_.begin(), other.slots_.end());
  targets_.insert(targets_.end(), other.targets_.begin(), other.targets_.end());
  positions_.insert(positions_.end(), other.positions_.begin(), other.positions_.end());
}

TrainingPair PairSet::at(std::int64_t i) const {
  TrainingPair p;
  const auto* base = slots_.data() + i * width_;
  p.input.assign(base, base + width_);
  p.target = targets_[static_cast<std::size_t>(i)];
  p.position = positions_[static_cast<std::size_t>(i)];
  return p;
}

void PairSet::features(std::int64_t i, float* out) const {
  const auto* base = slots_.data() + i * width_;
  for (int s = 0; s < width_; ++s) {
    out[s] = static_cast<float>(base[s]) / kNormalization;
  }
}

namespace {

// True predicted tokens of an event, in prediction order.
std::array<TokenId, kPredictedTokens> predicted_tokens(const Event& e) {
  return {static_cast<TokenId>(e.type),
          static_cast<TokenId>(e.is_goal),
          static_cast<TokenId>(e.is_accurate),
          static_cast<TokenId>(e.is_home),
          static_cast<TokenId>(e.time_elapsed),
          static_cast<TokenId>(e.x),
          static_cast<TokenId>(e.y)};
}

}  // namespace

PairSet make_pairs(const std::vector<Event>& match, int k, const Vocab& v) {
  PairSet out(input_width(k));
  for (std::size_t i = 0; i < match.size(); ++i) {
    const Event& e = match[i];
    const std::size_t ctx_begin = i > static_cast<std::size_t>(k) ? i - k : 0;
    const std::span<const Event> context(match.data() + ctx_begin, i - ctx_begin);

    if (e.type >= kPeriodOverToken) {
      out.append(build_input(context, {}, v, k), static_cast<TokenId>(e.type), 0);
      continue;
    }
    const auto tokens = predicted_tokens(e);
    for (int p = 0; p < kPredictedTokens; ++p) {
      const std::span<const TokenId> prefix(tokens.data(), static_cast<std::size_t>(p));
      out.append(build_input(context, prefix, v, k), tokens[static_cast<std::size_t>(p)], p);
    }
  }
  return out;
}

PairSet make_pairs_corpus(const std::vector<MatchEvents>& matches, int k, const Vocab& v) {
  PairSet out(input_width(k));
  for (const auto& m : matches) {
    out.append_all(make_pairs(m.events, k, v));
  }
  return out;
}

double cosine_lr(int epoch, const TrainConfig& cfg) {
  cfg.validate();
  if (epoch < 0 || epoch >= cfg.epochs) throw Error("epoch out of range");
  return 0.5 * cfg.lr0 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / cfg.epochs));
}

namespace {

struct AdamState {
  std::vector<nn::Layer<float>> m;
  std::vector<nn::Layer<float>> v;
  std::int64_t step = 0;

  explicit AdamState(const nn::Net<float>& net) {
    nn::Gradients<float> shape;
    shape.match(net);
    m = shape.layers;
    v = shape.layers;
  }
};

void adam_step(nn::Net<float>& net, const nn::Gradients<float>& g, AdamState& st,
               const TrainConfig& tc, double lr, int threads) {
  st.step += 1;
  const float b1 = static_cast<float>(tc.adam_beta1);
  const float b2 = static_cast<float>(tc.adam_beta2);
  const float eps = static_cast<float>(tc.adam_eps);
  const float bc1 = 1.0f - static_cast<float>(std::pow(tc.adam_beta1, st.step));
  const float bc2 = 1.0f - static_cast<float>(std::pow(tc.adam_beta2, st.step));
  const float alpha = static_cast<float>(lr);

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto update = [&](std::vector<float>& param, const std::vector<float>& grad,
                      std::vector<float>& m, std::vector<float>& v) {
      parallel_for(static_cast<std::int64_t>(param.size()), threads,
                   [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t i = lo; i < hi; ++i) {
                       const float gi = grad[static_cast<std::size_t>(i)];
                       float& mi = m[static_cast<std::size_t>(i)];
                       float& vi = v[static_cast<std::size_t>(i)];
                       mi = b1 * mi + (1.0f - b1) * gi;
                       vi = b2 * vi + (1.0f - b2) * gi * gi;
                       const float mhat = mi / bc1;
                       const float vhat = vi / bc2;
                       param[static_cast<std::size_t>(i)] -=
                           alpha * mhat / (std::sqrt(vhat) + eps);
                     }
                   });
    };
    update(net.layers[l].w, g.layers[l].w, st.m[l].w, st.v[l].w);
    update(net.layers[l].b, g.layers[l].b, st.m[l].b, st.v[l].b);
  }
}

}  // namespace

TrainResult train(const PairSet& data, const ModelConfig& mc, const TrainConfig& tc,
                  const Vocab& v, const EpochCallback& on_epoch) {
  mc.validate();
  tc.validate();
  if (data.empty()) throw ConfigError("training set is empty");
  if (data.width() != mc.input_width()) {
    throw ConfigError("pair width " + std::to_string(data.width()) +
                      " does not match model input width " +
                      std::to_string(mc.input_width()));
  }

  Model model = Model::init(mc, v);
  AdamState adam(model.net());
  const int threads = tc.threads < 1 ? 1 : tc.threads;
  const std::int64_t n = data.size();
  const int bs = tc.batch_size;

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  std::vector<float> batch_in;
  std::vector<std::uint16_t> batch_tgt;
  nn::Activations<float> ws;
  nn::Gradients<float> grads;
  grads.match(model.net());

  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(tc.epochs));

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = cosine_lr(epoch, tc);

    if (tc.shuffle) {
      RngStream rng(tc.seed, static_cast<std::uint64_t>(epoch) + 1);
      for (std::int64_t i = n - 1; i > 0; --i) {
        const std::int64_t j =
            static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
    }

    double loss_sum = 0.0;
    std::int64_t batch_index = 0;
    for (std::int64_t start = 0; start < n; start += bs, ++batch_index) {
      const int b = static_cast<int>(std::min<std::int64_t>(bs, n - start));
      batch_in.resize(static_cast<std::size_t>(b) * data.width());
      batch_tgt.resize(static_cast<std::size_t>(b));
      parallel_for(b, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t r = lo; r < hi; ++r) {
          const std::int64_t idx = order[static_cast<std::size_t>(start + r)];
          data.features(idx, batch_in.data() + r * data.width());
          batch_tgt[static_cast<std::size_t>(r)] = data.target(idx);
        }
      });

      nn::forward_batch(model.net(), batch_in.data(), b, ws, threads);
      const double loss =
          nn::backward_batch(model.net(), ws, batch_tgt.data(), b, grads, threads);
      if (!std::isfinite(loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_index));
      }
      loss_sum += loss * b;
      adam_step(model.net(), grads, adam, tc, lr, threads);
    }

    EpochStats st;
    st.epoch = epoch;
    st.lr = lr;
    st.mean_loss = loss_sum / static_cast<double>(n);
    st.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(st);
    if (on_epoch) on_epoch(epoch, model, st);
  }

  return {std::move(model), std::move(history)};
}

void write_train_log(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write training log: " + path);
  out << "epoch,lr,mean_loss,duration_s\n";
  char line[128];
  for (const auto& st : history) {
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.3f\n", st.epoch, st.lr, st.mean_loss,
                  st.duration_s);
    out << line;
  }
}

}  // namespace lem
