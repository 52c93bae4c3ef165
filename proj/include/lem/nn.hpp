#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lem/common.hpp"
#include "lem/rng.hpp"

// Dense feed-forward kernel, templated on the scalar so tests can run the
// exact same math in double precision. Reductions always run in a fixed
// serial order per output element; parallelism only splits independent
// elements, which keeps results bit-identical across thread counts.

namespace lem::nn {

template <typename T>
struct Layer {
  int fan_in = 0;
  int fan_out = 0;
  std::vector<T> w;  // [fan_out x fan_in], row-major
  std::vector<T> b;  // [fan_out]
};

template <typename T>
struct Net {
  std::vector<Layer<T>> layers;

  int input_width() const { return layers.front().fan_in; }
  int output_width() const { return layers.back().fan_out; }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const auto& l : layers) {
      n += static_cast<std::int64_t>(l.fan_in) * l.fan_out + l.fan_out;
    }
    return n;
  }

  template <typename U>
  Net<U> cast() const {
    Net<U> out;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) {
      Layer<U> lu;
      lu.fan_in = l.fan_in;
      lu.fan_out = l.fan_out;
      lu.w.assign(l.w.begin(), l.w.end());
      lu.b.assign(l.b.begin(), l.b.end());
      out.layers.push_back(std::move(lu));
    }
    return out;
  }
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
template <typename T>
Net<T> init_net(const std::vector<int>& widths, std::uint64_t seed) {
  Net<T> net;
  RngStream rng(seed, 0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer<T> layer;
    layer.fan_in = widths[l];
    layer.fan_out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
    layer.w.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
    for (auto& w : layer.w) {
      w = static_cast<T>((2.0 * rng.next_double() - 1.0) * bound);
    }
    layer.b.assign(static_cast<std::size_t>(layer.fan_out), T(0));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// C[b,o] = dot(A[b,:], W[o,:]) + bias[o].  A: [batch x fan_in], C: [batch x fan_out].
template <typename T>
void affine(const T* a, int batch, const Layer<T>& l, T* c, int threads) {
  parallel_for(batch, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t row = lo; row < hi; ++row) {
      const T* x = a + row * l.fan_in;
      T* out = c + row * l.fan_out;
      for (int o = 0; o < l.fan_out; ++o) {
        const T* w = l.w.data() + static_cast<std::size_t>(o) * l.fan_in;
        T acc = l.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < l.fan_in; ++i) acc += x[i] * w[i];
        out[o] = acc;
      }
    }
  });
}

template <typename T>
void relu_inplace(T* z, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) {
    if (z[i] < T(0)) z[i] = T(0);
  }
}

template <typename T>
void sigmoid_inplace(T* z, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) {
    z[i] = T(1) / (T(1) + std::exp(-z[i]));
  }
}

// Per-layer activations for one batch; acts[0] is the input, acts.back() the
// sigmoid probabilities.
template <typename T>
struct Activations {
  std::vector<std::vector<T>> acts;
};

template <typename T>
void forward_batch(const Net<T>& net, const T* input, int batch, Activations<T>& ws,
                   int threads) {
  const std::size_t n_layers = net.layers.size();
  ws.acts.resize(n_layers + 1);
  ws.acts[0].assign(input, input + static_cast<std::size_t>(batch) * net.input_width());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = net.layers[l];
    ws.acts[l + 1].resize(static_cast<std::size_t>(batch) * layer.fan_out);
    affine(ws.acts[l].data(), batch, layer, ws.acts[l + 1].data(), threads);
    if (l + 1 < n_layers) {
      relu_inplace(ws.acts[l + 1].data(), static_cast<std::int64_t>(ws.acts[l + 1].size()));
    } else {
      sigmoid_inplace(ws.acts[l + 1].data(), static_cast<std::int64_t>(ws.acts[l + 1].size()));
    }
  }
}

template <typename T>
struct Gradients {
  std::vector<Layer<T>> layers;  // same shapes as the net

  void match(const Net<T>& net) {
    layers.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      layers[l].fan_in = net.layers[l].fan_in;
      layers[l].fan_out = net.layers[l].fan_out;
      layers[l].w.assign(net.layers[l].w.size(), T(0));
      layers[l].b.assign(net.layers[l].b.size(), T(0));
    }
  }
};

inline constexpr double kBceEps = 1e-7;

// Mean BCE over all outputs and the batch, one-hot targets.
template <typename T>
double bce_loss(const T* probs, const std::uint16_t* targets, int batch, int width) {
  double total = 0.0;
  for (int b = 0; b < batch; ++b) {
    const T* p = probs + static_cast<std::size_t>(b) * width;
    for (int t = 0; t < width; ++t) {
      double pc = std::min(std::max(static_cast<double>(p[t]), kBceEps), 1.0 - kBceEps);
      total -= (t == targets[b]) ? std::log(pc) : std::log(1.0 - pc);
    }
  }
  return total / (static_cast<double>(batch) * width);
}

// Analytic gradients of the mean BCE through the sigmoid output:
// dL/dz = (p - y) / (batch * width). Fills `grads`; returns the loss.
template <typename T>
double backward_batch(const Net<T>& net, const Activations<T>& ws,
                      const std::uint16_t* targets, int batch, Gradients<T>& grads,
                      int threads) {
  const std::size_t n_layers = net.layers.size();
  const int width = net.output_width();
  const double loss = bce_loss(ws.acts[n_layers].data(), targets, batch, width);

  const T scale = T(1) / (static_cast<T>(batch) * static_cast<T>(width));
  std::vector<T> delta(static_cast<std::size_t>(batch) * width);
  const T* probs = ws.acts[n_layers].data();
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < width; ++t) {
      const std::size_t i = static_cast<std::size_t>(b) * width + t;
      const T y = (t == targets[b]) ? T(1) : T(0);
      delta[i] = (probs[i] - y) * scale;
    }
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = net.layers[l];
    auto& g = grads.layers[l];
    const T* below = ws.acts[l].data();  // [batch x fan_in]

    // dW[o,:] and db[o]: full batch reduced serially per output row.
    parallel_for(layer.fan_out, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t o = lo; o < hi; ++o) {
        T* gw = g.w.data() + static_cast<std::size_t>(o) * layer.fan_in;
        T gb = T(0);
        for (int i = 0; i < layer.fan_in; ++i) gw[i] = T(0);
        for (int b = 0; b < batch; ++b) {
          const T d = delta[static_cast<std::size_t>(b) * layer.fan_out + o];
          gb += d;
          const T* x = below + static_cast<std::size_t>(b) * layer.fan_in;
          for (int i = 0; i < layer.fan_in; ++i) gw[i] += d * x[i];
        }
        g.b[static_cast<std::size_t>(o)] = gb;
      }
    });

    if (l == 0) break;

    // Propagate through the affine map and the ReLU below it.
    std::vector<T> next(static_cast<std::size_t>(batch) * layer.fan_in);
    parallel_for(batch, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t b = lo; b < hi; ++b) {
        const T* d = delta.data() + b * layer.fan_out;
        const T* act = below + b * layer.fan_in;
        T* nd = next.data() + b * layer.fan_in;
        for (int i = 0; i < layer.fan_in; ++i) {
          T acc = T(0);
          for (int o = 0; o < layer.fan_out; ++o) {
            acc += d[o] * layer.w[static_cast<std::size_t>(o) * layer.fan_in + i];
          }
          nd[i] = (act[i] > T(0)) ? acc : T(0);
        }
      }
    });
    delta = std::move(next);
  }
  return loss;
}

}  // namespace lem::nn
