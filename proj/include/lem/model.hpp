#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lem/codec.hpp"
#include "lem/nn.hpp"

namespace lem {

struct ModelConfig {
  int k = 1;
  std::vector<int> hidden_sizes = {512, 512, 512};
  int vocab_size = kVocabSize;
  std::uint64_t seed = 0;

  int input_width() const { return lem::input_width(k); }
  void validate() const;
};

// Exact number of parameters (weights + biases) for a config.
std::int64_t param_count(const ModelConfig& c);

using ProbVector = std::vector<float>;  // 141 independent sigmoid outputs

// Anything that maps normalized input rows to 141 per-token probabilities.
// The trained MLP implements it; tests and analytics also plug in stubs.
class TokenModel {
 public:
  virtual ~TokenModel() = default;
  virtual int context_k() const = 0;
  virtual int input_width() const = 0;
  // inputs: [batch x input_width] normalized slots; outputs: [batch x 141].
  virtual void predict(const float* inputs, int batch, float* outputs, int threads) const = 0;

  ProbVector predict_one(const InputVector& in, int threads = 1) const;
};

class Model : public TokenModel {
 public:
  Model(ModelConfig config, nn::Net<float> net, Vocab vocab);

  static Model init(const ModelConfig& c, const Vocab& v = Vocab::builtin());

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  nn::Net<float>& net() { return net_; }
  const nn::Net<float>& net() const { return net_; }

  int context_k() const override { return config_.k; }
  int input_width() const override { return config_.input_width(); }
  void predict(const float* inputs, int batch, float* outputs, int threads) const override;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  bool same_parameters(const Model& other) const;

 private:
  ModelConfig config_;
  nn::Net<float> net_;
  Vocab vocab_;
};

ProbVector forward(const Model& m, const InputVector& x);

// Loss and exact analytic gradients for a single (input, target) pair.
std::pair<double, nn::Gradients<float>> loss_and_grad(const Model& m, const InputVector& x,
                                                      TokenId target);

}  // namespace lem
