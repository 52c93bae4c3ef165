#include "lem/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace lem {

void ModelConfig::validate() const {
  if (k < 1) throw ConfigError("context length k must be >= 1");
  if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must be non-empty");
  for (int h : hidden_sizes) {
    if (h < 1) throw ConfigError("hidden layer width must be >= 1");
  }
  if (vocab_size != kVocabSize) {
    throw ConfigError("vocab_size must be 141, got " + std::to_string(vocab_size));
  }
}

std::int64_t param_count(const ModelConfig& c) {
  c.validate();
  std::int64_t n = 0;
  int fan_in = c.input_width();
  for (int h : c.hidden_sizes) {
    n += static_cast<std::int64_t>(fan_in) * h + h;
    fan_in = h;
  }
  n += static_cast<std::int64_t>(fan_in) * c.vocab_size + c.vocab_size;
  return n;
}

ProbVector TokenModel::predict_one(const InputVector& in, int threads) const {
  std::vector<float> feats(in.size());
  input_to_features(in, feats.data());
  ProbVector out(kVocabSize);
  predict(feats.data(), 1, out.data(), threads);
  return out;
}

Model::Model(ModelConfig config, nn::Net<float> net, Vocab vocab)
    : config_(std::move(config)), net_(std::move(net)), vocab_(std::move(vocab)) {
  config_.validate();
  if (net_.input_width() != config_.input_width() || net_.output_width() != config_.vocab_size) {
    throw Error("network shape does not match model config");
  }
}

Model Model::init(const ModelConfig& c, const Vocab& v) {
  c.validate();
  std::vector<int> widths;
  widths.push_back(c.input_width());
  widths.insert(widths.end(), c.hidden_sizes.begin(), c.hidden_sizes.end());
  widths.push_back(c.vocab_size);
  return Model(c, nn::init_net<float>(widths, c.seed), v);
}

void Model::predict(const float* inputs, int batch, float* outputs, int threads) const {
  thread_local nn::Activations<float> ws;
  nn::forward_batch(net_, inputs, batch, ws, threads);
  std::memcpy(outputs, ws.acts.back().data(),
              static_cast<std::size_t>(batch) * kVocabSize * sizeof(float));
}

ProbVector forward(const Model& m, const InputVector& x) {
  if (static_cast<int>(x.size()) != m.config().input_width()) {
    throw Error("input width " + std::to_string(x.size()) + " does not match model width " +
                std::to_string(m.config().input_width()));
  }
  return m.predict_one(x);
}

std::pair<double, nn::Gradients<float>> loss_and_grad(const Model& m, const InputVector& x,
                                                      TokenId target) {
  if (target >= kVocabSize) throw Error("target token out of range");
  std::vector<float> feats(x.size());
  input_to_features(x, feats.data());
  nn::Activations<float> ws;
  nn::forward_batch(m.net(), feats.data(), 1, ws, 1);
  nn::Gradients<float> grads;
  grads.match(m.net());
  const double loss = nn::backward_batch(m.net(), ws, &target, 1, grads, 1);
  return {loss, std::move(grads)};
}

namespace {

constexpr char kMagic[4] = {'L', 'E', 'M', '1'};

void write_exact(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_exact(std::ifstream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError(std::string("checkpoint truncated while reading ") + what);
  }
}

}  // namespace

void Model::save(const std::string& path) const {
  nlohmann::json header;
  header["version"] = 1;
  header["config"] = {{"k", config_.k},
                      {"hidden_sizes", config_.hidden_sizes},
                      {"vocab_size", config_.vocab_size},
                      {"input_width", config_.input_width()},
                      {"seed", config_.seed}};
  header["vocab"] = {{"version", 1}, {"event_types", vocab_.event_types()}};
  header["normalization"] = kNormalization;
  header["dtype"] = "float32";
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& l : net_.layers) {
    shapes.push_back({{"fan_in", l.fan_in}, {"fan_out", l.fan_out}});
  }
  header["layers"] = shapes;

  const std::string header_text = header.dump();
  if (header_text.size() > 0xFFFFFFFFull) throw IoError("checkpoint header too large");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  write_exact(out, kMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
  write_exact(out, &len, 4);
  write_exact(out, header_text.data(), header_text.size());
  for (const auto& l : net_.layers) {
    write_exact(out, l.w.data(), l.w.size() * sizeof(float));
    write_exact(out, l.b.data(), l.b.size() * sizeof(float));
  }
  if (!out) throw IoError("short write to checkpoint: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[4];
  read_exact(in, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("bad checkpoint magic (expected LEM1): " + path);
  }
  std::uint32_t header_len = 0;
  read_exact(in, &header_len, 4, "header length");
  std::string header_text(header_len, '\0');
  read_exact(in, header_text.data(), header_len, "header");

  nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
  if (header.is_discarded()) throw ParseError("checkpoint header is not valid JSON");
  if (header.value("version", 0) != 1) {
    throw ParseError("unsupported checkpoint version: " +
                     std::to_string(header.value("version", 0)));
  }

  ModelConfig cfg;
  try {
    const auto& jc = header.at("config");
    cfg.k = jc.at("k").get<int>();
    cfg.hidden_sizes = jc.at("hidden_sizes").get<std::vector<int>>();
    cfg.vocab_size = jc.at("vocab_size").get<int>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header missing config field: ") + e.what());
  }
  cfg.validate();

  std::vector<std::string> types;
  try {
    types = header.at("vocab").at("event_types").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header missing vocab field: ") + e.what());
  }

  nn::Net<float> net;
  for (const auto& js : header.at("layers")) {
    nn::Layer<float> l;
    l.fan_in = js.at("fan_in").get<int>();
    l.fan_out = js.at("fan_out").get<int>();
    if (l.fan_in < 1 || l.fan_out < 1) throw ParseError("checkpoint layer shape invalid");
    l.w.resize(static_cast<std::size_t>(l.fan_in) * l.fan_out);
    l.b.resize(static_cast<std::size_t>(l.fan_out));
    read_exact(in, l.w.data(), l.w.size() * sizeof(float), "weight tensor");
    read_exact(in, l.b.data(), l.b.size() * sizeof(float), "bias tensor");
    net.layers.push_back(std::move(l));
  }
  if (net.layers.empty()) throw ParseError("checkpoint declares no layers");

  // Shape chain must match the declared config.
  std::vector<int> expect;
  expect.push_back(cfg.input_width());
  expect.insert(expect.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  expect.push_back(cfg.vocab_size);
  if (net.layers.size() != expect.size() - 1) {
    throw ParseError("checkpoint layer count does not match config");
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].fan_in != expect[i] || net.layers[i].fan_out != expect[i + 1]) {
      throw ParseError("checkpoint layer " + std::to_string(i) + " shape mismatch vs config");
    }
  }

  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) throw ParseError("checkpoint has trailing bytes: " + path);

  return Model(std::move(cfg), std::move(net), Vocab(std::move(types)));
}

bool Model::same_parameters(const Model& other) const {
  if (net_.layers.size() != other.net_.layers.size()) return false;
  for (std::size_t i = 0; i < net_.layers.size(); ++i) {
    const auto& a = net_.layers[i];
    const auto& b = other.net_.layers[i];
    if (a.fan_in != b.fan_in || a.fan_out != b.fan_out) return false;
    if (std::memcmp(a.w.data(), b.w.data(), a.w.size() * sizeof(float)) != 0) return false;
    if (std::memcmp(a.b.data(), b.b.data(), a.b.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

}  // namespace lem
