#include "monoguard/network.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "monoguard/errors.hpp"

namespace monoguard {

using detail::json;
using detail::AsNumber;
using detail::AsNumberArray;
using detail::AsString;
using detail::ParseDocument;
using detail::ReadFile;
using detail::Require;
using detail::WriteFile;

namespace {

void CheckDimension(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw InvalidInputError("input has dimension " + std::to_string(x.size()) +
                            ", network expects " +
                            std::to_string(net.input_dim()));
  }
}

void CheckInBox(const Network& net, std::span<const double> x) {
  CheckDimension(net, x);
  if (!net.input_box().Contains(x)) {
    throw InvalidInputError("input lies outside the network's input box");
  }
}

Eigen::VectorXd ToEigen(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(),
                                           static_cast<Eigen::Index>(x.size()));
}

std::string ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "linear";
}

}  // namespace

bool InputBox::Contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
  }
  return true;
}

void InputBox::Validate() const {
  if (lower.size() != upper.size()) {
    throw InvalidInputError("input box lower/upper lengths differ");
  }
  if (lower.empty()) throw InvalidInputError("input box has dimension 0");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw InvalidInputError("input box bound " + std::to_string(i) +
                              " is not finite");
    }
    if (lower[i] > upper[i]) {
      throw InvalidInputError("input box bound " + std::to_string(i) +
                              " has lower > upper");
    }
  }
}

InputBox InputBox::Uniform(std::size_t dim, double lo, double hi) {
  return InputBox{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

bool Layer::operator==(const Layer& other) const {
  return activation == other.activation &&
         weights.rows() == other.weights.rows() &&
         weights.cols() == other.weights.cols() &&
         biases.size() == other.biases.size() && weights == other.weights &&
         biases == other.biases;
}

Network::Network(std::vector<Layer> layers, InputBox input_box,
                 OutputKind output_kind)
    : layers_(std::move(layers)),
      input_box_(std::move(input_box)),
      output_kind_(output_kind) {
  input_box_.Validate();
  if (layers_.empty()) throw InvalidInputError("network has no layers");
  Eigen::Index expected_in = static_cast<Eigen::Index>(input_box_.dim());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.in_dim() != expected_in) {
      throw InvalidInputError(where + " expects " +
                              std::to_string(layer.in_dim()) +
                              " inputs, previous layer provides " +
                              std::to_string(expected_in));
    }
    if (layer.out_dim() < 1) throw InvalidInputError(where + " has no neurons");
    if (layer.biases.size() != layer.out_dim()) {
      throw InvalidInputError(where + " bias length does not match weights");
    }
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
      throw InvalidInputError(where + " has non-finite parameters");
    }
    const bool last = l + 1 == layers_.size();
    if (last && layer.activation != Activation::kLinear) {
      throw InvalidInputError("output layer must be linear");
    }
    if (!last && layer.activation != Activation::kRelu) {
      throw InvalidInputError(where + ": hidden layers must be relu");
    }
    expected_in = layer.out_dim();
  }
  if (layers_.back().out_dim() != 1) {
    throw InvalidInputError("network must have a single output neuron");
  }
}

std::size_t Network::hidden_neuron_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    n += static_cast<std::size_t>(layers_[l].out_dim());
  }
  return n;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.biases.size());
  }
  return n;
}

double Network::EvaluateUnchecked(std::span<const double> x) const {
  CheckDimension(*this, x);
  Eigen::VectorXd a = ToEigen(x);
  for (const Layer& layer : layers_) {
    Eigen::VectorXd z = layer.weights * a + layer.biases;
    if (!z.allFinite()) throw NumericError("non-finite activation");
    if (layer.activation == Activation::kRelu) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a[0];
}

bool Network::operator==(const Network& other) const {
  return output_kind_ == other.output_kind_ &&
         input_box_ == other.input_box_ && layers_ == other.layers_;
}

double Forward(const Network& net, std::span<const double> x) {
  CheckInBox(net, x);
  return net.EvaluateUnchecked(x);
}

ForwardTrace Trace(const Network& net, std::span<const double> x) {
  CheckInBox(net, x);
  ForwardTrace trace;
  trace.preactivations.reserve(net.hidden_neuron_count());
  Eigen::VectorXd a = ToEigen(x);
  for (const Layer& layer : net.layers()) {
    Eigen::VectorXd z = layer.weights * a + layer.biases;
    if (!z.allFinite()) throw NumericError("non-finite activation");
    if (layer.activation == Activation::kRelu) {
      trace.preactivations.insert(trace.preactivations.end(), z.begin(),
                                  z.end());
      z = z.cwiseMax(0.0);
    }
    a = std::move(z);
  }
  trace.output = a[0];
  return trace;
}

MonotoneSpec::MonotoneSpec(std::vector<MonotoneFeature> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const MonotoneFeature& a, const MonotoneFeature& b) {
              return a.index < b.index;
            });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].index == entries_[i - 1].index) {
      throw InvalidInputError("monotone feature " +
                              std::to_string(entries_[i].index) +
                              " listed twice");
    }
  }
}

MonotoneSpec MonotoneSpec::AllIncreasing(std::vector<std::size_t> indices) {
  std::vector<MonotoneFeature> entries;
  entries.reserve(indices.size());
  for (std::size_t i : indices) {
    entries.push_back({i, Direction::kIncreasing});
  }
  return MonotoneSpec(std::move(entries));
}

std::vector<std::size_t> MonotoneSpec::indices() const {
  std::vector<std::size_t> out;
  out.reserve(entries_.size());
  for (const MonotoneFeature& e : entries_) out.push_back(e.index);
  return out;
}

bool MonotoneSpec::Contains(std::size_t index) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const MonotoneFeature& e) { return e.index == index; });
}

bool MonotoneSpec::IsCanonical() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const MonotoneFeature& e) {
                       return e.direction == Direction::kIncreasing;
                     });
}

void MonotoneSpec::Validate(std::size_t dim) const {
  for (const MonotoneFeature& e : entries_) {
    if (e.index >= dim) {
      throw InvalidInputError("monotone feature index " +
                              std::to_string(e.index) + " out of range [0, " +
                              std::to_string(dim) + ")");
    }
  }
}

CanonicalModel Canonicalize(const Network& net, const MonotoneSpec& spec) {
  spec.Validate(net.input_dim());
  if (spec.IsCanonical()) return {net, spec};

  std::vector<Layer> layers = net.layers();
  InputBox box = net.input_box();
  std::vector<MonotoneFeature> entries;
  for (const MonotoneFeature& e : spec.entries()) {
    if (e.direction == Direction::kDecreasing) {
      const auto col = static_cast<Eigen::Index>(e.index);
      layers.front().weights.col(col) *= -1.0;
      const double lo = box.lower[e.index];
      box.lower[e.index] = -box.upper[e.index];
      box.upper[e.index] = -lo;
    }
    entries.push_back({e.index, Direction::kIncreasing});
  }
  return {Network(std::move(layers), std::move(box), net.output_kind()),
          MonotoneSpec(std::move(entries))};
}

FeatureVector ReflectPoint(std::span<const double> x, const MonotoneSpec& spec) {
  FeatureVector out(x.begin(), x.end());
  for (const MonotoneFeature& e : spec.entries()) {
    if (e.direction == Direction::kDecreasing && e.index < out.size()) {
      out[e.index] = -out[e.index];
    }
  }
  return out;
}

std::string ToString(Direction direction) {
  return direction == Direction::kIncreasing ? "increasing" : "decreasing";
}

std::string ToString(OutputKind kind) {
  return kind == OutputKind::kRegression ? "regression" : "binary-logit";
}

// --- serialization ---------------------------------------------------------

std::string NetworkToJson(const Network& net) {
  json doc;
  doc["input_dim"] = net.input_dim();
  doc["input_box"] = {{"lower", net.input_box().lower},
                      {"upper", net.input_box().upper}};
  doc["output_kind"] = ToString(net.output_kind());
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        row.push_back(layer.weights(r, c));
      }
      rows.push_back(std::move(row));
    }
    std::vector<double> biases(layer.biases.begin(), layer.biases.end());
    layers.push_back({{"weights", std::move(rows)},
                      {"biases", std::move(biases)},
                      {"activation", ActivationName(layer.activation)}});
  }
  doc["layers"] = std::move(layers);
  // nlohmann emits the shortest representation that round-trips, which is
  // never more than 17 significant digits.
  return doc.dump(1) + "\n";
}

Network NetworkFromJson(const std::string& text) {
  const json doc = ParseDocument(text);
  if (!doc.is_object()) throw ParseError("", "expected an object");

  const json& dim_node = Require(doc, "input_dim", "");
  if (!dim_node.is_number_integer() || dim_node.get<long long>() < 1) {
    throw ParseError("input_dim", "expected a positive integer");
  }
  const auto dim = dim_node.get<std::size_t>();

  const json& box_node = Require(doc, "input_box", "");
  InputBox box{AsNumberArray(Require(box_node, "lower", "input_box"),
                             "input_box.lower"),
               AsNumberArray(Require(box_node, "upper", "input_box"),
                             "input_box.upper")};
  if (box.lower.size() != dim || box.upper.size() != dim) {
    throw ParseError("input_box", "bounds must have input_dim entries");
  }

  OutputKind kind = OutputKind::kRegression;
  if (doc.contains("output_kind")) {
    const std::string k = AsString(doc["output_kind"], "output_kind");
    if (k == "regression") {
      kind = OutputKind::kRegression;
    } else if (k == "binary-logit") {
      kind = OutputKind::kBinaryLogit;
    } else {
      throw ParseError("output_kind", "unknown output kind '" + k + "'");
    }
  }

  const json& layers_node = Require(doc, "layers", "");
  if (!layers_node.is_array() || layers_node.empty()) {
    throw ParseError("layers", "expected a non-empty array");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < layers_node.size(); ++l) {
    const std::string path = "layers[" + std::to_string(l) + "]";
    const json& node = layers_node[l];
    const json& rows = Require(node, "weights", path);
    if (!rows.is_array() || rows.empty()) {
      throw ParseError(path + ".weights", "expected a non-empty matrix");
    }
    const std::vector<double> first =
        AsNumberArray(rows[0], path + ".weights[0]");
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(first.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rpath = path + ".weights[" + std::to_string(r) + "]";
      const std::vector<double> row = AsNumberArray(rows[r], rpath);
      if (row.size() != first.size()) throw ParseError(rpath, "ragged matrix");
      for (std::size_t c = 0; c < row.size(); ++c) {
        layer.weights(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(c)) = row[c];
      }
    }
    const std::vector<double> biases =
        AsNumberArray(Require(node, "biases", path), path + ".biases");
    layer.biases = Eigen::Map<const Eigen::VectorXd>(
        biases.data(), static_cast<Eigen::Index>(biases.size()));
    const std::string act =
        AsString(Require(node, "activation", path), path + ".activation");
    if (act == "relu") {
      layer.activation = Activation::kRelu;
    } else if (act == "linear") {
      layer.activation = Activation::kLinear;
    } else {
      throw ParseError(path + ".activation", "unknown activation '" + act + "'");
    }
    const bool last = l + 1 == layers_node.size();
    if (!last && layer.activation != Activation::kRelu) {
      throw ParseError(path + ".activation", "hidden layers must be relu");
    }
    if (last && layer.activation != Activation::kLinear) {
      throw ParseError(path + ".activation", "output layer must be linear");
    }
    layers.push_back(std::move(layer));
  }
  try {
    return Network(std::move(layers), std::move(box), kind);
  } catch (const InvalidInputError& e) {
    throw ParseError("layers", e.what());
  }
}

void SaveNetwork(const Network& net, const std::filesystem::path& path) {
  WriteFile(path, NetworkToJson(net));
}

Network LoadNetwork(const std::filesystem::path& path) {
  return NetworkFromJson(ReadFile(path));
}

std::string MonotoneSpecToJson(const MonotoneSpec& spec) {
  json features = json::array();
  for (const MonotoneFeature& e : spec.entries()) {
    features.push_back(
        {{"index", e.index}, {"direction", ToString(e.direction)}});
  }
  return json{{"features", std::move(features)}}.dump(1) + "\n";
}

MonotoneSpec MonotoneSpecFromJson(const std::string& text) {
  const json doc = ParseDocument(text);
  const json& features = Require(doc, "features", "");
  if (!features.is_array()) throw ParseError("features", "expected an array");
  std::vector<MonotoneFeature> entries;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string path = "features[" + std::to_string(i) + "]";
    const json& index = Require(features[i], "index", path);
    if (!index.is_number_integer() || index.get<long long>() < 0) {
      throw ParseError(path + ".index", "expected a non-negative integer");
    }
    const std::string dir =
        AsString(Require(features[i], "direction", path), path + ".direction");
    Direction direction;
    if (dir == "increasing") {
      direction = Direction::kIncreasing;
    } else if (dir == "decreasing") {
      direction = Direction::kDecreasing;
    } else {
      throw ParseError(path + ".direction", "unknown direction '" + dir + "'");
    }
    entries.push_back({index.get<std::size_t>(), direction});
  }
  try {
    return MonotoneSpec(std::move(entries));
  } catch (const InvalidInputError& e) {
    throw ParseError("features", e.what());
  }
}

MonotoneSpec LoadMonotoneSpec(const std::filesystem::path& path) {
  return MonotoneSpecFromJson(ReadFile(path));
}

}  // namespace monoguard
