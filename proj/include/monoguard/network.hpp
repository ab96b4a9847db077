#ifndef MONOGUARD_NETWORK_HPP_
#define MONOGUARD_NETWORK_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace monoguard {

using FeatureVector = std::vector<double>;

enum class Activation { kRelu, kLinear };
enum class OutputKind { kRegression, kBinaryLogit };
enum class Direction { kIncreasing, kDecreasing };

// Tolerance used when checking that a point lies inside an input box.
inline constexpr double kBoxTolerance = 1e-9;

struct InputBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool Contains(std::span<const double> x, double tol = kBoxTolerance) const;
  // Throws InvalidInputError unless lower/upper have equal length, are finite
  // and ordered.
  void Validate() const;

  static InputBox Uniform(std::size_t dim, double lo, double hi);
  bool operator==(const InputBox&) const = default;
};

struct Layer {
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd biases;   // out_dim
  Activation activation = Activation::kRelu;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
  bool operator==(const Layer& other) const;
};

// A feed-forward ReLU network with a single linear output neuron. Hidden
// layers are ReLU; the last layer is linear. Immutable after construction.
class Network {
 public:
  // Throws InvalidInputError when the layers violate the invariants above.
  Network(std::vector<Layer> layers, InputBox input_box,
          OutputKind output_kind = OutputKind::kRegression);

  std::size_t input_dim() const { return input_box_.dim(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const InputBox& input_box() const { return input_box_; }
  OutputKind output_kind() const { return output_kind_; }

  std::size_t hidden_layer_count() const { return layers_.size() - 1; }
  std::size_t hidden_neuron_count() const;
  std::size_t parameter_count() const;

  // Evaluates without the box check; dimension is still checked.
  double EvaluateUnchecked(std::span<const double> x) const;

  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
  InputBox input_box_;
  OutputKind output_kind_;
};

// f(x). Throws InvalidInputError on dimension mismatch or when x leaves the
// input box by more than kBoxTolerance, NumericError on non-finite values.
double Forward(const Network& net, std::span<const double> x);

struct ForwardTrace {
  double output = 0.0;
  // Hidden-neuron preactivations, layer by layer.
  std::vector<double> preactivations;
};

ForwardTrace Trace(const Network& net, std::span<const double> x);

struct MonotoneFeature {
  std::size_t index = 0;
  Direction direction = Direction::kIncreasing;
  bool operator==(const MonotoneFeature&) const = default;
};

// The set S of monotone features, kept sorted by feature index.
class MonotoneSpec {
 public:
  MonotoneSpec() = default;
  explicit MonotoneSpec(std::vector<MonotoneFeature> entries);

  static MonotoneSpec AllIncreasing(std::vector<std::size_t> indices);

  const std::vector<MonotoneFeature>& entries() const { return entries_; }
  std::vector<std::size_t> indices() const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool Contains(std::size_t index) const;
  bool IsCanonical() const;

  // Throws InvalidInputError if an index is outside [0, dim).
  void Validate(std::size_t dim) const;

  bool operator==(const MonotoneSpec&) const = default;

 private:
  std::vector<MonotoneFeature> entries_;
};

struct CanonicalModel {
  Network net;
  MonotoneSpec spec;
};

// Negates the first-layer column and reflects the box interval of every
// decreasing feature so that all of S is increasing. The result satisfies
// canonical.net(ReflectPoint(x, spec)) == net(x).
CanonicalModel Canonicalize(const Network& net, const MonotoneSpec& spec);

// Negates the coordinates of decreasing features; its own inverse.
FeatureVector ReflectPoint(std::span<const double> x, const MonotoneSpec& spec);

std::string NetworkToJson(const Network& net);
Network NetworkFromJson(const std::string& text);
void SaveNetwork(const Network& net, const std::filesystem::path& path);
Network LoadNetwork(const std::filesystem::path& path);

std::string MonotoneSpecToJson(const MonotoneSpec& spec);
MonotoneSpec MonotoneSpecFromJson(const std::string& text);
MonotoneSpec LoadMonotoneSpec(const std::filesystem::path& path);

std::string ToString(Direction direction);
std::string ToString(OutputKind kind);

}  // namespace monoguard

#endif  // MONOGUARD_NETWORK_HPP_
