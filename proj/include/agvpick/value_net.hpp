#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace agvpick {

enum class Activation : std::uint32_t { Tanh = 1 };

struct NetArchitecture {
  int inputs = 12;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::Tanh;

  bool operator==(const NetArchitecture&) const = default;
  int parameter_count() const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected scalar regressor. Outputs are multiplied by value_scale,
/// so the network itself works on O(1) targets.
///
/// Parameters are stored flat: for each layer the weight matrix
/// (outputs x inputs, column-major) followed by its bias.
class ValueNet {
 public:
  ValueNet() : ValueNet(NetArchitecture{}) {}
  /// All-zero parameters.
  explicit ValueNet(NetArchitecture arch, double value_scale = 1000.0);
  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static ValueNet random(NetArchitecture arch, std::uint64_t seed, double value_scale = 1000.0);

  const NetArchitecture& architecture() const { return arch_; }
  int parameter_count() const { return static_cast<int>(params_.size()); }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }
  double value_scale() const { return value_scale_; }

  /// Constants the features were normalised with; carried in checkpoints.
  const std::vector<double>& normalization() const { return normalization_; }
  void set_normalization(std::vector<double> constants) { normalization_ = std::move(constants); }

  /// Scaled value of one feature vector.
  double score(const Eigen::VectorXd& x) const;
  /// Scaled values of the columns of `x`.
  Eigen::VectorXd score_batch(const Eigen::MatrixXd& x) const;

  /// Mean squared error between score_batch(x) and `targets`; fills `grad`
  /// (same layout as parameters) when non-null.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& targets, Eigen::VectorXd* grad) const;

  /// this <- tau * source + (1 - tau) * this.
  void soft_update_from(const ValueNet& source, double tau);

  bool all_finite() const { return params_.allFinite(); }

 private:
  NetArchitecture arch_;
  double value_scale_ = 1000.0;
  std::vector<double> normalization_;
  Eigen::VectorXd params_;
};

class Adam {
 public:
  explicit Adam(int parameter_count, double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long long steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  long long t_ = 0;
  Eigen::VectorXd m_, v_;
};

void save_checkpoint(const ValueNet& net, const std::string& path);
ValueNet load_checkpoint(const std::string& path);
/// As load_checkpoint, but rejects any architecture other than `expected`.
ValueNet load_checkpoint(const std::string& path, const NetArchitecture& expected);

}  // namespace agvpick
