#include "agvpick/value_net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace agvpick {

namespace {

std::vector<int> layer_sizes(const NetArchitecture& arch) {
  std::vector<int> sizes{arch.inputs};
  sizes.insert(sizes.end(), arch.hidden.begin(), arch.hidden.end());
  sizes.push_back(1);
  return sizes;
}

void check_architecture(const NetArchitecture& arch) {
  if (arch.inputs < 1) throw std::invalid_argument("value net: inputs must be >= 1");
  for (int h : arch.hidden)
    if (h < 1) throw std::invalid_argument("value net: hidden sizes must be >= 1");
  if (arch.activation != Activation::Tanh) throw std::invalid_argument("value net: unknown activation");
}

struct LayerView {
  Eigen::Map<const Eigen::MatrixXd> w;
  Eigen::Map<const Eigen::VectorXd> b;
};

std::vector<LayerView> views(const NetArchitecture& arch, const Eigen::VectorXd& p) {
  const auto sizes = layer_sizes(arch);
  std::vector<LayerView> out;
  Eigen::Index at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int o = sizes[l + 1];
    out.push_back({Eigen::Map<const Eigen::MatrixXd>(p.data() + at, o, in),
                   Eigen::Map<const Eigen::VectorXd>(p.data() + at + static_cast<Eigen::Index>(o) * in, o)});
    at += static_cast<Eigen::Index>(o) * in + o;
  }
  return out;
}

}  // namespace

int NetArchitecture::parameter_count() const {
  const auto sizes = layer_sizes(*this);
  int n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return n;
}

ValueNet::ValueNet(NetArchitecture arch, double value_scale) : arch_(std::move(arch)), value_scale_(value_scale) {
  check_architecture(arch_);
  if (!(value_scale_ > 0.0) || !std::isfinite(value_scale_))
    throw std::invalid_argument("value net: value_scale must be positive");
  params_ = Eigen::VectorXd::Zero(arch_.parameter_count());
}

ValueNet ValueNet::random(NetArchitecture arch, std::uint64_t seed, double value_scale) {
  ValueNet net(std::move(arch), value_scale);
  std::mt19937_64 rng(seed);
  const auto sizes = layer_sizes(net.arch_);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    const Eigen::Index weights = static_cast<Eigen::Index>(sizes[l + 1]) * sizes[l];
    for (Eigen::Index i = 0; i < weights; ++i) net.params_[at + i] = u(rng);
    at += weights + sizes[l + 1];
  }
  return net;
}

double ValueNet::score(const Eigen::VectorXd& x) const { return score_batch(x)(0); }

Eigen::VectorXd ValueNet::score_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != arch_.inputs) throw std::invalid_argument("value net: feature dimension mismatch");
  const auto layers = views(arch_, params_);
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].w * a;
    z.colwise() += layers[l].b;
    a = l + 1 < layers.size() ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return value_scale_ * a.row(0).transpose();
}

double ValueNet::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& targets,
                                   Eigen::VectorXd* grad) const {
  if (x.rows() != arch_.inputs) throw std::invalid_argument("value net: feature dimension mismatch");
  if (x.cols() != targets.size()) throw std::invalid_argument("value net: target count mismatch");
  const Eigen::Index n = x.cols();
  if (n == 0) {
    if (grad) *grad = Eigen::VectorXd::Zero(params_.size());
    return 0.0;
  }
  const auto layers = views(arch_, params_);
  std::vector<Eigen::MatrixXd> acts{x};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].w * acts.back();
    z.colwise() += layers[l].b;
    acts.push_back(l + 1 < layers.size() ? Eigen::MatrixXd(z.array().tanh()) : z);
  }
  const Eigen::VectorXd err = value_scale_ * acts.back().row(0).transpose() - targets;
  const double loss = err.squaredNorm() / static_cast<double>(n);
  if (!grad) return loss;

  grad->setZero(params_.size());
  const auto sizes = layer_sizes(arch_);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    offsets.push_back(at);
    at += static_cast<Eigen::Index>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }
  // delta = dLoss/dz for the current layer, one column per sample.
  Eigen::MatrixXd delta = (2.0 * value_scale_ / static_cast<double>(n)) * err.transpose();
  for (std::size_t l = layers.size(); l-- > 0;) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad->data() + offsets[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad->data() + offsets[l] + static_cast<Eigen::Index>(out) * in, out);
    gw.noalias() = delta * acts[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].w.transpose() * delta;
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return loss;
}

void ValueNet::soft_update_from(const ValueNet& source, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft update: tau must be in (0, 1]");
  if (source.arch_ != arch_) throw std::invalid_argument("soft update: architecture mismatch");
  if (tau == 1.0)
    params_ = source.params_;
  else
    params_ = tau * source.params_ + (1.0 - tau) * params_;
}

Adam::Adam(int parameter_count, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      b1_(beta1),
      b2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(parameter_count)),
      v_(Eigen::VectorXd::Zero(parameter_count)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = b1_ * m_ + (1.0 - b1_) * grad;
  v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

// Checkpoint layout, all little-endian:
//   "AGVPVNET" | u32 version | u32 inputs | u32 hidden count | u32 hidden[] |
//   u32 activation | f64 value_scale | u32 norm count | f64 norm[] |
//   u64 param count | f64 params[]
namespace {

constexpr char kMagic[8] = {'A', 'G', 'V', 'P', 'V', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 4);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t u64() {
    unsigned char bytes[8];
    read(bytes, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    unsigned char bytes[4];
    read(bytes, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) throw CheckpointError("checkpoint: truncated file");
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const ValueNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
  const auto& arch = net.architecture();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(arch.inputs));
  put_u32(out, static_cast<std::uint32_t>(arch.hidden.size()));
  for (int h : arch.hidden) put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(arch.activation));
  put_f64(out, net.value_scale());
  put_u32(out, static_cast<std::uint32_t>(net.normalization().size()));
  for (double c : net.normalization()) put_f64(out, c);
  put_u64(out, static_cast<std::uint64_t>(net.parameter_count()));
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i) put_f64(out, net.parameters()[i]);
  if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

ValueNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw CheckpointError("checkpoint: bad magic in " + path);
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));

  NetArchitecture arch;
  arch.inputs = static_cast<int>(r.u32());
  const std::uint32_t layers = r.u32();
  if (layers > 64) throw CheckpointError("checkpoint: corrupt layer count");
  arch.hidden.clear();
  for (std::uint32_t i = 0; i < layers; ++i) arch.hidden.push_back(static_cast<int>(r.u32()));
  arch.activation = static_cast<Activation>(r.u32());
  const double scale = r.f64();

  std::vector<double> norm(r.u32());
  if (norm.size() > 1024) throw CheckpointError("checkpoint: corrupt normalization block");
  for (auto& c : norm) c = r.f64();

  ValueNet net;
  try {
    net = ValueNet(arch, scale);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  const std::uint64_t count = r.u64();
  if (count != static_cast<std::uint64_t>(net.parameter_count()))
    throw CheckpointError("checkpoint: parameter count does not match the architecture");
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i) net.parameters()[i] = r.f64();
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint: trailing bytes");
  net.set_normalization(std::move(norm));
  return net;
}

ValueNet load_checkpoint(const std::string& path, const NetArchitecture& expected) {
  ValueNet net = load_checkpoint(path);
  if (!(net.architecture() == expected)) throw CheckpointError("checkpoint: architecture mismatch in " + path);
  return net;
}

}  // namespace agvpick
