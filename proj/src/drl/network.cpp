#include "apm/drl/network.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace apm::drl {

namespace {

constexpr int kActorOutputs = 2;
constexpr int kCriticOutputs = 1;

Eigen::Index mlp_size(int in, int hidden, int out) {
  return static_cast<Eigen::Index>(hidden) * in + hidden + static_cast<Eigen::Index>(hidden) * hidden + hidden +
         static_cast<Eigen::Index>(out) * hidden + out;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

PolicyNetwork::PolicyNetwork(int inputs, int hidden, Vector input_scale)
    : inputs_(inputs), hidden_(hidden), input_scale_(std::move(input_scale)) {
  if (inputs <= 0 || hidden <= 0) throw std::invalid_argument("network dimensions must be positive");
  if (input_scale_.size() != inputs) throw std::invalid_argument("input scale size must match inputs");
  params_ = Vector::Zero(mlp_size(inputs, hidden, kActorOutputs) + mlp_size(inputs, hidden, kCriticOutputs));
}

PolicyNetwork::Layout PolicyNetwork::layout(Eigen::Index base, int outputs) const {
  Layout l{};
  l.w1 = base;
  l.b1 = l.w1 + static_cast<Eigen::Index>(hidden_) * inputs_;
  l.w2 = l.b1 + hidden_;
  l.b2 = l.w2 + static_cast<Eigen::Index>(hidden_) * hidden_;
  l.w3 = l.b2 + hidden_;
  l.b3 = l.w3 + static_cast<Eigen::Index>(outputs) * hidden_;
  return l;
}

Eigen::Index PolicyNetwork::critic_base() const { return mlp_size(inputs_, hidden_, kActorOutputs); }

void PolicyNetwork::initialize(std::mt19937_64& rng) {
  params_.setZero();
  auto fill = [&](Eigen::Index at, int rows, int cols, double gain) {
    const double bound = gain * std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rows) * cols; ++i) params_[at + i] = u(rng);
  };
  for (auto [base, outputs] : {std::pair{actor_base(), kActorOutputs}, std::pair{critic_base(), kCriticOutputs}}) {
    const Layout l = layout(base, outputs);
    fill(l.w1, hidden_, inputs_, 1.0);
    fill(l.w2, hidden_, hidden_, 1.0);
    fill(l.w3, outputs, hidden_, 0.01);
  }
  // softplus(-0.4328) ~= 0.5
  params_[layout(actor_base(), kActorOutputs).b3 + 1] = -0.4328;
}

PolicyNetwork::Output PolicyNetwork::forward(const Vector& observation, Trace* trace) const {
  if (observation.size() != inputs_) {
    throw std::invalid_argument(fmt::format("observation has {} entries, network expects {}", observation.size(), inputs_));
  }
  const Vector x = observation.cwiseQuotient(input_scale_);

  auto run = [&](const Layout& l, int outputs, Vector& h1, Vector& h2) {
    using Mat = Eigen::Map<const Eigen::MatrixXd>;
    using Vec = Eigen::Map<const Vector>;
    h1 = (Mat(params_.data() + l.w1, hidden_, inputs_) * x + Vec(params_.data() + l.b1, hidden_)).array().tanh();
    h2 = (Mat(params_.data() + l.w2, hidden_, hidden_) * h1 + Vec(params_.data() + l.b2, hidden_)).array().tanh();
    return Vector(Mat(params_.data() + l.w3, outputs, hidden_) * h2 + Vec(params_.data() + l.b3, outputs));
  };

  Trace local;
  Trace& t = trace ? *trace : local;
  t.input = x;
  const Vector actor = run(layout(actor_base(), kActorOutputs), kActorOutputs, t.actor_h1, t.actor_h2);
  const Vector critic = run(layout(critic_base(), kCriticOutputs), kCriticOutputs, t.critic_h1, t.critic_h2);
  t.raw_scale = actor[1];
  return {actor[0], softplus(actor[1]) + kMinScale, critic[0]};
}

void PolicyNetwork::backward(const Trace& t, double d_loc, double d_scale, double d_value, Vector& grad) const {
  if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());

  auto back = [&](const Layout& l, int outputs, const Vector& h1, const Vector& h2, const Vector& g_out) {
    using Mat = Eigen::Map<const Eigen::MatrixXd>;
    using MutMat = Eigen::Map<Eigen::MatrixXd>;
    using MutVec = Eigen::Map<Vector>;
    MutMat(grad.data() + l.w3, outputs, hidden_).noalias() += g_out * h2.transpose();
    MutVec(grad.data() + l.b3, outputs) += g_out;
    const Vector dz2 =
        (Mat(params_.data() + l.w3, outputs, hidden_).transpose() * g_out).cwiseProduct((1.0 - h2.array().square()).matrix());
    MutMat(grad.data() + l.w2, hidden_, hidden_).noalias() += dz2 * h1.transpose();
    MutVec(grad.data() + l.b2, hidden_) += dz2;
    const Vector dz1 =
        (Mat(params_.data() + l.w2, hidden_, hidden_).transpose() * dz2).cwiseProduct((1.0 - h1.array().square()).matrix());
    MutMat(grad.data() + l.w1, hidden_, inputs_).noalias() += dz1 * t.input.transpose();
    MutVec(grad.data() + l.b1, hidden_) += dz1;
  };

  if (d_loc != 0.0 || d_scale != 0.0) {
    Vector g(2);
    g << d_loc, d_scale * sigmoid(t.raw_scale);
    back(layout(actor_base(), kActorOutputs), kActorOutputs, t.actor_h1, t.actor_h2, g);
  }
  if (d_value != 0.0) {
    Vector g(1);
    g << d_value;
    back(layout(critic_base(), kCriticOutputs), kCriticOutputs, t.critic_h1, t.critic_h2, g);
  }
}

namespace {

constexpr std::array<char, 8> kCheckpointMagic{'A', 'P', 'M', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw std::runtime_error("checkpoint truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
  return value;
}

}  // namespace

void save_checkpoint(const PolicyNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.inputs()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.hidden()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(net.parameter_count()));
  for (double v : net.input_scale()) write_le(out, std::bit_cast<std::uint64_t>(v));
  for (double v : net.parameters()) write_le(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

PolicyNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw std::runtime_error(fmt::format("{} is not a policy checkpoint", path.string()));
  }
  const auto inputs = read_le<std::uint32_t>(in);
  const auto hidden = read_le<std::uint32_t>(in);
  const auto count = read_le<std::uint64_t>(in);
  Vector scale(inputs);
  for (auto& v : scale) v = std::bit_cast<double>(read_le<std::uint64_t>(in));
  PolicyNetwork net(static_cast<int>(inputs), static_cast<int>(hidden), scale);
  if (static_cast<std::uint64_t>(net.parameter_count()) != count) {
    throw std::runtime_error("checkpoint parameter count does not match its dimensions");
  }
  for (auto& v : net.parameters()) v = std::bit_cast<double>(read_le<std::uint64_t>(in));
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("checkpoint has trailing bytes");
  return net;
}

}  // namespace apm::drl
