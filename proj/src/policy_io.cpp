/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cstring>
#include <string>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "cacp/policy.hpp"
#include "json.hpp"

namespace cacp {

namespace {

using json = nlohmann::json;
constexpr char kMagic[8] = {'C', 'A', 'C', 'P', 'P', 'O', 'L', '\0'};
constexpr int kVersion = 1;

void AppendNet(std::string& out, const Mlp<float>& net) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    // Row-major [fan_out, fan_in] on disk.
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = net.weights[l];
    io::AppendFloatsLE(out, std::span<const float>(w.data(), static_cast<std::size_t>(w.size())));
    io::AppendFloatsLE(out, std::span<const float>(net.biases[l].data(),
                                                   static_cast<std::size_t>(net.biases[l].size())));
  }
}

Mlp<float> ReadNet(const std::vector<int>& sizes, std::string_view bytes, std::size_t& offset) {
  Mlp<float> net = Mlp<float>::Zeros(sizes);
  std::vector<float> buf;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    if (!io::DecodeFloatsLE(bytes, offset, static_cast<std::size_t>(w.size()), buf)) {
      throw Error(ErrorCode::kCorruptPolicy, "truncated parameter block");
    }
    offset += buf.size() * 4;
    w = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        buf.data(), w.rows(), w.cols());
    auto& b = net.biases[l];
    if (!io::DecodeFloatsLE(bytes, offset, static_cast<std::size_t>(b.size()), buf)) {
      throw Error(ErrorCode::kCorruptPolicy, "truncated parameter block");
    }
    offset += buf.size() * 4;
    b = Eigen::Map<const Eigen::VectorXf>(buf.data(), b.size());
  }
  return net;
}

}  // namespace

void SavePolicy(const PolicyParams& theta, const std::filesystem::path& path) {
  std::string payload;
  AppendNet(payload, theta.actor);
  AppendNet(payload, theta.critic);
  AppendNet(payload, theta.target_actor);
  AppendNet(payload, theta.target_critic);

  const json header = {{"format", "cacp-policy"},
                       {"version", kVersion},
                       {"alpha_max", theta.alpha_max},
                       {"sigma", theta.sigma},
                       {"seed", theta.seed},
                       {"actor_sizes", theta.actor.sizes()},
                       {"critic_sizes", theta.critic.sizes()},
                       {"nets", {"actor", "critic", "target_actor", "target_critic"}},
                       {"float_count", payload.size() / 4}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  out += text;
  out += payload;
  io::WriteFile(path, out);
}

PolicyParams LoadPolicy(const std::filesystem::path& path) {
  const std::string bytes = io::ReadFile(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": bad magic");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8 + static_cast<std::size_t>(i)])) << (8 * i);
  }
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": truncated header");
  }
  PolicyParams theta;
  std::vector<int> actor_sizes, critic_sizes;
  std::size_t float_count = 0;
  try {
    const json header = json::parse(bytes.substr(12, len));
    if (header.at("format") != "cacp-policy" || header.at("version") != kVersion) {
      throw Error(ErrorCode::kCorruptPolicy, path.string() + ": unsupported format");
    }
    theta.alpha_max = header.at("alpha_max").get<double>();
    theta.sigma = header.at("sigma").get<double>();
    theta.seed = header.at("seed").get<std::uint64_t>();
    actor_sizes = header.at("actor_sizes").get<std::vector<int>>();
    critic_sizes = header.at("critic_sizes").get<std::vector<int>>();
    float_count = header.at("float_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": " + e.what());
  }
  if (actor_sizes.size() < 2 || actor_sizes.front() != kStateDim || actor_sizes.back() != 1 ||
      critic_sizes.size() < 2 || critic_sizes.front() != kStateDim + 1 || critic_sizes.back() != 1) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": unexpected network sizes");
  }
  for (int s : actor_sizes) {
    if (s <= 0 || s > 1 << 16) throw Error(ErrorCode::kCorruptPolicy, "bad layer size");
  }
  for (int s : critic_sizes) {
    if (s <= 0 || s > 1 << 16) throw Error(ErrorCode::kCorruptPolicy, "bad layer size");
  }
  const std::size_t payload = bytes.size() - 12 - len;
  const std::size_t expected =
      2 * (Mlp<float>::Zeros(actor_sizes).num_params() + Mlp<float>::Zeros(critic_sizes).num_params());
  if (float_count != expected || payload != expected * 4) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": expected " +
                                               std::to_string(expected) + " parameters, found " +
                                               std::to_string(payload / 4));
  }
  const std::string_view body(bytes);
  std::size_t offset = 12 + len;
  theta.actor = ReadNet(actor_sizes, body, offset);
  theta.critic = ReadNet(critic_sizes, body, offset);
  theta.target_actor = ReadNet(actor_sizes, body, offset);
  theta.target_critic = ReadNet(critic_sizes, body, offset);
  theta.actor_opt = Adam<float>::For(theta.actor);
  theta.critic_opt = Adam<float>::For(theta.critic);
  if (!theta.AllFinite() || !(theta.alpha_max > 0.0 && theta.alpha_max <= 1.0)) {
    throw Error(ErrorCode::kCorruptPolicy, path.string() + ": non-finite or out-of-range values");
  }
  return theta;
}

}  // namespace cacp
