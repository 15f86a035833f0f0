/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "classifier/classifier.hpp"
#include "common/error.hpp"
#include "common/hashing.hpp"

// Model container, all integers little-endian:
//   8 bytes  magic "CLEMODEL"
//   u32      format version
//   u32      reserved (0)
//   u64      header length, then a UTF-8 JSON header
//            {config, training_log, state}
//   u64      parameter count, then that many IEEE-754 float32 values
//   u64      FNV-1a checksum of every preceding byte

namespace cle::classifier {
namespace {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

constexpr char kMagic[8] = {'C', 'L', 'E', 'M', 'O', 'D', 'E', 'L'};

template <typename U>
void put(std::string& out, U value) {
  char buf[sizeof(U)];
  std::memcpy(buf, &value, sizeof(U));
  out.append(buf, sizeof(U));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename U>
  U get() {
    U value;
    std::memcpy(&value, take(sizeof(U)).data(), sizeof(U));
    return value;
  }
  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) fail(ErrorCode::kFormat, "corrupt model file");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_classifier(const PatchClassifier& classifier, const std::filesystem::path& path) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : classifier.training_log()) {
    log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
  }
  const nlohmann::json header = {
      {"config", classifier.config()}, {"training_log", log}, {"state", classifier.state()}};
  const std::string text = header.dump();
  const auto params = classifier.parameters();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, text.size());
  out += text;
  put<std::uint64_t>(out, params.size());
  out.append(reinterpret_cast<const char*>(params.data()), params.size() * sizeof(float));
  put<std::uint64_t>(out, Fnv1a().update(out).digest());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot write model '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::kIo, "cannot write model '" + path.string() + "'");
}

std::unique_ptr<PatchClassifier> load_classifier(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open model '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string data = ss.str();

  Reader r(data);
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::kFormat, "corrupt model file: bad magic in '" + path.string() + "'");
  }
  r.take(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kFormat, "unsupported model format version " + std::to_string(version) + " (expected " +
                                 std::to_string(kModelFormatVersion) + ")");
  }
  r.get<std::uint32_t>();
  const auto header_len = r.get<std::uint64_t>();
  const auto header_text = r.take(header_len);
  const auto n_params = r.get<std::uint64_t>();
  if (n_params > data.size() / sizeof(float)) fail(ErrorCode::kFormat, "corrupt model file");
  const auto raw = r.take(n_params * sizeof(float));
  const std::size_t body_len = r.pos();
  const auto checksum = r.get<std::uint64_t>();
  if (r.pos() != data.size() || Fnv1a().update(std::string_view(data).substr(0, body_len)).digest() != checksum) {
    fail(ErrorCode::kFormat, "corrupt model file");
  }

  std::vector<float> params(n_params);
  std::memcpy(params.data(), raw.data(), raw.size());
  try {
    const auto header = nlohmann::json::parse(header_text);
    TrainingLog log;
    for (const auto& e : header.at("training_log")) {
      log.push_back({e.at("epoch").get<int>(), e.at("loss").get<double>(), e.at("accuracy").get<double>()});
    }
    return restore(header.at("config").get<ClassifierConfig>(), header.at("state"), std::move(params),
                   std::move(log));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("corrupt model file: ") + e.what());
  }
}

}  // namespace cle::classifier
