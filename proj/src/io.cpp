// Copyright 2026 The bohmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bohm/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "bohm/error.hpp"

namespace bohm {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error(ErrorCode::kInvalidArgument, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

Histogram make_histogram(std::span<const double> values, double lower, double upper,
                         std::size_t bins) {
  if (bins == 0 || !(upper > lower)) {
    throw Error(ErrorCode::kInvalidArgument, "histogram needs bins >= 1 and upper > lower");
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (upper - lower) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lower + static_cast<double>(i) * width;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!(v >= lower && v < upper)) continue;
    auto i = static_cast<std::size_t>((v - lower) / width);
    if (i >= bins) i = bins - 1;
    ++h.counts[i];
  }
  return h;
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories, std::size_t limit) {
  std::string out = "member,t";
  const std::size_t d = trajectories.empty() ? 0 : trajectories.front().dims;
  for (std::size_t a = 0; a < d; ++a) out += ",x" + std::to_string(a + 1);
  out += '\n';
  const std::size_t n = std::min(limit, trajectories.size());
  for (std::size_t m = 0; m < n; ++m) {
    const Trajectory& tr = trajectories[m];
    for (std::size_t i = 0; i < tr.sample_count(); ++i) {
      out += std::to_string(m);
      out += ',';
      out += format_double(tr.times[i]);
      for (double x : tr.sample(i)) {
        out += ',';
        out += format_double(x);
      }
      out += '\n';
    }
  }
  return out;
}

std::string histogram_csv(const Histogram& h,
                          const std::vector<std::pair<std::string, std::vector<std::size_t>>>& extra) {
  std::string out = "lower,upper,count";
  for (const auto& [name, col] : extra) out += "," + name;
  const bool with_prediction = !h.predicted.empty();
  if (with_prediction) out += ",predicted";
  out += '\n';
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_double(h.edges[i]) + ',' + format_double(h.edges[i + 1]) + ',' +
           std::to_string(h.counts[i]);
    for (const auto& [name, col] : extra) out += ',' + std::to_string(col.at(i));
    if (with_prediction) out += ',' + format_double(h.predicted[i]);
    out += '\n';
  }
  return out;
}

}  // namespace bohm
