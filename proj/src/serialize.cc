/* Copyright 2026 The snmt Authors.
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

#include "snmt/serialize.h"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "snmt/textproc.h"

SNMT_NAMESPACE_BEGIN

const char* model_file_error_name(ModelFileError code) {
  switch (code) {
    case ModelFileError::kIo: return "io error";
    case ModelFileError::kBadMagic: return "bad magic";
    case ModelFileError::kUnsupportedVersion: return "unsupported version";
    case ModelFileError::kTruncated: return "truncated file";
    case ModelFileError::kCorrupt: return "corrupt file";
  }
  return "unknown";
}

namespace {

constexpr char kMagic[4] = {'S', 'N', 'M', 'T'};
constexpr std::uint8_t kKeepBits = 0;
constexpr std::uint8_t kFrozenRowBits = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n)
      throw ModelFormatError(ModelFileError::kTruncated, "needed " + std::to_string(n) + " bytes at offset " +
                                                             std::to_string(pos_));
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() {
    auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)])) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const std::uint32_t n = u32();
    return std::string(bytes(n));
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size())
      throw ModelFormatError(ModelFileError::kCorrupt, "bad integer list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

int parse_int(const std::string& s) {
  auto v = parse_ints(s);
  if (v.size() != 1) throw ModelFormatError(ModelFileError::kCorrupt, "bad integer '" + s + "'");
  return v[0];
}

void put_bits(Writer& w, const std::vector<std::uint8_t>& bits) {
  w.u32(static_cast<std::uint32_t>(bits.size()));
  std::vector<std::uint8_t> packed((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.bytes(packed.data(), packed.size());
}

std::vector<std::uint8_t> get_bits(Reader& r) {
  const std::uint32_t n = r.u32();
  auto packed = r.bytes((static_cast<std::size_t>(n) + 7) / 8);
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (static_cast<std::uint8_t>(packed[i / 8]) >> (i % 8)) & 1u;
  return bits;
}

}  // namespace

std::string format_model_config(const ModelConfig& c) {
  char dropout[64];
  std::snprintf(dropout, sizeof dropout, "%.17g", c.dropout);
  std::string s;
  s += "layers=" + std::to_string(c.layers) + "\n";
  s += "rnn_size=" + std::to_string(c.rnn_size) + "\n";
  s += "embed_size=" + std::to_string(c.embed_size) + "\n";
  s += std::string("bidirectional=") + (c.bidirectional ? "1" : "0") + "\n";
  s += std::string("dropout=") + dropout + "\n";
  s += "source_features=" + join_ints(c.source_features) + "\n";
  s += "target_features=" + join_ints(c.target_features) + "\n";
  s += "max_source_length=" + std::to_string(c.max_source_length) + "\n";
  return s;
}

std::string serialize_model(const NmtModel& model) {
  std::string meta = format_model_config(model.config());
  meta += "source_vocab=" + join(model.source_vocab().file_tokens()) + "\n";
  meta += "target_vocab=" + join(model.target_vocab().file_tokens()) + "\n";
  std::vector<std::string> frozen;
  bool masks = false;
  for (const Parameter& p : model.params()) {
    if (p.frozen) frozen.push_back(p.name);
    masks = masks || p.is_pruned() || p.has_frozen_rows();
  }
  meta += "frozen=" + join(frozen, ",") + "\n";
  meta += std::string("masks=") + (masks ? "1" : "0") + "\n";

  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kModelFormatVersion);
  w.str(meta);
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (const Parameter& p : model.params()) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (int d : p.value.dims()) w.u32(static_cast<std::uint32_t>(d));
    for (Real v : p.value.values()) w.f32(static_cast<float>(v));
  }
  std::uint32_t blocks = 0;
  for (const Parameter& p : model.params()) blocks += (p.is_pruned() ? 1u : 0u) + (p.has_frozen_rows() ? 1u : 0u);
  w.u32(blocks);
  for (const Parameter& p : model.params()) {
    if (p.is_pruned()) {
      w.str(p.name);
      w.u8(kKeepBits);
      put_bits(w, p.keep);
    }
    if (p.has_frozen_rows()) {
      w.str(p.name);
      w.u8(kFrozenRowBits);
      put_bits(w, p.frozen_rows);
    }
  }
  return w.take();
}

NmtModel deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.remaining() < 4 && std::memcmp(bytes.data(), kMagic, r.remaining()) == 0)
    throw ModelFormatError(ModelFileError::kTruncated, "file ends inside the header");
  if (r.remaining() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ModelFormatError(ModelFileError::kBadMagic, "not a model file");
  r.bytes(4);
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw ModelFormatError(ModelFileError::kUnsupportedVersion, "version " + std::to_string(version));

  std::map<std::string, std::string> meta;
  {
    std::stringstream ss(r.str());
    std::string line;
    while (std::getline(ss, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ModelFormatError(ModelFileError::kCorrupt, "metadata line '" + line + "'");
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw ModelFormatError(ModelFileError::kCorrupt, "missing metadata '" + key + "'");
    return it->second;
  };
  ModelConfig c;
  c.layers = parse_int(field("layers"));
  c.rnn_size = parse_int(field("rnn_size"));
  c.embed_size = parse_int(field("embed_size"));
  c.bidirectional = field("bidirectional") == "1";
  c.dropout = std::strtod(field("dropout").c_str(), nullptr);
  c.source_features = parse_ints(field("source_features"));
  c.target_features = parse_ints(field("target_features"));
  c.max_source_length = parse_int(field("max_source_length"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(ModelFileError::kCorrupt, e.what());
  }
  NmtModel model(c, Vocab::from_tokens(split_whitespace(field("source_vocab"))),
                 Vocab::from_tokens(split_whitespace(field("target_vocab"))));

  const std::uint32_t count = r.u32();
  if (count != model.params().size())
    throw ModelFormatError(ModelFileError::kCorrupt, "expected " + std::to_string(model.params().size()) +
                                                         " tensors, found " + std::to_string(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.str();
    Parameter* p = model.params().find(name);
    if (p == nullptr) throw ModelFormatError(ModelFileError::kCorrupt, "unknown tensor '" + name + "'");
    const std::uint32_t rank = r.u32();
    std::vector<int> dims;
    for (std::uint32_t d = 0; d < rank; ++d) dims.push_back(static_cast<int>(r.u32()));
    if (dims != p->value.dims())
      throw ModelFormatError(ModelFileError::kCorrupt, "tensor '" + name + "' has shape mismatch");
    r.need(p->value.size() * 4);
    for (Real& v : p->value.values()) v = static_cast<Real>(r.f32());
  }
  const std::uint32_t blocks = r.u32();
  for (std::uint32_t i = 0; i < blocks; ++i) {
    const std::string name = r.str();
    Parameter* p = model.params().find(name);
    if (p == nullptr) throw ModelFormatError(ModelFileError::kCorrupt, "unknown bitset '" + name + "'");
    const std::uint8_t kind = r.u8();
    std::vector<std::uint8_t> bits = get_bits(r);
    if (kind == kKeepBits && bits.size() == p->value.size()) p->keep = std::move(bits);
    else if (kind == kFrozenRowBits && static_cast<int>(bits.size()) == p->value.rows()) p->frozen_rows = std::move(bits);
    else throw ModelFormatError(ModelFileError::kCorrupt, "bad bitset for '" + name + "'");
  }
  if (!r.done()) throw ModelFormatError(ModelFileError::kCorrupt, "trailing bytes");
  std::stringstream frozen(field("frozen"));
  std::string name;
  while (std::getline(frozen, name, ',')) {
    if (name.empty()) continue;
    Parameter* p = model.params().find(name);
    if (p == nullptr) throw ModelFormatError(ModelFileError::kCorrupt, "unknown frozen tensor '" + name + "'");
    p->frozen = true;
  }
  return model;
}

void save_model(const NmtModel& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError(ModelFileError::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelFormatError(ModelFileError::kIo, "write failed: " + path);
}

NmtModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError(ModelFileError::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

SNMT_NAMESPACE_END
