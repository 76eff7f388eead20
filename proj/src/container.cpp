/*
 * Copyright 2026 The oosd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oosd/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "oosd/error.hpp"

namespace oosd {
namespace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes little-endian");

constexpr char kMagic[8] = {'O', 'O', 'S', 'D', 'M', 'D', 'L', '\0'};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u8(std::uint8_t v) { pod(v); }
  void u32(std::uint32_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  template <typename Derived>
  void array(const Eigen::DenseBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    // Row-major element order regardless of storage.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) pod<Scalar>(m(r, c));
    }
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t u8() { return pod<std::uint8_t>(); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  bool flag() {
    const std::uint8_t v = u8();
    if (v > 1) fail("bad boolean");
    return v == 1;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  template <typename MatrixType>
  MatrixType array(Eigen::Index rows, Eigen::Index cols) {
    using Scalar = typename MatrixType::Scalar;
    need(static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * sizeof(Scalar));
    MatrixType m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = pod<Scalar>();
    }
    return m;
  }
  std::size_t position() const { return pos_; }
  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::MalformedFile, "model container: " + what);
  }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) fail("truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_scorer(Writer& w, const OosScorerConfig& c) {
  w.f64(c.blend_weight);
  w.f64(c.oos_penalty);
  w.u8(c.renormalize);
  w.u8(static_cast<std::uint8_t>(c.mode));
  w.u32(static_cast<std::uint32_t>(c.num_lists));
  w.u32(static_cast<std::uint32_t>(c.num_probes));
  w.u64(c.seed);
}

OosScorerConfig read_scorer(Reader& r) {
  OosScorerConfig c;
  c.blend_weight = r.f64();
  c.oos_penalty = r.f64();
  c.renormalize = r.flag();
  const std::uint8_t mode = r.u8();
  if (mode > 1) Reader::fail("bad search mode");
  c.mode = static_cast<SearchMode>(mode);
  c.num_lists = static_cast<int>(r.u32());
  c.num_probes = static_cast<int>(r.u32());
  c.seed = r.u64();
  return c;
}

void write_model(Writer& w, const std::optional<IntentModel>& m) {
  w.u8(m.has_value());
  if (!m) return;
  w.u8(static_cast<std::uint8_t>(m->kind()));
  w.u64(m->labels().size());
  for (const auto& l : m->labels()) w.str(l);
  w.u64(static_cast<std::uint64_t>(m->dim()));
  w.array(m->weights());
  w.array(m->bias());
}

std::optional<IntentModel> read_model(Reader& r) {
  if (!r.flag()) return std::nullopt;
  const std::uint8_t kind = r.u8();
  if (kind > 2) Reader::fail("bad model kind");
  const std::uint64_t k = r.u64();
  std::vector<std::string> labels;
  for (std::uint64_t i = 0; i < k; ++i) labels.push_back(r.str());
  const auto d = static_cast<Eigen::Index>(r.u64());
  auto weights = r.array<Eigen::MatrixXf>(static_cast<Eigen::Index>(k), d);
  auto bias = r.array<Eigen::VectorXf>(static_cast<Eigen::Index>(k), 1);
  return IntentModel(static_cast<ModelKind>(kind), std::move(labels), std::move(weights), std::move(bias));
}

void write_featurizer(Writer& w, const Featurizer& f) {
  if (const auto* tfidf = dynamic_cast<const HashedTfidf*>(&f)) {
    const TfidfConfig& c = tfidf->config();
    w.u8(0);
    w.u32(c.buckets);
    w.u32(c.embedding_dim);
    w.u32(c.projection_nnz);
    w.u32(static_cast<std::uint32_t>(c.word_ngram_min));
    w.u32(static_cast<std::uint32_t>(c.word_ngram_max));
    w.u32(static_cast<std::uint32_t>(c.char_ngram_min));
    w.u32(static_cast<std::uint32_t>(c.char_ngram_max));
    w.u64(c.hash_seed);
    w.u64(tfidf->num_documents());
    w.array(tfidf->idf());
  } else if (const auto* store = dynamic_cast<const PrecomputedEmbeddingStore*>(&f)) {
    w.u8(1);
    w.u64(static_cast<std::uint64_t>(store->dim()));
    w.u64(store->size());
    for (const auto& [text, vec] : store->rows()) {
      w.str(text);
      w.array(vec);
    }
  } else {
    throw Error(ErrorCode::ConfigError, "featurizer type cannot be serialized");
  }
}

std::shared_ptr<const Featurizer> read_featurizer(Reader& r) {
  const std::uint8_t kind = r.u8();
  if (kind == 0) {
    TfidfConfig c;
    c.buckets = r.u32();
    c.embedding_dim = r.u32();
    c.projection_nnz = r.u32();
    c.word_ngram_min = static_cast<int>(r.u32());
    c.word_ngram_max = static_cast<int>(r.u32());
    c.char_ngram_min = static_cast<int>(r.u32());
    c.char_ngram_max = static_cast<int>(r.u32());
    c.hash_seed = r.u64();
    const std::uint64_t docs = r.u64();
    try {
      validate(c);
    } catch (const Error& e) {
      Reader::fail(e.what());
    }
    auto idf = r.array<Eigen::VectorXf>(static_cast<Eigen::Index>(c.buckets), 1);
    return std::make_shared<HashedTfidf>(HashedTfidf::from_parts(c, std::move(idf), docs));
  }
  if (kind == 1) {
    const auto d = static_cast<Eigen::Index>(r.u64());
    const std::uint64_t n = r.u64();
    std::vector<std::pair<std::string, Embedding>> rows;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string text = r.str();
      rows.emplace_back(std::move(text), r.array<Embedding>(d, 1));
    }
    return std::make_shared<PrecomputedEmbeddingStore>(PrecomputedEmbeddingStore::from_rows(std::move(rows)));
  }
  Reader::fail("bad featurizer kind");
}

}  // namespace

std::string config_digest(std::string_view config_json) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(config_json)));
  return buf;
}

std::string serialize_detector(const OosDetector& detector, const Provenance& provenance) {
  const OosDetector::Parts& p = detector.parts();
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.u32(kContainerVersion);
  w.pod<std::int64_t>(provenance.build_timestamp);
  w.str(provenance.config_json);
  w.str(provenance.config_digest);

  w.u8(static_cast<std::uint8_t>(p.formulation));
  w.u8(static_cast<std::uint8_t>(p.oos_method));
  write_scorer(w, p.scorer);
  w.f64(p.combiner.steepness);
  w.f64(p.combiner.threshold);
  w.u8(p.combiner.clamp_factor);
  w.f64(p.gate_threshold);
  w.str(p.lexicon.empty() ? std::string() : lexicon_to_json(p.lexicon));
  write_featurizer(w, *p.featurizer);
  write_model(w, p.intent_model);
  write_model(w, p.gate);

  w.u8(p.index.has_value());
  if (p.index) {
    const NeighborIndex& idx = *p.index;
    write_scorer(w, idx.config());
    w.u64(static_cast<std::uint64_t>(idx.size()));
    w.u64(static_cast<std::uint64_t>(idx.dim()));
    w.array(idx.entries());
    for (Source s : idx.sources()) w.u8(static_cast<std::uint8_t>(s));
    for (std::int32_t id : idx.intent_ids()) w.pod(id);
    w.u64(idx.intent_names().size());
    for (const auto& name : idx.intent_names()) w.str(name);
  }
  w.u8(p.pca.has_value());
  if (p.pca) {
    w.u64(static_cast<std::uint64_t>(p.pca->num_components()));
    w.u64(static_cast<std::uint64_t>(p.pca->dim()));
    w.array(p.pca->mean());
    w.array(p.pca->components());
  }

  std::string& bytes = w.bytes();
  const std::uint64_t checksum =
      fnv1a(std::string_view(bytes).substr(kTimestampOffset + 8),
            fnv1a(std::string_view(bytes).substr(0, kTimestampOffset)));
  w.u64(checksum);
  return std::move(bytes);
}

LoadedDetector deserialize_detector(std::string_view bytes) {
  if (bytes.size() < kTimestampOffset + 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Reader::fail("not an oosd model (bad magic)");
  }
  Reader r(bytes);
  r.u64();  // magic
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) {
    throw Error(ErrorCode::VersionMismatch, "container version " + std::to_string(version) +
                                                " is not supported (this build reads version " +
                                                std::to_string(kContainerVersion) + ")");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  const std::uint64_t checksum =
      fnv1a(body.substr(kTimestampOffset + 8), fnv1a(body.substr(0, kTimestampOffset)));
  if (checksum != stored) Reader::fail("checksum mismatch");

  Provenance prov;
  prov.build_timestamp = r.pod<std::int64_t>();
  prov.config_json = r.str();
  prov.config_digest = r.str();

  OosDetector::Parts p;
  const std::uint8_t formulation = r.u8();
  const std::uint8_t method = r.u8();
  if (formulation > 3 || method > 1) Reader::fail("bad formulation or OOS method");
  p.formulation = static_cast<Formulation>(formulation);
  p.oos_method = static_cast<OosMethod>(method);
  p.scorer = read_scorer(r);
  p.combiner.steepness = r.f64();
  p.combiner.threshold = r.f64();
  p.combiner.clamp_factor = r.flag();
  p.gate_threshold = r.f64();
  if (std::string lexicon = r.str(); !lexicon.empty()) p.lexicon = parse_lexicon(lexicon);
  p.featurizer = read_featurizer(r);
  p.intent_model = read_model(r);
  p.gate = read_model(r);

  if (r.flag()) {
    OosScorerConfig config = read_scorer(r);
    const auto n = static_cast<Eigen::Index>(r.u64());
    const auto d = static_cast<Eigen::Index>(r.u64());
    auto entries = r.array<EmbeddingMatrix>(n, d);
    std::vector<Source> sources(static_cast<std::size_t>(n));
    for (auto& s : sources) {
      const std::uint8_t v = r.u8();
      if (v > 1) Reader::fail("bad entry source");
      s = static_cast<Source>(v);
    }
    std::vector<std::int32_t> ids(static_cast<std::size_t>(n));
    for (auto& id : ids) id = r.pod<std::int32_t>();
    std::vector<std::string> names(r.u64());
    for (auto& name : names) name = r.str();
    p.index = NeighborIndex::from_parts(config, std::move(entries), std::move(sources), std::move(ids),
                                        std::move(names));
  }
  if (r.flag()) {
    const auto k = static_cast<Eigen::Index>(r.u64());
    const auto d = static_cast<Eigen::Index>(r.u64());
    auto mean = r.array<Eigen::VectorXd>(d, 1);
    auto components = r.array<Eigen::MatrixXd>(k, d);
    p.pca = PcaReconstructor<double>(std::move(mean), std::move(components));
  }
  if (r.position() != body.size()) Reader::fail("trailing bytes");
  return {OosDetector(std::move(p)), std::move(prov)};
}

void save_detector(const std::filesystem::path& path, const OosDetector& detector,
                   const Provenance& provenance) {
  const std::string bytes = serialize_detector(detector, provenance);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

LoadedDetector load_detector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize_detector(buffer.str());
}

}  // namespace oosd
