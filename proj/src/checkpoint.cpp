#include "geome/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "geome/error.hpp"

namespace geome {
namespace {

constexpr char kMagic[4] = {'G', 'E', 'O', 'M'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw TruncatedCheckpoint();
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return bytes(uint<std::uint32_t>()); }
  bool done() const { return pos_ == buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

void write_names(Writer& w, const Dictionary& d) {
  w.uint(static_cast<std::uint64_t>(d.size()));
  for (const auto& n : d.names()) w.str(n);
}

std::vector<std::string> read_names(Reader& r) {
  const auto n = r.uint<std::uint64_t>();
  // each name costs at least its 4-byte length prefix
  if (n > r.remaining() / 4) throw TruncatedCheckpoint();
  std::vector<std::string> names;
  names.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) names.push_back(r.str());
  return names;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const EmbeddingTable& t = ckpt.table;
  const ModelConfig& c = t.config();
  if (!ckpt.entities || !ckpt.relations) throw std::invalid_argument("checkpoint without dictionaries");
  const std::size_t rel_expected = ckpt.relations->size() * (ckpt.reciprocal ? 2 : 1);
  if (ckpt.entities->size() != c.num_entities || rel_expected != c.num_relations) {
    throw std::invalid_argument("checkpoint dictionaries do not match the table shape");
  }

  Writer w;
  w.bytes(kMagic, 4);
  w.uint(kCheckpointVersion);
  w.uint(static_cast<std::uint8_t>(static_cast<int>(c.grade)));
  w.uint(static_cast<std::uint8_t>(c.precision == Precision::f32 ? 1 : 0));
  w.uint(static_cast<std::uint8_t>(ckpt.reciprocal ? 1 : 0));
  w.uint(std::uint8_t{0});
  w.uint(static_cast<std::uint64_t>(c.dim_k));
  w.uint(static_cast<std::uint64_t>(c.num_entities));
  w.uint(static_cast<std::uint64_t>(c.num_relations));
  w.uint(static_cast<std::uint64_t>(ckpt.config_json.size()));
  w.bytes(ckpt.config_json.data(), ckpt.config_json.size());
  for (const auto block : {t.entity_data(), t.relation_data()}) {
    for (const double v : block) {
      if (c.precision == Precision::f32) {
        w.f32(static_cast<float>(v));
      } else {
        w.f64(v);
      }
    }
  }
  write_names(w, *ckpt.entities);
  write_names(w, *ckpt.relations);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  if (r.bytes(4) != std::string(kMagic, 4)) throw BadMagic();
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) throw UnsupportedVersion(version);
  const int grade = r.uint<std::uint8_t>();
  const int prec = r.uint<std::uint8_t>();
  const int recip = r.uint<std::uint8_t>();
  r.uint<std::uint8_t>();
  if (grade < 1 || grade > 3 || prec > 1 || recip > 1) throw ShapeMismatch("invalid header fields");

  ModelConfig c;
  c.grade = ga::grade_from_int(grade);
  c.precision = prec == 1 ? Precision::f32 : Precision::f64;
  c.dim_k = r.uint<std::uint64_t>();
  c.num_entities = r.uint<std::uint64_t>();
  c.num_relations = r.uint<std::uint64_t>();
  if (c.dim_k == 0 || c.num_entities == 0 || c.num_relations == 0) {
    throw ShapeMismatch("zero dimension in header");
  }

  Checkpoint ck;
  ck.reciprocal = recip == 1;
  const auto json_len = r.uint<std::uint64_t>();
  r.need(json_len);
  ck.config_json = r.bytes(json_len);

  const std::size_t width = c.precision == Precision::f32 ? 4 : 8;
  const std::uint64_t coeffs = c.parameter_count();
  if (coeffs / c.row_size() != c.num_entities + c.num_relations) {
    throw ShapeMismatch("header counts overflow");
  }
  if (coeffs > r.remaining() / width) throw TruncatedCheckpoint();
  ck.table = EmbeddingTable(c);
  for (const auto block : {ck.table.entity_data(), ck.table.relation_data()}) {
    for (double& v : block) v = c.precision == Precision::f32 ? r.f32() : r.f64();
  }

  ck.entities = std::make_shared<const Dictionary>(read_names(r), "entity");
  ck.relations = std::make_shared<const Dictionary>(read_names(r), "relation");
  if (!r.done()) throw ShapeMismatch("trailing bytes after dictionaries");
  if (ck.entities->size() != c.num_entities) {
    throw ShapeMismatch("entity dictionary has " + std::to_string(ck.entities->size()) +
                        " names, header says " + std::to_string(c.num_entities));
  }
  if (ck.relations->size() * (ck.reciprocal ? 2 : 1) != c.num_relations) {
    throw ShapeMismatch("relation dictionary does not match the header relation count");
  }
  return ck;
}

EmbeddingTable with_precision(const EmbeddingTable& table, Precision p) {
  ModelConfig c = table.config();
  c.precision = p;
  EmbeddingTable out(c);
  std::ranges::copy(table.entity_data(), out.entity_data().begin());
  std::ranges::copy(table.relation_data(), out.relation_data().begin());
  out.quantize();
  return out;
}

}  // namespace geome
