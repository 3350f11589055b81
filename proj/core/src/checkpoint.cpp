#include "vxae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <set>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

constexpr char kMagic[4] = {'V', 'X', 'A', 'E'};

class Writer {
 public:
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void text(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  Bytes out;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2, "u16")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4, "u32")); }
  std::uint64_t u64() { return le(8, "u64"); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string text(const char* what) {
    const std::uint32_t n = u32();
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::uint64_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("checkpoint truncated while reading ") + what + " at byte " + std::to_string(pos_));
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::uint8_t* cursor() const { return bytes_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::uint64_t le(int n, const char* what) {
    need(n, what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

NamedTensor snapshot(const std::string& name, const Tensor<float>& t) {
  return {name, t.shape(), std::vector<float>(t.values().begin(), t.values().end())};
}

}  // namespace

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

Bytes save_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.u16(Checkpoint::kVersion);
  w.text(ckpt.spec_text);
  w.u64(ckpt.step);
  w.u64(ckpt.seed);
  w.u64(ckpt.adam.t);
  w.f64(ckpt.adam.lr);
  w.f64(ckpt.adam.beta1);
  w.f64(ckpt.adam.beta2);
  w.f64(ckpt.adam.eps);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  std::set<std::string_view> names;
  for (const auto& t : ckpt.tensors) {
    if (!names.insert(t.name).second) throw FormatError("checkpoint: duplicate tensor name '" + t.name + "'");
    if (static_cast<std::int64_t>(t.values.size()) != shape_numel(t.shape))
      throw FormatError("checkpoint: tensor '" + t.name + "' payload does not match its shape");
    w.text(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto e : t.shape) w.u32(static_cast<std::uint32_t>(e));
    for (float v : t.values) w.f32(v);
  }
  return std::move(w.out);
}

Checkpoint load_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(r.cursor(), kMagic, 4) != 0) throw FormatError("checkpoint: bad magic (expected 'VXAE')");
  r.skip(4);
  const std::uint16_t version = r.u16();
  if (version != Checkpoint::kVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.spec_text = r.text("model spec");
  c.step = r.u64();
  c.seed = r.u64();
  c.adam.t = r.u64();
  c.adam.lr = r.f64();
  c.adam.beta1 = r.f64();
  c.adam.beta2 = r.f64();
  c.adam.eps = r.f64();
  const std::uint32_t count = r.u32();
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.text("tensor name");
    if (!names.insert(t.name).second) throw FormatError("checkpoint: duplicate tensor name '" + t.name + "'");
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("checkpoint: tensor '" + t.name + "' has implausible rank " + std::to_string(rank));
    std::uint64_t n = 1;
    for (std::uint32_t a = 0; a < rank; ++a) {
      const std::uint32_t e = r.u32();
      if (e == 0) throw FormatError("checkpoint: tensor '" + t.name + "' has a zero extent");
      t.shape.push_back(e);
      n *= e;
      if (n > r.remaining()) r.need(n * 4, "tensor payload");
    }
    r.need(n * 4, "tensor payload");
    t.values.resize(n);
    for (auto& v : t.values) v = r.f32();
    c.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0)
    throw FormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes at byte " +
                      std::to_string(r.pos()));
  return c;
}

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, save_checkpoint(ckpt));
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) { return load_checkpoint(read_file_bytes(path)); }

Checkpoint make_checkpoint(const Autoencoder<float>& model, const AdamState<float>* adam, std::uint64_t step) {
  Checkpoint c;
  c.spec_text = to_text(model.spec());
  c.step = step;
  c.seed = model.seed();
  for (const auto& e : model.params().entries()) c.tensors.push_back(snapshot(e.name, e.tensor));
  if (adam != nullptr) {
    c.adam = {adam->t, adam->lr, adam->beta1, adam->beta2, adam->eps};
    const auto names = model.params().trainable_names();
    const auto params = model.params().trainable();
    if (!adam->m.empty()) {
      for (std::size_t i = 0; i < names.size(); ++i)
        c.tensors.push_back({"adam.m." + names[i], params[i].shape(), adam->m[i]});
      for (std::size_t i = 0; i < names.size(); ++i)
        c.tensors.push_back({"adam.v." + names[i], params[i].shape(), adam->v[i]});
    }
  }
  return c;
}

void load_model_tensors(const Checkpoint& ckpt, ParamStore<float>& params, std::string_view prefix) {
  for (const auto& e : params.entries()) {
    if (!e.name.starts_with(prefix)) continue;
    const NamedTensor* t = ckpt.find(e.name);
    if (t == nullptr) throw FormatError("checkpoint lacks tensor '" + e.name + "'");
    if (t->shape != e.tensor.shape())
      throw FormatError("checkpoint tensor '" + e.name + "' has shape " + shape_to_string(t->shape) +
                        ", model expects " + shape_to_string(e.tensor.shape()));
    Tensor<float> dst = e.tensor;
    std::copy(t->values.begin(), t->values.end(), dst.mutable_values().begin());
  }
}

Autoencoder<float> model_from_checkpoint(const Checkpoint& ckpt) {
  Autoencoder<float> model(parse_model_spec(ckpt.spec_text), ckpt.seed);
  load_model_tensors(ckpt, model.params());
  return model;
}

AdamState<float> adam_from_checkpoint(const Checkpoint& ckpt, const ParamStore<float>& params) {
  AdamState<float> s;
  s.t = ckpt.adam.t;
  s.lr = ckpt.adam.lr;
  s.beta1 = ckpt.adam.beta1;
  s.beta2 = ckpt.adam.beta2;
  s.eps = ckpt.adam.eps;
  if (s.t == 0) return s;
  for (const auto& name : params.trainable_names()) {
    const NamedTensor* m = ckpt.find("adam.m." + name);
    const NamedTensor* v = ckpt.find("adam.v." + name);
    if (m == nullptr || v == nullptr) throw FormatError("checkpoint lacks Adam moments for '" + name + "'");
    s.m.push_back(m->values);
    s.v.push_back(v->values);
  }
  return s;
}

}  // namespace vxae
