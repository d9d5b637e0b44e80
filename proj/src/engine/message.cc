#include "fgl/engine/message.h"

#include <algorithm>
#include <bit>
#include <cstring>

#include "fgl/common/error.h"

namespace fgl {
namespace {

class Writer {
 public:
  void U32(uint32_t v) { Bytes(v, 4); }
  void U64(uint64_t v) { Bytes(v, 8); }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Key(std::string_view key) {
    U32(static_cast<uint32_t>(key.size()));
    out_.append(key);
  }
  void Vector(const std::vector<double>& v) {
    U64(v.size());
    for (double x : v) F64(x);
  }
  std::string Take() { return std::move(out_); }

 private:
  void Bytes(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  uint32_t U32() { return static_cast<uint32_t>(Bytes(4)); }
  uint64_t U64() { return Bytes(8); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Key() {
    const uint32_t n = U32();
    Need(n);
    std::string key(in_.substr(pos_, n));
    pos_ += n;
    return key;
  }
  std::vector<double> Vector() {
    const uint64_t n = U64();
    if (n > (in_.size() - pos_) / 8) Fail("vector length exceeds payload");
    std::vector<double> v(n);
    for (double& x : v) x = F64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kFormat,
                "message at byte " + std::to_string(pos_) + ": " + what);
  }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) Fail("truncated");
  }
  uint64_t Bytes(int n) {
    Need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeMessage(const Message& m) {
  uint32_t fields = 0;
  for (bool present : {m.params.has_value(), m.params_delta.has_value(), m.control.has_value(),
                       m.control_delta.has_value(), m.num_samples.has_value(),
                       m.prototypes.has_value()}) {
    fields += present;
  }
  Writer w;
  w.U32(fields);
  auto vector_field = [&](std::string_view key, const std::optional<std::vector<double>>& v) {
    if (!v) return;
    w.Key(key);
    w.Vector(*v);
  };
  vector_field("params", m.params);
  vector_field("params_delta", m.params_delta);
  vector_field("control", m.control);
  vector_field("control_delta", m.control_delta);
  if (m.num_samples) {
    w.Key("num_samples");
    w.U64(static_cast<uint64_t>(*m.num_samples));
  }
  if (m.prototypes) {
    w.Key("prototypes");
    w.U64(m.prototypes->size());
    for (const auto& [cls, proto] : *m.prototypes) {
      w.U64(static_cast<uint64_t>(cls));
      w.U64(static_cast<uint64_t>(proto.count));
      w.Vector(proto.center);
    }
  }
  return w.Take();
}

Message DeserializeMessage(std::string_view bytes) {
  Reader r(bytes);
  Message m;
  const uint32_t fields = r.U32();
  for (uint32_t f = 0; f < fields; ++f) {
    const std::string key = r.Key();
    auto take_vector = [&](std::optional<std::vector<double>>& slot) {
      if (slot) r.Fail("duplicate field '" + key + "'");
      slot = r.Vector();
    };
    if (key == "params") {
      take_vector(m.params);
    } else if (key == "params_delta") {
      take_vector(m.params_delta);
    } else if (key == "control") {
      take_vector(m.control);
    } else if (key == "control_delta") {
      take_vector(m.control_delta);
    } else if (key == "num_samples") {
      if (m.num_samples) r.Fail("duplicate field 'num_samples'");
      const uint64_t n = r.U64();
      if (n > static_cast<uint64_t>(INT64_MAX)) r.Fail("num_samples out of range");
      m.num_samples = static_cast<int64_t>(n);
    } else if (key == "prototypes") {
      if (m.prototypes) r.Fail("duplicate field 'prototypes'");
      PrototypeMap protos;
      const uint64_t n = r.U64();
      for (uint64_t i = 0; i < n; ++i) {
        const auto cls = static_cast<int>(r.U64());
        Prototype p;
        p.count = static_cast<int64_t>(r.U64());
        p.center = r.Vector();
        if (!protos.emplace(cls, std::move(p)).second) r.Fail("duplicate prototype class");
      }
      m.prototypes = std::move(protos);
    } else {
      r.Fail("unknown field '" + key + "'");
    }
  }
  if (!r.done()) r.Fail("trailing bytes");
  return m;
}

std::string ActorName(int actor) {
  return actor == kServerActor ? "server" : "client_" + std::to_string(actor);
}

void MessagePool::Violation(int actor, const std::string& what) const {
  throw Error(ErrorCode::kContractViolation,
              "round " + std::to_string(round_) + ", actor " + ActorName(actor) + ": " + what);
}

void MessagePool::BeginRound(int round, std::vector<int> sampled) {
  std::lock_guard lock(mu_);
  round_ = round;
  sampled_ = std::move(sampled);
  entries_.clear();
}

void MessagePool::Write(int actor, const Message& m) {
  std::string bytes = SerializeMessage(m);
  std::lock_guard lock(mu_);
  if (actor != kServerActor) {
    if (!std::binary_search(sampled_.begin(), sampled_.end(), actor)) {
      Violation(actor, "client is not sampled this round");
    }
    if (!entries_.count(kServerActor)) Violation(actor, "server entry missing");
  }
  if (!entries_.emplace(actor, std::move(bytes)).second) {
    Violation(actor, "entry already written this round");
  }
}

Message MessagePool::Read(int reader, int owner) const {
  std::lock_guard lock(mu_);
  if (reader != kServerActor && owner != kServerActor) {
    Violation(reader, "read of " + ActorName(owner) + "'s entry");
  }
  auto it = entries_.find(owner);
  if (it == entries_.end()) Violation(reader, "no entry for " + ActorName(owner));
  return DeserializeMessage(it->second);
}

bool MessagePool::Has(int actor) const {
  std::lock_guard lock(mu_);
  return entries_.count(actor) > 0;
}

int64_t MessagePool::UplinkBytes() const {
  std::lock_guard lock(mu_);
  int64_t total = 0;
  for (const auto& [actor, bytes] : entries_) {
    if (actor != kServerActor) total += static_cast<int64_t>(bytes.size());
  }
  return total;
}

int64_t MessagePool::DownlinkBytes() const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(kServerActor);
  if (it == entries_.end()) return 0;
  return static_cast<int64_t>(it->second.size()) * static_cast<int64_t>(sampled_.size());
}

}  // namespace fgl
