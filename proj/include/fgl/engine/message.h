#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fgl/learn/model.h"

namespace fgl {

struct Message {
  std::optional<std::vector<double>> params;
  std::optional<std::vector<double>> params_delta;   // Scaffold client delta
  std::optional<std::vector<double>> control;        // Scaffold server variate
  std::optional<std::vector<double>> control_delta;  // Scaffold client delta
  std::optional<int64_t> num_samples;
  std::optional<PrototypeMap> prototypes;

  bool operator==(const Message&) const = default;
};

// Little-endian encoding: u32 field count, then per present field a u32 key
// length, the key bytes and the payload. Vectors are a u64 length and f64
// values; num_samples is a u64; prototypes are a u64 class count followed
// by (u64 class, u64 count, u64 dim, f64 values) per class.
std::string SerializeMessage(const Message& m);

// Throws kFormat on truncated or malformed input.
Message DeserializeMessage(std::string_view bytes);

inline constexpr int kServerActor = -1;

// "server" or "client_<i>".
std::string ActorName(int actor);

// Per-round store through which the server and clients exchange serialized
// messages. Access rules are enforced; violations throw kContractViolation.
// Client writes to distinct keys may happen concurrently.
class MessagePool {
 public:
  // Starts round `round` with the sorted `sampled` client list and clears
  // every entry of the previous round.
  void BeginRound(int round, std::vector<int> sampled);

  // `actor` writes its own entry. Clients must be sampled, must find the
  // server entry present and may write once per round.
  void Write(int actor, const Message& m);

  // Clients may read only the server entry; the server may read any entry.
  Message Read(int reader, int owner) const;

  int round() const { return round_; }
  const std::vector<int>& sampled() const { return sampled_; }
  bool Has(int actor) const;

  // Bytes of client entries written this round.
  int64_t UplinkBytes() const;
  // Server entry bytes times the number of sampled clients.
  int64_t DownlinkBytes() const;

 private:
  [[noreturn]] void Violation(int actor, const std::string& what) const;

  mutable std::mutex mu_;
  int round_ = 0;
  std::vector<int> sampled_;
  std::map<int, std::string> entries_;
};

}  // namespace fgl
