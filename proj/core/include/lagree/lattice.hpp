#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lagree {

using Bytes = std::vector<uint8_t>;
using NodeId = int32_t;

// Byte-order helpers for the canonical encodings. Everything on the wire is
// big-endian so that numeric order and byte order coincide.
void put_u64(Bytes& out, uint64_t v);
void put_u32(Bytes& out, uint32_t v);
void put_u8(Bytes& out, uint8_t v);
uint64_t get_u64(const Bytes& in, size_t& pos);
uint32_t get_u32(const Bytes& in, size_t& pos);
uint8_t get_u8(const Bytes& in, size_t& pos);

std::string to_hex(const Bytes& b);
Bytes from_hex(const std::string& s);

// FNV-1a over a byte string; used for payload digests in traces.
uint64_t fnv1a64(const Bytes& b, uint64_t seed = 14695981039346656037ull);
std::string digest_hex(const Bytes& b);

enum class ItemKind : uint8_t { value = 0, command = 1, nop = 2 };

/// One element of the proposal universe. `origin` names the process or
/// client that introduced the item, `payload` is opaque to the protocols.
/// The triple (origin, kind, payload) identifies an item; two items with
/// the same triple are the same item.
struct Item {
  uint64_t origin = 0;
  ItemKind kind = ItemKind::value;
  Bytes payload;

  auto tie() const { return std::tuple(origin, kind, payload); }
  bool operator<(const Item& o) const { return tie() < o.tie(); }
  bool operator==(const Item& o) const { return tie() == o.tie(); }

  // origin(8, big-endian) | kind(1) | payload length(4, big-endian) | payload
  Bytes encode() const;
  static Item decode(const Bytes& in, size_t& pos);
};

Item make_value_item(uint64_t origin, const std::string& payload);
Item make_command_item(uint64_t origin, const Bytes& payload);
Item make_nop_item(uint64_t origin, const Bytes& payload);

/// A point of the join semilattice: a finite set of items ordered by
/// inclusion. Join is set union; the bottom element is the empty set.
class LatticeValue {
 public:
  LatticeValue() = default;
  explicit LatticeValue(std::set<Item> items) : items_(std::move(items)) {}
  static LatticeValue single(Item it);

  const std::set<Item>& items() const { return items_; }
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(const Item& it) const { return items_.count(it) != 0; }

  void insert(const Item& it) { items_.insert(it); }
  void join_with(const LatticeValue& other);

  bool operator==(const LatticeValue& o) const { return items_ == o.items_; }
  bool operator!=(const LatticeValue& o) const { return items_ != o.items_; }

  /// Canonical bit-stable encoding: item count (4 bytes, big-endian)
  /// followed by the encodings of the items sorted by (origin, kind,
  /// payload). Two equal sets always encode to identical bytes, which is
  /// what signing and exact-equality checks rely on.
  Bytes encode() const;
  static LatticeValue decode(const Bytes& in, size_t& pos);
  static std::optional<LatticeValue> decode_all(const Bytes& in);

 private:
  std::set<Item> items_;
};

LatticeValue join(const LatticeValue& a, const LatticeValue& b);
// leq(a, b) holds iff a is a subset of b, i.e. b = join(a, b).
bool leq(const LatticeValue& a, const LatticeValue& b);
bool comparable(const LatticeValue& a, const LatticeValue& b);
LatticeValue big_join(const std::vector<LatticeValue>& vs);

/// Deterministic, total membership test for the admissible universe.
/// Protocol handlers drop items that fail it.
using AdmissibilityPredicate = std::function<bool(const Item&)>;

AdmissibilityPredicate accept_all_predicate();
// Commands must be (origin | seq) 16-byte payloads with kind command; nops
// the same shape with kind nop. Used by the replicated state machine runs.
AdmissibilityPredicate wellformed_command_predicate();

}  // namespace lagree
