#include "lagree/lattice.hpp"

#include <stdexcept>

namespace lagree {

void put_u64(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_u32(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_u8(Bytes& out, uint8_t v) { out.push_back(v); }

static void need(const Bytes& in, size_t pos, size_t count) {
  if (pos + count > in.size()) throw std::runtime_error("truncated encoding");
}

uint64_t get_u64(const Bytes& in, size_t& pos) {
  need(in, pos, 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[pos++];
  return v;
}

uint32_t get_u32(const Bytes& in, size_t& pos) {
  need(in, pos, 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[pos++];
  return v;
}

uint8_t get_u8(const Bytes& in, size_t& pos) {
  need(in, pos, 1);
  return in[pos++];
}

std::string to_hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (uint8_t c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 0xf]);
  }
  return s;
}

static int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::runtime_error("bad hex digit");
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw std::runtime_error("odd hex length");
  Bytes out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i < s.size(); i += 2)
    out.push_back(uint8_t((hex_nibble(s[i]) << 4) | hex_nibble(s[i + 1])));
  return out;
}

uint64_t fnv1a64(const Bytes& b, uint64_t seed) {
  uint64_t h = seed;
  for (uint8_t c : b) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(const Bytes& b) {
  uint64_t h = fnv1a64(b);
  Bytes raw;
  put_u64(raw, h);
  return to_hex(raw);
}

Bytes Item::encode() const {
  Bytes out;
  put_u64(out, origin);
  put_u8(out, uint8_t(kind));
  put_u32(out, uint32_t(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Item Item::decode(const Bytes& in, size_t& pos) {
  Item it;
  it.origin = get_u64(in, pos);
  uint8_t k = get_u8(in, pos);
  if (k > 2) throw std::runtime_error("bad item kind");
  it.kind = ItemKind(k);
  uint32_t len = get_u32(in, pos);
  need(in, pos, len);
  it.payload.assign(in.begin() + pos, in.begin() + pos + len);
  pos += len;
  return it;
}

Item make_value_item(uint64_t origin, const std::string& payload) {
  return Item{origin, ItemKind::value, Bytes(payload.begin(), payload.end())};
}

Item make_command_item(uint64_t origin, const Bytes& payload) {
  return Item{origin, ItemKind::command, payload};
}

Item make_nop_item(uint64_t origin, const Bytes& payload) {
  return Item{origin, ItemKind::nop, payload};
}

LatticeValue LatticeValue::single(Item it) {
  LatticeValue v;
  v.items_.insert(std::move(it));
  return v;
}

void LatticeValue::join_with(const LatticeValue& other) {
  items_.insert(other.items_.begin(), other.items_.end());
}

Bytes LatticeValue::encode() const {
  Bytes out;
  put_u32(out, uint32_t(items_.size()));
  // std::set iterates in (origin, kind, payload) order already.
  for (const Item& it : items_) {
    Bytes enc = it.encode();
    out.insert(out.end(), enc.begin(), enc.end());
  }
  return out;
}

LatticeValue LatticeValue::decode(const Bytes& in, size_t& pos) {
  uint32_t count = get_u32(in, pos);
  LatticeValue v;
  for (uint32_t i = 0; i < count; ++i) v.items_.insert(Item::decode(in, pos));
  return v;
}

std::optional<LatticeValue> LatticeValue::decode_all(const Bytes& in) {
  try {
    size_t pos = 0;
    LatticeValue v = decode(in, pos);
    if (pos != in.size()) return std::nullopt;
    return v;
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

LatticeValue join(const LatticeValue& a, const LatticeValue& b) {
  LatticeValue out = a;
  out.join_with(b);
  return out;
}

bool leq(const LatticeValue& a, const LatticeValue& b) {
  const auto& bi = b.items();
  for (const Item& it : a.items())
    if (bi.count(it) == 0) return false;
  return true;
}

bool comparable(const LatticeValue& a, const LatticeValue& b) {
  return leq(a, b) || leq(b, a);
}

LatticeValue big_join(const std::vector<LatticeValue>& vs) {
  LatticeValue out;
  for (const LatticeValue& v : vs) out.join_with(v);
  return out;
}

AdmissibilityPredicate accept_all_predicate() {
  return [](const Item&) { return true; };
}

AdmissibilityPredicate wellformed_command_predicate() {
  return [](const Item& it) {
    if (it.kind != ItemKind::command && it.kind != ItemKind::nop) return false;
    if (it.payload.size() != 16) return false;
    size_t pos = 0;
    uint64_t claimed = get_u64(it.payload, pos);
    return claimed == it.origin;
  };
}

}  // namespace lagree
