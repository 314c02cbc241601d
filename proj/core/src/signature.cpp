#include "lagree/signature.hpp"

#include <sodium.h>

#include <stdexcept>

namespace lagree {

static Bytes ideal_tag(NodeId signer, const Bytes& data) {
  Bytes buf;
  for (char c : std::string("lagree-ideal-sig")) buf.push_back(uint8_t(c));
  put_u64(buf, uint64_t(int64_t(signer)));
  buf.insert(buf.end(), data.begin(), data.end());
  Bytes sig;
  put_u64(sig, fnv1a64(buf));
  // Second lane with a different seed so the signature is 16 bytes and a
  // single accidental collision cannot validate.
  put_u64(sig, fnv1a64(buf, 1099511628211ull));
  return sig;
}

Bytes IdealSignatureProvider::sign(NodeId signer, const Bytes& data) {
  return ideal_tag(signer, data);
}

bool IdealSignatureProvider::verify(NodeId signer, const Bytes& data,
                                    const Bytes& sig) const {
  return sig == ideal_tag(signer, data);
}

Ed25519SignatureProvider::Ed25519SignatureProvider(uint64_t run_seed,
                                                   int node_count) {
  if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  for (NodeId id = 0; id < node_count; ++id) {
    Bytes seed(crypto_sign_SEEDBYTES, 0);
    Bytes material;
    put_u64(material, run_seed);
    put_u64(material, uint64_t(id));
    uint64_t h = fnv1a64(material);
    for (size_t i = 0; i < seed.size(); ++i) {
      h = h * 6364136223846793005ull + 1442695040888963407ull;
      seed[i] = uint8_t(h >> 33);
    }
    Bytes pk(crypto_sign_PUBLICKEYBYTES, 0);
    Bytes sk(crypto_sign_SECRETKEYBYTES, 0);
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    public_keys_[id] = pk;
    secret_keys_[id] = sk;
  }
}

Bytes Ed25519SignatureProvider::sign(NodeId signer, const Bytes& data) {
  auto it = secret_keys_.find(signer);
  if (it == secret_keys_.end()) throw std::logic_error("unknown signer");
  Bytes sig(crypto_sign_BYTES, 0);
  crypto_sign_detached(sig.data(), nullptr, data.data(), data.size(),
                       it->second.data());
  return sig;
}

bool Ed25519SignatureProvider::verify(NodeId signer, const Bytes& data,
                                      const Bytes& sig) const {
  auto it = public_keys_.find(signer);
  if (it == public_keys_.end()) return false;
  if (sig.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(sig.data(), data.data(), data.size(),
                                     it->second.data()) == 0;
}

std::shared_ptr<SignatureProvider> make_signature_provider(
    const std::string& scheme, uint64_t run_seed, int node_count) {
  if (scheme == "ideal") return std::make_shared<IdealSignatureProvider>();
  if (scheme == "ed25519")
    return std::make_shared<Ed25519SignatureProvider>(run_seed, node_count);
  throw std::runtime_error("unknown signature scheme: " + scheme);
}

}  // namespace lagree
