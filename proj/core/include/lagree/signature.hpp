#pragma once

#include <map>
#include <memory>

#include "lagree/lattice.hpp"

namespace lagree {

/// Signing backend shared by all processes of a run. Correct processes and
/// scripted adversaries alike only ever call sign() with their own id; the
/// harness hands each node a handle bound to its identity, which is what
/// makes forgeries impossible in simulation.
class SignatureProvider {
 public:
  virtual ~SignatureProvider() = default;
  virtual Bytes sign(NodeId signer, const Bytes& data) = 0;
  virtual bool verify(NodeId signer, const Bytes& data, const Bytes& sig) const = 0;
  virtual std::string scheme_name() const = 0;
};

/// Keyed-digest scheme for deterministic simulation. The signature is a pure
/// function of (signer, data), so an offline checker can re-verify proofs
/// from a trace without any key material.
class IdealSignatureProvider : public SignatureProvider {
 public:
  Bytes sign(NodeId signer, const Bytes& data) override;
  bool verify(NodeId signer, const Bytes& data, const Bytes& sig) const override;
  std::string scheme_name() const override { return "ideal"; }
};

/// Ed25519 via libsodium. Keypairs are derived from a run seed so runs stay
/// reproducible. Slower; exercised by unit tests to keep the interface
/// honest against a real scheme.
class Ed25519SignatureProvider : public SignatureProvider {
 public:
  Ed25519SignatureProvider(uint64_t run_seed, int node_count);
  Bytes sign(NodeId signer, const Bytes& data) override;
  bool verify(NodeId signer, const Bytes& data, const Bytes& sig) const override;
  std::string scheme_name() const override { return "ed25519"; }

 private:
  std::map<NodeId, Bytes> secret_keys_;
  std::map<NodeId, Bytes> public_keys_;
};

std::shared_ptr<SignatureProvider> make_signature_provider(
    const std::string& scheme, uint64_t run_seed, int node_count);

}  // namespace lagree
