#pragma once

#include <gmpxx.h>

#include "blindmix/bytes.hpp"
#include "blindmix/entropy.hpp"

namespace blindmix {

// Textbook Chaum blind RSA: the baseline for the timing comparison.

struct RsaPublicKey {
  mpz_class n;
  mpz_class e;
};

struct RsaKeyPair {
  RsaPublicKey pub;
  mpz_class d;
};

/// Two primes of bits/2 each (Miller-Rabin, error below 2^-64), e = 65537.
RsaKeyPair rsa_keygen(unsigned bits, Entropy& entropy);

/// H(m) = SHA-256(m) as an integer reduced mod N.
mpz_class rsa_message_representative(const RsaPublicKey& key, ByteView message);

/// Uniform r in [2, N) with gcd(r, N) = 1.
mpz_class rsa_blinding_factor(const RsaPublicKey& key, Entropy& entropy);

/// H(m) * r^e mod N. Throws std::invalid_argument if gcd(r, N) != 1.
mpz_class rsa_blind(const RsaPublicKey& key, const mpz_class& representative, const mpz_class& r);
/// blinded^d mod N.
mpz_class rsa_blind_sign(const RsaKeyPair& key, const mpz_class& blinded);
/// blind_sig * r^-1 mod N.
mpz_class rsa_unblind(const RsaPublicKey& key, const mpz_class& blind_sig, const mpz_class& r);
/// sig^e == H(m) mod N.
bool rsa_verify(const RsaPublicKey& key, const mpz_class& representative, const mpz_class& sig);

/// Uniform value in [0, bound) drawn from the entropy source.
mpz_class random_below(const mpz_class& bound, Entropy& entropy);

}  // namespace blindmix
