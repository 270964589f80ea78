#include "blindmix/rsa_blind.hpp"

#include <stdexcept>

#include "blindmix/ec_group.hpp"
#include "blindmix/hash.hpp"

namespace blindmix {

mpz_class random_below(const mpz_class& bound, Entropy& entropy) {
  if (bound <= 0) throw std::invalid_argument("random_below needs a positive bound");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t bytes = (bits + 7) / 8;
  const unsigned excess = static_cast<unsigned>(bytes * 8 - bits);
  for (;;) {
    Bytes raw = entropy.bytes(bytes);
    raw[0] &= static_cast<std::uint8_t>(0xff >> excess);
    mpz_class v = mpz_from_bytes(raw);
    if (v < bound) return v;
  }
}

namespace {

mpz_class random_prime(unsigned bits, Entropy& entropy) {
  const mpz_class top = mpz_class(1) << (bits - 1);
  for (;;) {
    mpz_class candidate = random_below(top, entropy) + top;
    // Top two bits set keeps p*q at the full width; odd.
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    // 32 Miller-Rabin rounds bound the error by 4^-32 = 2^-64.
    if (mpz_probab_prime_p(candidate.get_mpz_t(), 32) != 0) return candidate;
  }
}

}  // namespace

RsaKeyPair rsa_keygen(unsigned bits, Entropy& entropy) {
  if (bits < 16 || bits % 2 != 0) throw std::invalid_argument("RSA modulus size must be even and at least 16 bits");
  const mpz_class e = 65537;
  for (;;) {
    const mpz_class p = random_prime(bits / 2, entropy);
    const mpz_class q = random_prime(bits / 2, entropy);
    if (p == q) continue;
    const mpz_class phi = (p - 1) * (q - 1);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    mpz_class d;
    mpz_invert(d.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
    return {{p * q, e}, d};
  }
}

mpz_class rsa_message_representative(const RsaPublicKey& key, ByteView message) {
  mpz_class h = mpz_from_bytes(hash256(message));
  return h % key.n;
}

mpz_class rsa_blinding_factor(const RsaPublicKey& key, Entropy& entropy) {
  for (;;) {
    mpz_class r = random_below(key.n - 2, entropy) + 2;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t());
    if (g == 1) return r;
  }
}

mpz_class rsa_blind(const RsaPublicKey& key, const mpz_class& representative, const mpz_class& r) {
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t());
  if (g != 1) throw std::invalid_argument("blinding factor shares a factor with N");
  mpz_class re;
  mpz_powm(re.get_mpz_t(), r.get_mpz_t(), key.e.get_mpz_t(), key.n.get_mpz_t());
  return (representative * re) % key.n;
}

mpz_class rsa_blind_sign(const RsaKeyPair& key, const mpz_class& blinded) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), blinded.get_mpz_t(), key.d.get_mpz_t(), key.pub.n.get_mpz_t());
  return out;
}

mpz_class rsa_unblind(const RsaPublicKey& key, const mpz_class& blind_sig, const mpz_class& r) {
  mpz_class inv;
  if (mpz_invert(inv.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t()) == 0) {
    throw std::invalid_argument("blinding factor is not invertible mod N");
  }
  return (blind_sig * inv) % key.n;
}

bool rsa_verify(const RsaPublicKey& key, const mpz_class& representative, const mpz_class& sig) {
  if (sig < 0 || sig >= key.n) return false;
  mpz_class v;
  mpz_powm(v.get_mpz_t(), sig.get_mpz_t(), key.e.get_mpz_t(), key.n.get_mpz_t());
  return v == representative % key.n;
}

}  // namespace blindmix
