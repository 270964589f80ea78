#include "doctest.h"

#include <set>

#include "blindmix/ec_group.hpp"
#include "blindmix/hash.hpp"
#include "support.hpp"

using namespace blindmix;
using blindmix::testing::vec_bytes;
using blindmix::testing::vec_mpz;

TEST_SUITE("ec_group") {

TEST_CASE("sha256 matches FIPS 180 vectors") {
  CHECK(to_hex(hash256({})) == to_hex(vec_bytes("sha256.empty")));
  CHECK(to_hex(hash256(as_bytes("abc"))) == to_hex(vec_bytes("sha256.abc")));
  CHECK(to_hex(hash256(as_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))) ==
        to_hex(vec_bytes("sha256.448bit")));
  CHECK(to_hex(hash256(as_bytes(std::string(1000000, 'a')))) == to_hex(vec_bytes("sha256.million_a")));
}

TEST_CASE("secp256k1 parameters") {
  const Curve& c = Curve::secp256k1();
  CHECK(c.params().p == vec_mpz("secp256k1.p"));
  CHECK(c.order() == vec_mpz("secp256k1.n"));
  CHECK(c.generator().x == vec_mpz("secp256k1.gx"));
  CHECK(c.generator().y == vec_mpz("secp256k1.gy"));
  CHECK(c.params().p % 2 == 1);
  CHECK(c.field_bytes() == 32);
  CHECK(c.point_bytes() == 33);
}

TEST_CASE("small multiples of G on secp256k1") {
  const Curve& c = Curve::secp256k1();
  const CurvePoint g2 = c.mul_base(c.scalar(2));
  CHECK(g2.x == vec_mpz("secp256k1.g2x"));
  CHECK(g2.y == vec_mpz("secp256k1.g2y"));
  const CurvePoint g3 = c.mul(mpz_class(3), c.generator());
  CHECK(g3.x == vec_mpz("secp256k1.g3x"));
  CHECK(g3.y == vec_mpz("secp256k1.g3y"));
  CHECK(c.add(c.generator(), c.generator()) == g2);
  CHECK(c.add(g2, c.generator()) == g3);
}

TEST_CASE("n*G is the point at infinity and (n-1)*G = -G") {
  const Curve& c = Curve::secp256k1();
  CHECK(c.mul(c.order(), c.generator()).is_infinity());
  CHECK(c.mul_base(c.scalar(c.order() - 1)) == c.negate(c.generator()));
  CHECK(c.add(c.generator(), c.negate(c.generator())).is_infinity());
}

TEST_CASE("group law properties on random points") {
  const Curve& c = Curve::secp256k1();
  SeededEntropy rng(42);
  for (int i = 0; i < 20; ++i) {
    const Scalar a = c.random_scalar(rng);
    const Scalar b = c.random_scalar(rng);
    const CurvePoint pa = c.mul_base(a);
    const CurvePoint pb = c.mul_base(b);
    CHECK(c.on_curve(pa));
    CHECK(c.add(pa, pb) == c.mul_base(c.add(a, b)));
    CHECK(c.add(pa, pb) == c.add(pb, pa));
    CHECK(c.mul(a, pb) == c.mul(b, pa));
    CHECK(c.mul(a, c.generator()) == pa);
    CHECK(c.mul_add(a, c.generator(), b, pb) == c.add(pa, c.mul(b, pb)));
    CHECK(c.add(c.add(pa, pb), c.generator()) == c.add(pa, c.add(pb, c.generator())));
  }
}

TEST_CASE("compressed encoding round trip and rejection") {
  const Curve& c = Curve::secp256k1();
  SeededEntropy rng(7);
  for (int i = 0; i < 20; ++i) {
    const CurvePoint p = c.mul_base(c.random_scalar(rng));
    const Bytes enc = c.serialize(p);
    REQUIRE(enc.size() == 33);
    CHECK(c.deserialize(enc) == p);
  }
  Bytes bad = c.serialize(c.generator());
  bad[0] = 0x04;
  CHECK_THROWS_AS(c.deserialize(bad), DecodeError);
  CHECK_THROWS_AS(c.deserialize(Bytes(32, 2)), DecodeError);
  // x = 5 has no square root of x^3 + 7 on secp256k1.
  Bytes off(33, 0);
  off[0] = 0x02;
  off[32] = 5;
  CHECK_THROWS_AS(c.deserialize(off), DecodeError);
}

TEST_CASE("address is double SHA-256 of the compressed key") {
  const Curve& c = Curve::secp256k1();
  CHECK(address_of(c, c.generator()).hex() == blindmix::testing::vectors().at("secp256k1.address_g"));
  CHECK(address_of(c, c.mul_base(c.scalar(2))).hex() == blindmix::testing::vectors().at("secp256k1.address_2g"));
  CHECK_THROWS(address_of(c, CurvePoint::at_infinity()));
}

TEST_CASE("toy curve matches the enumeration oracle") {
  const Curve& t = Curve::toy();
  CHECK(t.params().p == vec_mpz("toy.p"));
  CHECK(t.order() == vec_mpz("toy.n"));
  CHECK(t.generator().x == vec_mpz("toy.gx"));
  CHECK(t.generator().y == vec_mpz("toy.gy"));
  const CurvePoint g2 = t.mul_base(t.scalar(2));
  CHECK(g2.x == vec_mpz("toy.g2x"));
  CHECK(g2.y == vec_mpz("toy.g2y"));
  CHECK(address_of(t, t.generator()).hex() == blindmix::testing::vectors().at("toy.address_g"));

  const std::vector<CurvePoint> all = t.enumerate_points();
  CHECK(all.size() == 199);
  // Every multiple of G is distinct, and k*G agrees across the three multiplication paths.
  std::set<std::pair<std::string, std::string>> seen;
  CurvePoint acc = CurvePoint::at_infinity();
  for (int k = 1; k < 199; ++k) {
    acc = t.add(acc, t.generator());
    CHECK(t.mul_base(t.scalar(k)) == acc);
    CHECK(t.mul(mpz_class(k), t.generator()) == acc);
    seen.insert({acc.x.get_str(), acc.y.get_str()});
  }
  CHECK(seen.size() == 198);
  CHECK(t.add(acc, t.generator()).is_infinity());
}

TEST_CASE("scalar arithmetic stays reduced") {
  const Curve& t = Curve::toy();
  CHECK(t.add(t.scalar(150), t.scalar(100)).value == 51);
  CHECK(t.sub(t.scalar(3), t.scalar(10)).value == 192);
  CHECK(t.mul(t.inverse(t.scalar(7)), t.scalar(7)).value == 1);
  CHECK_THROWS_AS(t.inverse(t.scalar(0)), std::domain_error);
  SeededEntropy rng(3);
  for (int i = 0; i < 500; ++i) {
    const Scalar s = t.random_scalar(rng);
    CHECK(s.value >= 1);
    CHECK(s.value < t.order());
  }
}

TEST_CASE("invalid curve parameters are rejected") {
  CurveParams p = Curve::toy().params();
  p.n = 197;
  CHECK_THROWS_AS(Curve{p}, std::invalid_argument);
  p = Curve::toy().params();
  p.g = CurvePoint::affine(3, 34);
  CHECK_THROWS_AS(Curve{p}, std::invalid_argument);
}

TEST_CASE("keygen is deterministic under a seeded source") {
  const Curve& c = Curve::secp256k1();
  SeededEntropy a(99);
  SeededEntropy b(99);
  const KeyPair ka = keygen(c, a);
  const KeyPair kb = keygen(c, b);
  CHECK(ka.secret == kb.secret);
  CHECK(ka.public_key == kb.public_key);
  CHECK(keypair_from_secret(c, ka.secret).public_key == ka.public_key);
}

}
