#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcbdc/bytes.hpp"
#include "rcbdc/errors.hpp"
#include "rcbdc/hash.hpp"
#include "rcbdc/rng.hpp"

namespace rcbdc {

enum class Profile : std::uint8_t { toy = 0, test = 1, prod = 2, custom = 3 };

// How the second generator was produced.
enum class HOrigin : std::uint8_t { hashed = 0, ceremony = 1 };

struct GroupParams {
  mpz_class p, q, g, h;
  Profile profile = Profile::custom;
  HOrigin h_origin = HOrigin::hashed;

  bool operator==(const GroupParams&) const = default;
};

// Exponent in [0, q).
class Scalar {
 public:
  Scalar() = default;
  const mpz_class& value() const { return v_; }
  bool is_zero() const { return v_ == 0; }
  unsigned long ul() const { return v_.get_ui(); }

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Scalar& a, const Scalar& b) {
    int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

 private:
  friend class Group;
  explicit Scalar(mpz_class v) : v_(std::move(v)) {}
  mpz_class v_;
};

// Member of the order-q subgroup of Z_p^*. Only `Group` constructs these, either
// from arithmetic on members or after an explicit membership check.
class GroupElement {
 public:
  GroupElement() : v_(1) {}
  const mpz_class& value() const { return v_; }
  unsigned long ul() const { return v_.get_ui(); }

  friend bool operator==(const GroupElement& a, const GroupElement& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) {
    int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

 private:
  friend class Group;
  explicit GroupElement(mpz_class v) : v_(std::move(v)) {}
  mpz_class v_;
};

namespace detail {

// Fixed-base exponentiation with one precomputed table per w-bit window:
// entry [i][d] = base^(d * 2^(w*i)). Every window costs one multiplication,
// including zero digits, so the sequence of operations does not depend on
// the exponent.
class FixedBaseTable {
 public:
  FixedBaseTable(const mpz_class& base, const mpz_class& p, std::size_t exp_bits)
      : p_(p), width_(exp_bits <= 16 ? 2 : exp_bits <= 64 ? 4 : 6) {
    windows_ = (exp_bits + width_ - 1) / width_;
    std::size_t per = std::size_t{1} << width_;
    table_.resize(windows_ * per);
    mpz_class step = base;
    for (std::size_t i = 0; i < windows_; ++i) {
      table_[i * per] = 1;
      for (std::size_t d = 1; d < per; ++d) table_[i * per + d] = table_[i * per + d - 1] * step % p;
      // step^(2^w) for the next window
      mpz_class next = table_[i * per + per - 1] * step % p;
      step = next;
    }
  }

  std::size_t exp_bits() const { return windows_ * width_; }

  mpz_class pow(const mpz_class& e) const {
    std::size_t per = std::size_t{1} << width_;
    mpz_class r = 1;
    for (std::size_t i = 0; i < windows_; ++i) {
      unsigned d = 0;
      for (unsigned b = 0; b < width_; ++b)
        d |= static_cast<unsigned>(mpz_tstbit(e.get_mpz_t(), i * width_ + b)) << b;
      r *= table_[i * per + d];
      r %= p_;
    }
    return r;
  }

 private:
  mpz_class p_;
  unsigned width_;
  std::size_t windows_ = 0;
  std::vector<mpz_class> table_;
};

inline bool is_probable_prime(const mpz_class& n) {
  // 40 Miller-Rabin rounds: error <= 4^-40 = 2^-80.
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

inline mpz_class powm(const mpz_class& b, const mpz_class& e, const mpz_class& m) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  return r;
}

// Expand a tag into an integer of roughly `bits + 64` bits, then reduce mod p.
inline mpz_class hash_to_residue(std::string_view tag, std::uint32_t counter, const mpz_class& p) {
  std::size_t want = (mpz_sizeinbase(p.get_mpz_t(), 2) + 64 + 7) / 8;
  Bytes buf;
  for (std::uint32_t block = 0; buf.size() < want; ++block) {
    auto d = Sha256().update("rcbdc/h2g/v1").update(tag).u32(counter).u32(block).final();
    buf.insert(buf.end(), d.begin(), d.end());
  }
  buf.resize(want);
  mpz_class x = read_fixed(buf);
  return x % p;
}

}  // namespace detail

// Public parameters plus cached fixed-base tables for g and h. Copies share
// the tables. All member functions are const and thread-safe.
class Group {
 public:
  explicit Group(GroupParams params) : params_(std::move(params)) {
    enforce(params_.q > 1 && params_.p > params_.q, Errc::invalid_argument, "bad group sizes");
    enforce((params_.p - 1) % params_.q == 0, Errc::invalid_argument, "q does not divide p-1");
    cofactor_ = (params_.p - 1) / params_.q;
    element_width_ = byte_width(params_.p);
    scalar_width_ = byte_width(params_.q);
    q_bits_ = mpz_sizeinbase(params_.q.get_mpz_t(), 2);
    g_tab_ = std::make_shared<detail::FixedBaseTable>(params_.g, params_.p, q_bits_);
    h_tab_ = std::make_shared<detail::FixedBaseTable>(params_.h, params_.p, q_bits_);
    digest_ = sha256(encode_params_body());
  }

  const GroupParams& params() const { return params_; }
  const mpz_class& p() const { return params_.p; }
  const mpz_class& q() const { return params_.q; }
  std::size_t q_bits() const { return q_bits_; }
  std::size_t element_width() const { return element_width_; }
  std::size_t scalar_width() const { return scalar_width_; }
  // SHA-256 of the canonical parameter record (without the trailing digest).
  const Digest& digest() const { return digest_; }

  GroupElement g() const { return GroupElement(params_.g); }
  GroupElement h() const { return GroupElement(params_.h); }
  GroupElement identity() const { return GroupElement(mpz_class(1)); }

  // ---- scalars ----
  Scalar scalar(const mpz_class& v) const {
    mpz_class r = v % params_.q;
    if (r < 0) r += params_.q;
    return Scalar(std::move(r));
  }
  Scalar scalar(long v) const { return scalar(mpz_class(v)); }
  Scalar scalar_from_digest(const Digest& d) const { return scalar(read_fixed(d)); }
  Scalar add(const Scalar& a, const Scalar& b) const { return scalar(a.v_ + b.v_); }
  Scalar sub(const Scalar& a, const Scalar& b) const { return scalar(a.v_ - b.v_); }
  Scalar mul(const Scalar& a, const Scalar& b) const { return scalar(a.v_ * b.v_); }
  Scalar neg(const Scalar& a) const { return scalar(-a.v_); }
  Scalar inverse(const Scalar& a) const {
    enforce(!a.is_zero(), Errc::not_invertible, "zero scalar has no inverse");
    mpz_class r;
    mpz_invert(r.get_mpz_t(), a.v_.get_mpz_t(), params_.q.get_mpz_t());
    return Scalar(std::move(r));
  }
  // Uniform in [1, q).
  Scalar random_scalar(Rng& rng) const { return Scalar(rng.below(mpz_class(params_.q - 1)) + 1); }
  // Uniform in [0, q).
  Scalar random_scalar_with_zero(Rng& rng) const { return Scalar(rng.below(params_.q)); }

  // ---- elements ----
  bool is_member(const mpz_class& v) const {
    if (v <= 0 || v >= params_.p) return false;
    return detail::powm(v, params_.q, params_.p) == 1;
  }
  GroupElement element(const mpz_class& v) const {
    enforce(is_member(v), Errc::not_in_subgroup, "value is not in the order-q subgroup");
    return GroupElement(v);
  }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const {
    return GroupElement(a.v_ * b.v_ % params_.p);
  }
  GroupElement inv(const GroupElement& a) const {
    mpz_class r;
    enforce(mpz_invert(r.get_mpz_t(), a.v_.get_mpz_t(), params_.p.get_mpz_t()) != 0,
            Errc::not_invertible, "element has no inverse");
    return GroupElement(std::move(r));
  }
  GroupElement div(const GroupElement& a, const GroupElement& b) const { return mul(a, inv(b)); }
  GroupElement pow(const GroupElement& base, const Scalar& e) const {
    if (base.v_ == params_.g) return pow_g(e);
    if (base.v_ == params_.h) return pow_h(e);
    if (e.is_zero()) return identity();
    mpz_class r;
    mpz_powm_sec(r.get_mpz_t(), base.v_.get_mpz_t(), e.v_.get_mpz_t(), params_.p.get_mpz_t());
    return GroupElement(std::move(r));
  }
  GroupElement pow_g(const Scalar& e) const { return GroupElement(g_tab_->pow(e.v_)); }
  GroupElement pow_h(const Scalar& e) const { return GroupElement(h_tab_->pow(e.v_)); }
  // g^a * h^b
  GroupElement pow_gh(const Scalar& a, const Scalar& b) const {
    return GroupElement(g_tab_->pow(a.v_) * h_tab_->pow(b.v_) % params_.p);
  }

  // ---- encodings ----
  void write(ByteWriter& w, const GroupElement& e) const { w.fixed(e.v_, element_width_); }
  void write(ByteWriter& w, const Scalar& s) const { w.fixed(s.v_, scalar_width_); }
  void write(Sha256& h, const GroupElement& e) const {
    Bytes b;
    write_fixed(b, e.v_, element_width_);
    h.update(ByteView(b));
  }
  void write(Sha256& h, const Scalar& s) const {
    Bytes b;
    write_fixed(b, s.v_, scalar_width_);
    h.update(ByteView(b));
  }
  Bytes encode(const GroupElement& e) const {
    Bytes b;
    write_fixed(b, e.v_, element_width_);
    return b;
  }
  GroupElement read_element(ByteReader& r) const {
    mpz_class v = r.fixed(element_width_);
    enforce(is_member(v), r.error_code(), "encoded value is not a subgroup element");
    return GroupElement(std::move(v));
  }
  Scalar read_scalar(ByteReader& r) const {
    mpz_class v = r.fixed(scalar_width_);
    enforce(v < params_.q, r.error_code(), "encoded scalar is not reduced");
    return Scalar(std::move(v));
  }

  // Parameter record body: magic, version, profile, h origin, width, p, q, g, h.
  Bytes encode_params_body() const {
    ByteWriter w;
    w.raw(as_bytes("RCBP")).u8(1).u8(static_cast<std::uint8_t>(params_.profile))
        .u8(static_cast<std::uint8_t>(params_.h_origin)).u16(static_cast<std::uint16_t>(element_width_));
    for (const auto* v : {&params_.p, &params_.q, &params_.g, &params_.h}) w.fixed(*v, element_width_);
    return std::move(w).take();
  }

  const mpz_class& cofactor() const { return cofactor_; }

 private:
  GroupParams params_;
  mpz_class cofactor_;
  std::size_t element_width_ = 0, scalar_width_ = 0, q_bits_ = 0;
  std::shared_ptr<const detail::FixedBaseTable> g_tab_, h_tab_;
  Digest digest_{};
};

// ---- free-function arithmetic ----

inline GroupElement mod_exp(const Group& grp, const GroupElement& base, const Scalar& e) {
  return grp.pow(base, e);
}
inline GroupElement mod_mul(const Group& grp, const GroupElement& a, const GroupElement& b) {
  return grp.mul(a, b);
}
inline GroupElement mod_inv(const Group& grp, const GroupElement& a) { return grp.inv(a); }
inline Scalar random_scalar(const Group& grp, Rng& rng) { return grp.random_scalar(rng); }

// Full invariant check: primality, divisibility, generator orders.
inline bool validate_params(const GroupParams& gp) {
  if (gp.q < 2 || gp.p <= gp.q) return false;
  if ((gp.p - 1) % gp.q != 0) return false;
  if (!detail::is_probable_prime(gp.p) || !detail::is_probable_prime(gp.q)) return false;
  for (const auto* x : {&gp.g, &gp.h}) {
    if (*x <= 1 || *x >= gp.p) return false;
    if (detail::powm(*x, gp.q, gp.p) != 1) return false;
  }
  return true;
}

namespace detail {

inline mpz_class lift_to_subgroup(const mpz_class& candidate, const mpz_class& p, const mpz_class& q) {
  return powm(candidate, (p - 1) / q, p);
}

}  // namespace detail

// h = Hash(tag)^((p-1)/q) mod p, re-hashing with a counter while h is 1 or g.
inline GroupElement derive_h(const GroupParams& without_h, std::string_view domain_tag) {
  const auto& p = without_h.p;
  const auto& q = without_h.q;
  for (std::uint32_t counter = 0; counter < 1024; ++counter) {
    mpz_class x = detail::hash_to_residue(domain_tag, counter, p);
    if (x == 0) continue;
    mpz_class h = detail::lift_to_subgroup(x, p, q);
    if (h == 1 || h == without_h.g) continue;
    GroupParams full = without_h;
    full.h = h;
    full.h_origin = HOrigin::hashed;
    return Group(full).h();
  }
  fail(Errc::generation_failure, "derive_h exhausted its retry budget");
}

inline constexpr std::string_view kDefaultHTag = "rcbdc/pedersen-h/v1";

// Smallest q size accepted; below this no challenge space is worth testing.
inline constexpr std::size_t kMinQBits = 8;

inline std::size_t q_bits_for(std::size_t p_bits) { return p_bits >= 512 ? 256 : p_bits / 2; }

// Deterministic Schnorr-group generation from (p_bits, seed).
inline GroupParams generate_group_params(std::size_t p_bits, ByteView seed, Profile profile = Profile::custom) {
  enforce(!seed.empty(), Errc::invalid_argument, "seed must be nonempty");
  std::size_t q_bits = q_bits_for(p_bits);
  if (q_bits < kMinQBits)
    fail(Errc::generation_failure, "p_bits=" + std::to_string(p_bits) + " leaves no room for a " +
                                       std::to_string(kMinQBits) + "-bit subgroup order");

  ByteWriter sw;
  sw.raw(as_bytes("rcbdc/params/v1")).u32(static_cast<std::uint32_t>(p_bits)).raw(seed);
  Rng rng(ByteView(sw.bytes()));

  const mpz_class q_lo = mpz_class(1) << (q_bits - 1);
  const mpz_class p_lo = mpz_class(1) << (p_bits - 1);
  const mpz_class p_hi = mpz_class(1) << p_bits;
  const std::size_t q_attempts = 64;
  const std::size_t p_attempts = 40 * p_bits;

  for (std::size_t qa = 0; qa < q_attempts; ++qa) {
    mpz_class q = q_lo + rng.below(q_lo);
    mpz_nextprime(q.get_mpz_t(), q.get_mpz_t());
    if (mpz_sizeinbase(q.get_mpz_t(), 2) != q_bits || !detail::is_probable_prime(q)) continue;

    // p = q*m + 1 with m even, m drawn so p lands in [2^(p_bits-1), 2^p_bits).
    mpz_class m_lo = (p_lo + q - 1) / q;
    mpz_class m_hi = (p_hi - 1) / q;
    if (m_hi <= m_lo) continue;
    for (std::size_t pa = 0; pa < p_attempts; ++pa) {
      mpz_class m = m_lo + rng.below(mpz_class(m_hi - m_lo));
      if (m % 2 != 0) m += 1;
      mpz_class p = q * m + 1;
      if (p < p_lo || p >= p_hi) continue;
      if (!detail::is_probable_prime(p)) continue;

      GroupParams gp;
      gp.p = p;
      gp.q = q;
      gp.profile = profile;
      for (unsigned long c = 2;; ++c) {
        mpz_class g = detail::lift_to_subgroup(mpz_class(c), p, q);
        if (g != 1) {
          gp.g = g;
          break;
        }
      }
      gp.h = derive_h(gp, kDefaultHTag).value();
      gp.h_origin = HOrigin::hashed;
      return gp;
    }
  }
  fail(Errc::generation_failure,
       "no (p, q) pair found for p_bits=" + std::to_string(p_bits) + " within the retry budget");
}

inline GroupParams generate_group_params(std::size_t p_bits, std::string_view seed,
                                         Profile profile = Profile::custom) {
  return generate_group_params(p_bits, as_bytes(seed), profile);
}

// Ceremony mode: h = g^a with the trapdoor a returned to the caller.
struct CeremonyParams {
  GroupParams params;
  mpz_class trapdoor;
};

inline CeremonyParams ceremony_params(GroupParams without_h, Rng& rng) {
  mpz_class a = rng.below(mpz_class(without_h.q - 1)) + 1;
  without_h.h = detail::powm(without_h.g, a, without_h.p);
  without_h.h_origin = HOrigin::ceremony;
  return {std::move(without_h), a};
}

// p = 23, q = 11, g = 2, h = 8 = g^3. Small enough to check by hand; the
// trapdoor is public, so binding does not hold here.
inline GroupParams toy_params() {
  GroupParams gp;
  gp.p = 23;
  gp.q = 11;
  gp.g = 2;
  gp.h = 8;
  gp.profile = Profile::toy;
  gp.h_origin = HOrigin::ceremony;
  return gp;
}
inline constexpr unsigned long kToyTrapdoor = 3;

inline constexpr std::string_view kTestProfileSeed = "rcbdc-test-profile";
inline constexpr std::string_view kProdProfileSeed = "rcbdc-prod-profile";

inline GroupParams test_profile_params() {
  return generate_group_params(64, kTestProfileSeed, Profile::test);
}
inline GroupParams prod_profile_params() {
  return generate_group_params(2048, kProdProfileSeed, Profile::prod);
}

inline GroupParams params_for_profile(std::string_view name) {
  if (name == "toy") return toy_params();
  if (name == "test") return test_profile_params();
  if (name == "prod") return prod_profile_params();
  fail(Errc::invalid_argument, "unknown profile '" + std::string(name) + "'");
}

// ---- parameter file: body followed by a 32-byte SHA-256 of the body ----

inline Bytes encode_params_file(const Group& grp) {
  Bytes out = grp.encode_params_body();
  auto d = sha256(out);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

inline GroupParams decode_params_file(ByteView in) {
  enforce(in.size() > 32, Errc::corrupt_params, "parameter file too short");
  auto body = in.first(in.size() - 32);
  Digest stored{};
  std::copy(in.end() - 32, in.end(), stored.begin());
  enforce(sha256(body) == stored, Errc::corrupt_params, "parameter digest mismatch");
  ByteReader r(body, Errc::corrupt_params);
  auto magic = r.raw(4);
  enforce(std::string(magic.begin(), magic.end()) == "RCBP", Errc::corrupt_params, "bad magic");
  enforce(r.u8() == 1, Errc::version_mismatch, "unsupported parameter file version");
  GroupParams gp;
  std::uint8_t profile = r.u8(), origin = r.u8();
  enforce(profile <= 3 && origin <= 1, Errc::corrupt_params, "unknown profile or h origin");
  gp.profile = static_cast<Profile>(profile);
  gp.h_origin = static_cast<HOrigin>(origin);
  std::size_t width = r.u16();
  gp.p = r.fixed(width);
  gp.q = r.fixed(width);
  gp.g = r.fixed(width);
  gp.h = r.fixed(width);
  r.expect_done();
  enforce(byte_width(gp.p) == width, Errc::corrupt_params, "width does not match p");
  enforce(validate_params(gp), Errc::corrupt_params, "parameters fail validation");
  return gp;
}

}  // namespace rcbdc
