#include "ecsap/kem_engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>

#include "ecsap/errors.hpp"
#include "ecsap/lattice_math.hpp"

extern "C" {
#include "kyber1024/clean/api.h"
#include "kyber512/clean/api.h"
#include "kyber768/clean/api.h"
}

namespace ecsap::kem {

namespace {

struct Backend {
  ParameterSet ps;
  std::string_view name;
  int k;
  Sizes sizes;
  int (*keypair)(std::uint8_t*, std::uint8_t*);
  int (*enc)(std::uint8_t*, std::uint8_t*, const std::uint8_t*);
  int (*dec)(std::uint8_t*, const std::uint8_t*, const std::uint8_t*);
};

const Backend kBackends[] = {
    {ParameterSet::kyber512, "kyber512", 2,
     {PQCLEAN_KYBER512_CLEAN_CRYPTO_PUBLICKEYBYTES, PQCLEAN_KYBER512_CLEAN_CRYPTO_SECRETKEYBYTES,
      PQCLEAN_KYBER512_CLEAN_CRYPTO_CIPHERTEXTBYTES, PQCLEAN_KYBER512_CLEAN_CRYPTO_BYTES},
     PQCLEAN_KYBER512_CLEAN_crypto_kem_keypair, PQCLEAN_KYBER512_CLEAN_crypto_kem_enc,
     PQCLEAN_KYBER512_CLEAN_crypto_kem_dec},
    {ParameterSet::kyber768, "kyber768", 3,
     {PQCLEAN_KYBER768_CLEAN_CRYPTO_PUBLICKEYBYTES, PQCLEAN_KYBER768_CLEAN_CRYPTO_SECRETKEYBYTES,
      PQCLEAN_KYBER768_CLEAN_CRYPTO_CIPHERTEXTBYTES, PQCLEAN_KYBER768_CLEAN_CRYPTO_BYTES},
     PQCLEAN_KYBER768_CLEAN_crypto_kem_keypair, PQCLEAN_KYBER768_CLEAN_crypto_kem_enc,
     PQCLEAN_KYBER768_CLEAN_crypto_kem_dec},
    {ParameterSet::kyber1024, "kyber1024", 4,
     {PQCLEAN_KYBER1024_CLEAN_CRYPTO_PUBLICKEYBYTES, PQCLEAN_KYBER1024_CLEAN_CRYPTO_SECRETKEYBYTES,
      PQCLEAN_KYBER1024_CLEAN_CRYPTO_CIPHERTEXTBYTES, PQCLEAN_KYBER1024_CLEAN_CRYPTO_BYTES},
     PQCLEAN_KYBER1024_CLEAN_crypto_kem_keypair, PQCLEAN_KYBER1024_CLEAN_crypto_kem_enc,
     PQCLEAN_KYBER1024_CLEAN_crypto_kem_dec},
};

const Backend& backend(ParameterSet ps) {
  for (const auto& b : kBackends) {
    if (b.ps == ps) return b;
  }
  throw Error(Errc::invalid_parameter, "unknown KEM parameter set");
}

// Size of the packed polynomial vector that precedes the seed in a public key.
std::size_t polyvec_bytes(const Backend& b) { return static_cast<std::size_t>(b.k) * 384; }

// The reference code pulls randomness through a global randombytes() hook.
// Each call into it installs the caller's source for the current thread and
// defers any exception until control is back in C++.
struct RandomnessScope {
  EntropySource* source = nullptr;
  std::exception_ptr failure;
};

thread_local RandomnessScope* t_scope = nullptr;

class ScopedSource {
 public:
  explicit ScopedSource(EntropySource& src) : previous_(t_scope) {
    scope_.source = &src;
    t_scope = &scope_;
  }
  ~ScopedSource() { t_scope = previous_; }
  ScopedSource(const ScopedSource&) = delete;
  ScopedSource& operator=(const ScopedSource&) = delete;

  void rethrow_as(Errc code) const {
    if (!scope_.failure) return;
    try {
      std::rethrow_exception(scope_.failure);
    } catch (const std::exception& e) {
      throw Error(code, e.what());
    }
  }

 private:
  RandomnessScope scope_;
  RandomnessScope* previous_;
};

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(Errc::wrong_length, std::string(what) + " must be " + std::to_string(want) +
                                        " bytes, got " + std::to_string(got));
  }
}

}  // namespace

Sizes sizes(ParameterSet ps) { return backend(ps).sizes; }

std::string_view name(ParameterSet ps) { return backend(ps).name; }

std::optional<ParameterSet> parse_parameter_set(std::string_view text) {
  for (const auto& b : kBackends) {
    if (b.name == text) return b.ps;
  }
  return std::nullopt;
}

std::optional<ParameterSet> parameter_set_for_public_key(std::size_t length) {
  for (const auto& b : kBackends) {
    if (b.sizes.public_key == length) return b.ps;
  }
  return std::nullopt;
}

std::optional<ParameterSet> parameter_set_for_ciphertext(std::size_t length) {
  for (const auto& b : kBackends) {
    if (b.sizes.ciphertext == length) return b.ps;
  }
  return std::nullopt;
}

PublicKey::PublicKey(ParameterSet ps, Bytes bytes) : ps_(ps), bytes_(std::move(bytes)) {
  check_length(bytes_.size(), sizes(ps).public_key, "KEM public key");
}

SecretKey::SecretKey(ParameterSet ps, Bytes bytes) : ps_(ps), bytes_(std::move(bytes)) {
  check_length(bytes_.size(), sizes(ps).secret_key, "KEM secret key");
}

SecretKey::~SecretKey() { secure_zero(bytes_); }

PublicKey SecretKey::public_key() const {
  const auto& b = backend(ps_);
  const auto begin = bytes_.begin() + static_cast<std::ptrdiff_t>(polyvec_bytes(b));
  return PublicKey(ps_, Bytes(begin, begin + static_cast<std::ptrdiff_t>(b.sizes.public_key)));
}

Ciphertext::Ciphertext(ParameterSet ps, Bytes bytes) : ps_(ps), bytes_(std::move(bytes)) {
  check_length(bytes_.size(), sizes(ps).ciphertext, "KEM ciphertext");
}

KeyPair keygen(EntropySource& rng, ParameterSet ps) {
  const auto& b = backend(ps);
  Bytes pk(b.sizes.public_key);
  Bytes sk(b.sizes.secret_key);
  {
    ScopedSource scope(rng);
    if (b.keypair(pk.data(), sk.data()) != 0) {
      throw Error(Errc::keygen_failure, "reference keypair returned an error");
    }
    scope.rethrow_as(Errc::keygen_failure);
  }
  KeyPair out{PublicKey(ps, std::move(pk)), SecretKey(ps, sk)};
  secure_zero(sk);
  return out;
}

bool is_well_formed(const PublicKey& pk) {
  const ByteView packed(pk.bytes().data(), polyvec_bytes(backend(pk.parameter_set())));
  const auto coeffs = lattice::unpack_12bit(packed);
  return std::all_of(coeffs.begin(), coeffs.end(),
                     [](std::uint16_t c) { return c < lattice::kKyberQ; });
}

Encapsulation encaps(const PublicKey& pk, EntropySource& rng) {
  const auto& b = backend(pk.parameter_set());
  if (!is_well_formed(pk)) {
    throw Error(Errc::encapsulation_failure, "public key coefficient not reduced mod q");
  }
  Bytes ct(b.sizes.ciphertext);
  std::array<std::uint8_t, 32> ss{};
  {
    ScopedSource scope(rng);
    if (b.enc(ct.data(), ss.data(), pk.bytes().data()) != 0) {
      throw Error(Errc::encapsulation_failure, "reference encapsulation returned an error");
    }
    scope.rethrow_as(Errc::encapsulation_failure);
  }
  Encapsulation out{Ciphertext(pk.parameter_set(), std::move(ct)), SharedSecret(ss)};
  secure_zero(ss);
  return out;
}

SharedSecret decaps(const SecretKey& sk, const Ciphertext& ct) {
  if (sk.parameter_set() != ct.parameter_set()) {
    throw Error(Errc::format_error, "ciphertext and secret key use different parameter sets");
  }
  return decaps(sk, ByteView(ct.bytes()));
}

SharedSecret decaps(const SecretKey& sk, ByteView ct) {
  const auto& b = backend(sk.parameter_set());
  if (ct.size() != b.sizes.ciphertext) {
    throw Error(Errc::format_error, "ciphertext must be " + std::to_string(b.sizes.ciphertext) +
                                        " bytes, got " + std::to_string(ct.size()));
  }
  std::array<std::uint8_t, 32> ss{};
  b.dec(ss.data(), ct.data(), sk.bytes().data());
  SharedSecret out(ss);
  secure_zero(ss);
  return out;
}

}  // namespace ecsap::kem

// Randomness hook required by the reference Kyber sources.
extern "C" int PQCLEAN_randombytes(std::uint8_t* output, std::size_t n) {
  using ecsap::kem::t_scope;
  try {
    if (t_scope == nullptr) {
      ecsap::system_entropy().fill({output, n});
      return 0;
    }
    if (t_scope->failure) {
      ecsap::secure_zero({output, n});
      return -1;
    }
    t_scope->source->fill({output, n});
    return 0;
  } catch (...) {
    // Without a scope there is nowhere to report the failure; continuing
    // with zeroed randomness would be worse than stopping.
    if (t_scope == nullptr) std::abort();
    t_scope->failure = std::current_exception();
    ecsap::secure_zero({output, n});
    return -1;
  }
}
