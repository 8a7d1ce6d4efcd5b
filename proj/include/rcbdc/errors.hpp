#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rcbdc {

enum class Errc {
  generation_failure,
  invalid_argument,
  not_invertible,
  not_in_subgroup,
  value_out_of_range,
  unbalanced_amounts,
  empty_leaves,
  index_out_of_range,
  corrupt_snapshot,
  corrupt_params,
  malformed_frame,
  version_mismatch,
  invalid_probability,
  empty_batch,
  unknown_payer,
  unauthorized,
  unknown_pubkey,
  duplicate_pubkey,
  decrypt_failed,
  io_error,
  script_error,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::generation_failure: return "generation-failure";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::not_invertible: return "not-invertible";
    case Errc::not_in_subgroup: return "not-in-subgroup";
    case Errc::value_out_of_range: return "value-out-of-range";
    case Errc::unbalanced_amounts: return "unbalanced-amounts";
    case Errc::empty_leaves: return "empty-leaves";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::corrupt_snapshot: return "corrupt-snapshot";
    case Errc::corrupt_params: return "corrupt-params";
    case Errc::malformed_frame: return "malformed-frame";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::invalid_probability: return "invalid-probability";
    case Errc::empty_batch: return "empty-batch";
    case Errc::unknown_payer: return "unknown-payer";
    case Errc::unauthorized: return "unauthorized";
    case Errc::unknown_pubkey: return "unknown-pubkey";
    case Errc::duplicate_pubkey: return "duplicate-pubkey";
    case Errc::decrypt_failed: return "decrypt-failed";
    case Errc::io_error: return "io-error";
    case Errc::script_error: return "script-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void enforce(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace rcbdc
