#pragma once

#include <stdexcept>
#include <string>

namespace amalgam {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct precondition_error : error { using error::error; };
struct non_finite_sample : error { using error::error; };
struct under_resolved : error { using error::error; };
struct wrap_risk : error { using error::error; };
struct no_complement : error { using error::error; };
struct cover_gap : error { using error::error; };
struct degenerate_weight : error { using error::error; };
struct degenerate_atom : error { using error::error; };
struct construction_violation : error { using error::error; };
struct spec_mismatch : error { using error::error; };
struct usage_error : error { using error::error; };
struct fixture_missing : error { using error::error; };
struct stale_fixture : error { using error::error; };

inline void require(bool cond, const std::string& what) {
  if (!cond) throw precondition_error(what);
}

}  // namespace amalgam
