#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecsap/bytes.hpp"

namespace ecsap::testkit {

struct KatVector {
  int count = -1;
  Bytes seed;
  Bytes pk;
  Bytes sk;
  Bytes ct;
  Bytes ss;
};

/// Parses a NIST-style .rsp file ("key = HEX" lines, blank-line separated).
std::vector<KatVector> read_kat_file(const std::string& path);

/// Absolute path of a file under tests/data.
std::string data_path(const std::string& name);

}  // namespace ecsap::testkit
