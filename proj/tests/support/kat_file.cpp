#include "kat_file.hpp"

#include <fstream>
#include <stdexcept>

namespace ecsap::testkit {

std::vector<KatVector> read_kat_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<KatVector> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "count") {
      out.emplace_back().count = std::stoi(value);
      continue;
    }
    if (out.empty()) throw std::runtime_error("field before count in " + path);
    auto& v = out.back();
    if (key == "seed") v.seed = from_hex(value);
    else if (key == "pk") v.pk = from_hex(value);
    else if (key == "sk") v.sk = from_hex(value);
    else if (key == "ct") v.ct = from_hex(value);
    else if (key == "ss") v.ss = from_hex(value);
  }
  return out;
}

std::string data_path(const std::string& name) { return std::string(ECSAP_TEST_DATA_DIR) + "/" + name; }

}  // namespace ecsap::testkit
