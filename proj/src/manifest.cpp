#include "gmc/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gmc/rng.hpp"
#include "gmc/version.hpp"

namespace gmc {

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string("fnv1a64:") + hex;
}

void RunManifest::add_input(const std::string& path) {
    inputs[path] = file_fingerprint(path);
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{{"subcommand", subcommand},
                          {"version", version.empty() ? std::string(kVersion) : version},
                          {"seed", seed},
                          {"config", config},
                          {"inputs", inputs}};
}

void RunManifest::emit(std::ostream& os) const { os << to_json().dump() << '\n'; }

void RunManifest::write_file(const std::string& dir) const {
    const std::string path = dir + "/manifest.json";
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write manifest to '" + path + "'");
    out << to_json().dump(2) << '\n';
}

} // namespace gmc
