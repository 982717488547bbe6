#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

namespace gmc {

/// Content hash of a file, rendered as "fnv1a64:<16 hex digits>".
/// Throws std::invalid_argument when the file cannot be read.
std::string file_fingerprint(const std::string& path);

/// Reproducibility record emitted by every CLI run: which subcommand ran,
/// with which resolved configuration and seed, against which exact inputs
/// (by content hash), under which tool version. Two runs with equal
/// manifests see identical inputs and settings, so their primary outputs
/// are byte-identical.
struct RunManifest {
    std::string subcommand;
    std::string version;
    std::uint64_t seed = 0;
    nlohmann::json config; // resolved settings; null when the subcommand has none
    std::map<std::string, std::string> inputs; // path -> fingerprint

    void add_input(const std::string& path);

    nlohmann::json to_json() const;

    /// Writes the manifest as a single JSON line (used on stderr).
    void emit(std::ostream& os) const;

    /// Writes <dir>/manifest.json (pretty-printed) for runs that own an
    /// output directory.
    void write_file(const std::string& dir) const;
};

} // namespace gmc
