#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmc/corpus.hpp"

namespace gmc {

/// Small balanced corpus for end-to-end training checks: 24 videos with 3
/// captions each, built from templated sentences over a compact vocabulary so
/// information scores spread over a healthy range.
std::vector<VideoEntry> make_toy_entries(std::uint64_t seed);

/// Long-tail corpus for bias measurements: 250 videos with 4 captions each
/// (1000 captions). Head videos repeat one template sentence verbatim, the
/// middle band mutates one caption, tail videos are heavily mutated with
/// per-caption rare tokens, producing a Zipf-like bucket-frequency shape.
std::vector<VideoEntry> make_zipf_entries(std::uint64_t seed);

void write_entries_jsonl(const std::vector<VideoEntry>& entries, const std::string& path);

void write_toy_corpus(const std::string& path, std::uint64_t seed);
void write_zipf_corpus(const std::string& path, std::uint64_t seed);

} // namespace gmc
