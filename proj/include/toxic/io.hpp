#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "toxic/pipeline.hpp"

namespace toxic {

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint32_t kCorpusFormatVersion = 1;

// Single-file model container; layout documented in docs/file_formats.md.
void save_model(const TextModel& model, std::ostream& out);
void save_model(const TextModel& model, const std::filesystem::path& path);
TextModel load_model(std::istream& in);
TextModel load_model(const std::filesystem::path& path);

void save_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace toxic
