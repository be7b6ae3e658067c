#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace synspace {

/// Synonyms and visual descriptors for one class.
struct ClassLexicon {
  std::string class_name;
  std::string dataset_name;
  std::vector<std::string> synonyms;
  std::vector<std::string> descriptors;

  friend bool operator==(const ClassLexicon&, const ClassLexicon&) = default;
};

struct SynonymousTexts {
  int class_id = 0;
  std::vector<std::string> texts;
};

std::string render_synonym_prompt(std::string_view class_name, std::string_view dataset_name);
std::string render_descriptor_prompt(std::string_view class_name);

/// Trims entries, drops blanks and trailing periods, removes case-insensitive
/// duplicates (first occurrence wins) and puts the class name first among the
/// synonyms when it is missing.
ClassLexicon make_lexicon(std::string class_name, std::string dataset_name, std::vector<std::string> synonyms,
                          std::vector<std::string> descriptors);

/// "which is a large flower" / "which has yellow petals".
std::string descriptor_clause(std::string_view descriptor);

/// Synonym-major Cartesian product of synonyms and descriptors rendered as
/// "A photo of a {synonym}, {clause}.", or "A photo of a {synonym}." when the
/// lexicon has no descriptors.
SynonymousTexts combine(const ClassLexicon& lexicon, int class_id = 0);

/// Splits a raw LLM answer into candidate phrases: one per line when the
/// answer has several lines, otherwise comma-separated. List bullets and
/// numbering are stripped.
std::vector<std::string> parse_candidates(std::string_view response);

// Lexicon cache: JSON object mapping class name to
// {"synonyms": [...], "descriptors": [...], "dataset": "..."(optional)}.
// Class ids follow document order.
std::vector<ClassLexicon> load_lexicon_cache(const std::filesystem::path& path);
std::vector<ClassLexicon> parse_lexicon_cache(std::string_view json_text);
std::string dump_lexicon_cache(const std::vector<ClassLexicon>& lexicons);
void save_lexicon_cache(const std::vector<ClassLexicon>& lexicons, const std::filesystem::path& path);

}  // namespace synspace
