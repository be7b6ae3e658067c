#include "synspace/textgen.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <json.hpp>

#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"

namespace synspace {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.size() > word.size() && lower(s.substr(0, word.size())) == word && s[word.size()] == ' ';
}

void require_nonblank(std::string_view s, const char* field) {
  if (trim(s).empty()) throw Error(ErrorCode::EmptyField, std::string(field) + " is empty");
}

std::vector<std::string> clean_list(std::vector<std::string> items, bool strip_period) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& item : items) {
    std::string t = trim(item);
    if (strip_period) {
      while (!t.empty() && t.back() == '.') t.pop_back();
      t = trim(t);
    }
    if (t.empty()) continue;
    if (seen.insert(lower(t)).second) out.push_back(std::move(t));
  }
  return out;
}

std::string strip_bullet(std::string_view line) {
  std::string t = trim(line);
  std::size_t i = 0;
  if (!t.empty() && (t[0] == '-' || t[0] == '*' || t[0] == '+')) {
    i = 1;
  } else {
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
      ++i;
    } else {
      i = 0;
    }
  }
  return trim(std::string_view(t).substr(i));
}

}  // namespace

std::string render_synonym_prompt(std::string_view class_name, std::string_view dataset_name) {
  require_nonblank(class_name, "class name");
  require_nonblank(dataset_name, "dataset name");
  std::string out = "Tell me in five words or less what are some common ways of referring to ";
  out += class_name;
  out += " in ";
  out += dataset_name;
  out += "?";
  return out;
}

std::string render_descriptor_prompt(std::string_view class_name) {
  require_nonblank(class_name, "class name");
  std::string out = "What are useful features for distinguishing a ";
  out += class_name;
  out += " in a photo?";
  return out;
}

ClassLexicon make_lexicon(std::string class_name, std::string dataset_name, std::vector<std::string> synonyms,
                          std::vector<std::string> descriptors) {
  ClassLexicon lex;
  lex.class_name = trim(class_name);
  if (lex.class_name.empty()) throw Error(ErrorCode::EmptyField, "class name is empty");
  lex.dataset_name = trim(dataset_name);
  synonyms.insert(synonyms.begin(), lex.class_name);
  lex.synonyms = clean_list(std::move(synonyms), false);
  lex.descriptors = clean_list(std::move(descriptors), true);
  return lex;
}

std::string descriptor_clause(std::string_view descriptor) {
  const std::string d = trim(descriptor);
  if (starts_with_word(d, "is") || starts_with_word(d, "has") || starts_with_word(d, "have")) return "which " + d;
  if (starts_with_word(d, "a") || starts_with_word(d, "an") || starts_with_word(d, "the")) return "which is " + d;
  const char first = d.empty() ? 'x' : static_cast<char>(std::tolower(static_cast<unsigned char>(d[0])));
  const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
  return std::string("which is ") + (vowel ? "an " : "a ") + d;
}

SynonymousTexts combine(const ClassLexicon& lexicon, int class_id) {
  if (lexicon.synonyms.empty()) throw Error(ErrorCode::EmptyField, "lexicon has no synonyms");
  SynonymousTexts out;
  out.class_id = class_id;
  out.texts.reserve(lexicon.synonyms.size() * std::max<std::size_t>(1, lexicon.descriptors.size()));
  for (const auto& syn : lexicon.synonyms) {
    require_nonblank(syn, "synonym");
    if (lexicon.descriptors.empty()) {
      out.texts.push_back("A photo of a " + syn + ".");
      continue;
    }
    for (const auto& desc : lexicon.descriptors) {
      require_nonblank(desc, "descriptor");
      out.texts.push_back("A photo of a " + syn + ", " + descriptor_clause(desc) + ".");
    }
  }
  return out;
}

std::vector<std::string> parse_candidates(std::string_view response) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= response.size()) {
    const auto nl = response.find('\n', start);
    const auto piece = response.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!trim(piece).empty()) lines.push_back(std::string(piece));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  std::vector<std::string> raw;
  if (lines.size() == 1) {
    std::string_view only = lines.front();
    std::size_t s = 0;
    while (s <= only.size()) {
      const auto comma = only.find(',', s);
      raw.push_back(strip_bullet(only.substr(s, comma == std::string_view::npos ? std::string_view::npos : comma - s)));
      if (comma == std::string_view::npos) break;
      s = comma + 1;
    }
  } else {
    for (const auto& l : lines) raw.push_back(strip_bullet(l));
  }
  return clean_list(std::move(raw), true);
}

std::vector<ClassLexicon> parse_lexicon_cache(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("lexicon cache: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "lexicon cache must be a JSON object");
  std::vector<ClassLexicon> out;
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object()) throw Error(ErrorCode::ParseError, "entry for '" + name + "' is not an object");
    for (const auto& [key, _] : entry.items()) {
      if (key != "synonyms" && key != "descriptors" && key != "dataset") {
        throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in entry for '" + name + "'");
      }
    }
    try {
      out.push_back(make_lexicon(name, entry.value("dataset", std::string()),
                                 entry.value("synonyms", std::vector<std::string>{}),
                                 entry.value("descriptors", std::vector<std::string>{})));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "entry for '" + name + "': " + e.what());
    }
  }
  return out;
}

std::vector<ClassLexicon> load_lexicon_cache(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_lexicon_cache(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string dump_lexicon_cache(const std::vector<ClassLexicon>& lexicons) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& lex : lexicons) {
    nlohmann::ordered_json entry;
    if (!lex.dataset_name.empty()) entry["dataset"] = lex.dataset_name;
    entry["synonyms"] = lex.synonyms;
    entry["descriptors"] = lex.descriptors;
    doc[lex.class_name] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

void save_lexicon_cache(const std::vector<ClassLexicon>& lexicons, const std::filesystem::path& path) {
  write_file_atomic(path, dump_lexicon_cache(lexicons));
}

}  // namespace synspace
