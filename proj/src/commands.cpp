#include "synspace/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "synspace/analysis.hpp"
#include "synspace/embedding_io.hpp"
#include "synspace/error.hpp"
#include "synspace/hashing.hpp"
#include "synspace/llm_client.hpp"
#include "synspace/synth.hpp"
#include "synspace/textgen.hpp"
#include "synspace/topology.hpp"

namespace synspace {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config plumbing

template <typename T>
void read_key(const nlohmann::json& doc, const char* key, T& field, std::set<std::string>& seen) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
  seen.insert(key);
}

/// Binds flags to a staging config and remembers which ones were given.
class FlagSet {
 public:
  template <typename T>
  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, T PipelineConfig::*member,
                   const std::string& help) {
    auto* opt = app.add_option(flag, staging_.*member, help);
    bindings_.push_back({opt, key, [member, this](PipelineConfig& c) { c.*member = staging_.*member; }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App& app, const std::string& flag, const std::string& key, bool PipelineConfig::*member,
                        const std::string& help) {
    auto* opt = app.add_flag(flag, staging_.*member, help);
    bindings_.push_back({opt, key, [member, this](PipelineConfig& c) { c.*member = staging_.*member; }});
    return opt;
  }

  /// Defaults, then the config file, then flags.
  PipelineConfig resolve(const std::string& config_path, std::set<std::string>& explicit_keys) const {
    PipelineConfig cfg;
    if (!config_path.empty()) {
      const auto bytes = read_file_bytes(config_path);
      cfg = parse_pipeline_config(std::string(bytes.begin(), bytes.end()), &explicit_keys);
    }
    for (const auto& b : bindings_) {
      if (b.option->count() > 0) {
        b.apply(cfg);
        explicit_keys.insert(b.key);
      }
    }
    validate(cfg);
    return cfg;
  }

 private:
  struct Binding {
    CLI::Option* option;
    std::string key;
    std::function<void(PipelineConfig&)> apply;
  };
  PipelineConfig staging_;
  std::vector<Binding> bindings_;
};

void add_topology_flags(CLI::App& app, FlagSet& flags) {
  flags.add(app, "--epsilon-mode", "epsilon_mode", &PipelineConfig::epsilon_mode, "fixed | auto | none")
      ->check(CLI::IsMember({"fixed", "auto", "none"}));
  flags.add(app, "--epsilon", "epsilon", &PipelineConfig::epsilon, "similarity threshold for fixed mode (default 0.9)");
}

void add_metric_flags(CLI::App& app, FlagSet& flags) {
  flags.add(app, "--metric", "metric", &PipelineConfig::metric, "set | center | subspace | local-center")
      ->check(CLI::IsMember({"set", "center", "subspace", "local-center", "local_center"}));
  flags.add(app, "--local-n", "local_n", &PipelineConfig::local_n, "local-center neighborhood size (default 20)");
  flags.add(app, "--subspace-d", "subspace_d", &PipelineConfig::subspace_d, "subspace dimension (default min(8, |S0|-1))");
  flags.add_flag(app, "--renormalize-mean", "renormalize_mean", &PipelineConfig::renormalize_mean,
                 "normalize means before the inner product (ablation)");
}

void add_tta_flags(CLI::App& app, FlagSet& flags) {
  flags.add(app, "--tau", "tau", &PipelineConfig::tau, "softmax logit scale (default 100)");
  flags.add(app, "--rho", "rho", &PipelineConfig::rho, "fraction of confident views kept (default 0.1)");
  flags.add(app, "--lr", "lr", &PipelineConfig::lr, "shift learning rate (default 5e-4)");
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

std::string file_hash(const fs::path& p) { return sha256_hex(read_text(p)); }

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::InvalidConfig, std::string(flag) + " is required");
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json config_json(const PipelineConfig& cfg) { return ordered_json::parse(pipeline_config_json(cfg)); }

// ---------------------------------------------------------------------------
// Subcommands

struct GenerateOptions {
  std::string classes_file;
  std::string dataset = "images";
  std::string lexicon_in;
  std::string out;
  std::string texts_dir;
  std::string llm_endpoint;
  std::string llm_key_env;
  std::string llm_cache;
  std::string llm_model = "default";
  double llm_temperature = 0.0;
  std::size_t max_synonyms = 10;
  std::size_t max_descriptors = 30;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  std::vector<ClassLexicon> lexicons;
  if (!o.classes_file.empty()) {
    std::optional<LlmEndpoint> endpoint;
    if (!o.llm_endpoint.empty()) {
      LlmEndpoint ep;
      ep.url = o.llm_endpoint;
      if (!o.llm_key_env.empty()) {
        const char* key = std::getenv(o.llm_key_env.c_str());
        if (key == nullptr) throw Error(ErrorCode::InvalidConfig, "environment variable " + o.llm_key_env + " is not set");
        ep.api_key = key;
      }
      endpoint = ep;
    }
    LlmClient client(endpoint, std::make_shared<LlmCache>(o.llm_cache));
    DecodingParams params;
    params.model = o.llm_model;
    params.temperature = o.llm_temperature;

    std::istringstream names(read_text(o.classes_file));
    std::string name;
    while (std::getline(names, name)) {
      if (!name.empty() && name.back() == '\r') name.pop_back();
      if (name.find_first_not_of(" \t") == std::string::npos) continue;
      auto synonyms = client.query(render_synonym_prompt(name, o.dataset), params);
      auto descriptors = client.query(render_descriptor_prompt(name), params);
      if (synonyms.size() > o.max_synonyms) synonyms.resize(o.max_synonyms);
      if (descriptors.size() > o.max_descriptors) descriptors.resize(o.max_descriptors);
      lexicons.push_back(make_lexicon(name, o.dataset, std::move(synonyms), std::move(descriptors)));
    }
    out << "generate: " << lexicons.size() << " classes, " << client.network_calls() << " LLM calls, "
        << client.cache_hits() << " cache hits\n";
  } else if (!o.lexicon_in.empty()) {
    lexicons = load_lexicon_cache(o.lexicon_in);
  } else {
    throw Error(ErrorCode::InvalidConfig, "generate needs --classes or --lexicon");
  }
  if (lexicons.empty()) throw Error(ErrorCode::EmptySet, "no classes");

  if (!o.out.empty()) save_lexicon_cache(lexicons, o.out);
  if (!o.texts_dir.empty()) {
    for (std::size_t k = 0; k < lexicons.size(); ++k) {
      std::string body;
      for (const auto& t : combine(lexicons[k], static_cast<int>(k)).texts) body += t + "\n";
      write_file_atomic(fs::path(o.texts_dir) / (std::to_string(k) + ".txt"), body);
    }
  }
  if (o.out.empty() && o.texts_dir.empty()) out << dump_lexicon_cache(lexicons);
  return 0;
}

void dump_persistence_for(const EmbeddingSet& set, const fs::path& dir, const std::string& stem) {
  const auto record = persistence_0d(build_similarity_graph(set));
  std::string merges;
  for (const auto& m : record.merges) {
    merges += format_double(m.epsilon) + "," + std::to_string(m.survivor_root) + "," + std::to_string(m.absorbed_root) + "\n";
  }
  std::string bars;
  for (const auto& b : record.bars) {
    bars += format_double(b.birth) + "," + (b.essential() ? std::string("-inf") : format_double(b.death)) + "," +
            std::to_string(b.representative) + "\n";
  }
  write_file_atomic(dir / (stem + "_merges.csv"), merges);
  write_file_atomic(dir / (stem + "_bars.csv"), bars);
}

int cmd_build(const PipelineConfig& cfg, const std::string& dump_dir, std::ostream& out) {
  require(cfg.lexicon, "--lexicon");
  require(cfg.embeddings, "--embeddings");
  require(cfg.catalog, "--catalog");
  const auto lexicons = load_lexicon_cache(cfg.lexicon);
  const DirectoryEmbeddingProvider provider(cfg.embeddings);
  const auto catalog = ClassCatalog::build(lexicons, provider, filter_config(cfg), metric_config(cfg));
  catalog.save(cfg.catalog);
  for (const auto& c : catalog.classes()) {
    out << "class " << c.id << " '" << c.lexicon.class_name << "': core " << c.core.members.size() << "/"
        << c.embeddings.size();
    if (c.core.epsilon_used < 0.0) {
      out << " unfiltered\n";
    } else {
      out << " at epsilon " << format_double(c.core.epsilon_used) << "\n";
    }
    if (!dump_dir.empty()) dump_persistence_for(c.embeddings, dump_dir, "class_" + std::to_string(c.id));
  }
  out << "catalog " << catalog.input_hash() << " written to " << cfg.catalog << "\n";
  return 0;
}

/// Catalog metric unless the user set metric keys explicitly.
ClassCatalog catalog_for(PipelineConfig& cfg, const std::set<std::string>& explicit_keys) {
  require(cfg.catalog, "--catalog");
  auto catalog = ClassCatalog::load(cfg.catalog);
  const auto& m = catalog.metric();
  if (!explicit_keys.count("metric")) cfg.metric = std::string(metric_name(m.kind));
  if (!explicit_keys.count("local_n")) cfg.local_n = m.neighborhood_n;
  if (!explicit_keys.count("subspace_d")) cfg.subspace_d = m.subspace_dims;
  if (!explicit_keys.count("renormalize_mean")) cfg.renormalize_mean = m.renormalize_mean;
  cfg.epsilon_mode = std::string(filter_mode_name(catalog.filter().mode));
  cfg.epsilon = catalog.filter().epsilon;
  const auto wanted = metric_config(cfg);
  if (wanted.kind != m.kind || wanted.neighborhood_n != m.neighborhood_n || wanted.subspace_dims != m.subspace_dims ||
      wanted.renormalize_mean != m.renormalize_mean) {
    catalog = catalog.with_metric(wanted);
  }
  return catalog;
}

int cmd_classify(PipelineConfig cfg, const std::set<std::string>& explicit_keys, std::ostream& out) {
  require(cfg.queries, "--queries");
  require(cfg.report, "--report");
  const auto catalog = catalog_for(cfg, explicit_keys);
  const auto queries = load_embeddings(cfg.queries).normalized();
  const auto labels = integer_labels(queries);
  const auto rep = evaluate(queries, labels, catalog);

  ordered_json doc;
  doc["command"] = "classify";
  doc["config"] = config_json(cfg);
  doc["catalog_hash"] = catalog.input_hash();
  doc["queries_hash"] = file_hash(cfg.queries);
  doc["total"] = rep.total;
  doc["correct"] = rep.correct;
  doc["top1"] = rep.top1_accuracy;
  auto per_class = ordered_json::array();
  std::string csv = "class_id,name,count,correct,accuracy\n";
  for (std::size_t k = 0; k < catalog.class_count(); ++k) {
    const auto& name = catalog.entry(k).lexicon.class_name;
    per_class.push_back({{"id", k},
                         {"name", name},
                         {"count", rep.per_class_count[k]},
                         {"accuracy", rep.per_class_accuracy[k]}});
    csv += std::to_string(k) + "," + name + "," + std::to_string(rep.per_class_count[k]) + "," +
           std::to_string(rep.confusion[k][k]) + "," +
           (rep.per_class_count[k] ? format_double(rep.per_class_accuracy[k]) : std::string("")) + "\n";
  }
  doc["per_class"] = std::move(per_class);
  doc["confusion"] = rep.confusion;

  const fs::path dir(cfg.report);
  write_file_atomic(dir / "report.json", doc.dump(2) + "\n");
  write_file_atomic(dir / "per_class.csv", csv);
  out << "classify: top-1 " << format_double(rep.top1_accuracy) << " (" << rep.correct << "/" << rep.total << ")\n";
  return 0;
}

std::optional<int> episode_label(const EmbeddingSet& views) {
  if (!views.has_labels()) return std::nullopt;
  const auto& l = views.labels().front();
  constexpr std::string_view prefix = "original:";
  if (l.rfind(prefix, 0) != 0) return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(l.substr(prefix.size()), &used);
    if (used != l.size() - prefix.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int cmd_tta(PipelineConfig cfg, const std::set<std::string>& explicit_keys, std::ostream& out) {
  require(cfg.episodes, "--episodes");
  require(cfg.report, "--report");
  const auto catalog = catalog_for(cfg, explicit_keys);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cfg.episodes)) {
    if (e.is_regular_file() && e.path().extension() == ".s3em") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptySet, "no .s3em episodes in " + cfg.episodes);

  const auto tcfg = tta_config(cfg);
  Sha256 inputs;
  std::size_t labelled = 0, correct_s3 = 0, correct_ts3 = 0;
  std::string csv = "episode,label,views,selected,pred_unadapted,pred_adapted,entropy_before,entropy_after\n";
  for (const auto& f : files) {
    inputs.update_field(f.filename().string());
    inputs.update_field(read_text(f));
    const auto views = load_embeddings(f).normalized();
    const auto label = episode_label(views);
    if (label && (*label < 0 || static_cast<std::size_t>(*label) >= catalog.class_count())) {
      throw Error(ErrorCode::LabelOutOfRange, f.filename().string());
    }
    const auto r = run_episode(views, catalog, tcfg);
    if (label) {
      ++labelled;
      correct_s3 += r.unadapted.class_id == *label;
      correct_ts3 += r.adapted.class_id == *label;
    }
    csv += f.filename().string() + "," + (label ? std::to_string(*label) : std::string("")) + "," +
           std::to_string(views.size()) + "," + std::to_string(r.selected.size()) + "," +
           std::to_string(r.unadapted.class_id) + "," + std::to_string(r.adapted.class_id) + "," +
           format_double(r.entropy_trace.front()) + "," + format_double(r.entropy_trace.back()) + "\n";
  }

  ordered_json doc;
  doc["command"] = "tta";
  doc["config"] = config_json(cfg);
  doc["catalog_hash"] = catalog.input_hash();
  doc["episodes_hash"] = inputs.hex_digest();
  doc["episodes"] = files.size();
  doc["labelled"] = labelled;
  if (labelled > 0) {
    doc["top1_unadapted"] = static_cast<double>(correct_s3) / static_cast<double>(labelled);
    doc["top1_adapted"] = static_cast<double>(correct_ts3) / static_cast<double>(labelled);
  }
  const fs::path dir(cfg.report);
  write_file_atomic(dir / "tta_report.json", doc.dump(2) + "\n");
  write_file_atomic(dir / "tta_episodes.csv", csv);
  out << "tta: " << files.size() << " episodes";
  if (labelled) out << ", top-1 " << correct_s3 << " -> " << correct_ts3 << " of " << labelled;
  out << "\n";
  return 0;
}

std::vector<NamedGroup> read_group_manifest(const fs::path& manifest) {
  std::istringstream in(read_text(manifest));
  std::string line;
  std::vector<NamedGroup> groups;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string id, path;
    if (!(fields >> id >> path)) throw Error(ErrorCode::ParseError, "manifest line needs '<group_id> <path>': " + line);
    fs::path p(path);
    if (p.is_relative()) p = manifest.parent_path() / p;
    groups.push_back({id, load_embeddings(p)});
  }
  if (groups.empty()) throw Error(ErrorCode::EmptySet, "manifest lists no groups: " + manifest.string());
  return groups;
}

int cmd_analyze(const std::string& groups, const std::string& compare, const std::string& out_csv, std::ostream& out) {
  require(groups, "--groups");
  require(out_csv, "--out");
  const auto a = compactness_report(read_group_manifest(groups));
  std::string csv = "population,group_id,compactness\n" + report_csv(a, "a");
  out << "analyze: mean compactness a = " << format_double(a.mean_compactness);
  if (!compare.empty()) {
    const auto b = compactness_report(read_group_manifest(compare));
    csv += report_csv(b, "b");
    out << ", b = " << format_double(b.mean_compactness);
  }
  out << "\n";
  write_file_atomic(out_csv, csv);
  return 0;
}

int cmd_dump_persistence(const std::string& catalog_dir, const std::string& embeddings, const std::string& out_dir,
                         std::ostream& out) {
  require(out_dir, "--out");
  if (!catalog_dir.empty()) {
    const auto catalog = ClassCatalog::load(catalog_dir);
    for (const auto& c : catalog.classes()) dump_persistence_for(c.embeddings, out_dir, "class_" + std::to_string(c.id));
    out << "dump-persistence: " << catalog.class_count() << " classes\n";
  } else if (!embeddings.empty()) {
    dump_persistence_for(load_embeddings(embeddings).normalized(), out_dir, fs::path(embeddings).stem().string());
    out << "dump-persistence: 1 set\n";
  } else {
    throw Error(ErrorCode::InvalidConfig, "dump-persistence needs --catalog or --embeddings");
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

PipelineConfig parse_pipeline_config(const std::string& json_text, std::set<std::string>* explicit_keys) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  static const std::set<std::string> kKnown = {"epsilon_mode", "epsilon",  "metric", "local_n",  "subspace_d",
                                               "renormalize_mean", "tau", "rho",    "lr",       "views",
                                               "seed",         "lexicon",  "embeddings", "catalog", "queries",
                                               "episodes",     "report"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKnown.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  PipelineConfig c;
  std::set<std::string> seen;
  read_key(doc, "epsilon_mode", c.epsilon_mode, seen);
  read_key(doc, "epsilon", c.epsilon, seen);
  read_key(doc, "metric", c.metric, seen);
  read_key(doc, "local_n", c.local_n, seen);
  read_key(doc, "subspace_d", c.subspace_d, seen);
  read_key(doc, "renormalize_mean", c.renormalize_mean, seen);
  read_key(doc, "tau", c.tau, seen);
  read_key(doc, "rho", c.rho, seen);
  read_key(doc, "lr", c.lr, seen);
  read_key(doc, "views", c.views, seen);
  read_key(doc, "seed", c.seed, seen);
  read_key(doc, "lexicon", c.lexicon, seen);
  read_key(doc, "embeddings", c.embeddings, seen);
  read_key(doc, "catalog", c.catalog, seen);
  read_key(doc, "queries", c.queries, seen);
  read_key(doc, "episodes", c.episodes, seen);
  read_key(doc, "report", c.report, seen);
  if (explicit_keys) explicit_keys->insert(seen.begin(), seen.end());
  return c;
}

std::string pipeline_config_json(const PipelineConfig& c) {
  ordered_json j;
  j["epsilon_mode"] = c.epsilon_mode;
  j["epsilon"] = c.epsilon;
  j["metric"] = c.metric;
  j["local_n"] = c.local_n;
  j["subspace_d"] = c.subspace_d;
  j["renormalize_mean"] = c.renormalize_mean;
  j["tau"] = c.tau;
  j["rho"] = c.rho;
  j["lr"] = c.lr;
  j["views"] = c.views;
  j["seed"] = c.seed;
  j["lexicon"] = c.lexicon;
  j["embeddings"] = c.embeddings;
  j["catalog"] = c.catalog;
  j["queries"] = c.queries;
  j["episodes"] = c.episodes;
  j["report"] = c.report;
  return j.dump();
}

void validate(const PipelineConfig& c) {
  parse_filter_mode(c.epsilon_mode);
  parse_metric(c.metric);
  if (c.epsilon_mode == "fixed" && !(c.epsilon >= 0.0 && c.epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must lie in [0, 1]");
  }
  if (c.local_n == 0) throw Error(ErrorCode::InvalidConfig, "local_n must be at least 1");
  if (!(c.tau > 0.0)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  if (!(c.rho > 0.0 && c.rho <= 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (0, 1]");
  if (!(c.lr >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lr must be non-negative");
  if (c.views == 0) throw Error(ErrorCode::InvalidConfig, "views must be at least 1");
}

FilterConfig filter_config(const PipelineConfig& c) { return {parse_filter_mode(c.epsilon_mode), c.epsilon}; }

MetricConfig metric_config(const PipelineConfig& c) {
  MetricConfig m;
  m.kind = parse_metric(c.metric);
  m.neighborhood_n = c.local_n;
  m.subspace_dims = c.subspace_d;
  m.renormalize_mean = c.renormalize_mean;
  return m;
}

TtaConfig tta_config(const PipelineConfig& c) { return {c.tau, c.rho, c.lr}; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot classification over synonymous semantic spaces", "synspace"};
  app.require_subcommand(1);

  FlagSet flags;
  std::string config_path;
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "JSON config file; flags win"); };

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "build a lexicon cache from class names and render synonymous texts");
  generate->add_option("--classes", gen.classes_file, "file with one class name per line");
  generate->add_option("--dataset", gen.dataset, "dataset name used in the synonym prompt");
  generate->add_option("--lexicon", gen.lexicon_in, "existing lexicon cache to render instead of querying");
  generate->add_option("--out", gen.out, "lexicon cache to write");
  generate->add_option("--texts-dir", gen.texts_dir, "write <class_id>.txt text manifests here");
  generate->add_option("--llm-endpoint", gen.llm_endpoint, "OpenAI-compatible chat endpoint URL");
  generate->add_option("--llm-key-env", gen.llm_key_env, "name of the environment variable holding the API key");
  generate->add_option("--llm-cache", gen.llm_cache, "JSON-lines LLM response cache");
  generate->add_option("--llm-model", gen.llm_model, "model name sent to the endpoint");
  generate->add_option("--llm-temperature", gen.llm_temperature, "decoding temperature");
  generate->add_option("--max-synonyms", gen.max_synonyms, "synonyms kept per class (default 10)");
  generate->add_option("--max-descriptors", gen.max_descriptors, "descriptors kept per class (default 30)");

  std::string dump_dir;
  auto* build = app.add_subcommand("build", "construct the class catalog from a lexicon and text embeddings");
  add_config(build);
  flags.add(*build, "--lexicon", "lexicon", &PipelineConfig::lexicon, "lexicon cache (JSON)");
  flags.add(*build, "--embeddings", "embeddings", &PipelineConfig::embeddings, "directory of <class_id>.s3em files");
  flags.add(*build, "--catalog", "catalog", &PipelineConfig::catalog, "output catalog directory");
  add_topology_flags(*build, flags);
  add_metric_flags(*build, flags);
  build->add_option("--dump-persistence", dump_dir, "write persistence bars and merges per class");

  auto* classify = app.add_subcommand("classify", "zero-shot prediction and top-1 evaluation");
  add_config(classify);
  flags.add(*classify, "--catalog", "catalog", &PipelineConfig::catalog, "catalog directory");
  flags.add(*classify, "--queries", "queries", &PipelineConfig::queries, "S3EM query embeddings with integer labels");
  flags.add(*classify, "--report", "report", &PipelineConfig::report, "report directory");
  add_metric_flags(*classify, flags);

  auto* tta = app.add_subcommand("tta", "test-time adaptation over per-sample view episodes");
  add_config(tta);
  flags.add(*tta, "--catalog", "catalog", &PipelineConfig::catalog, "catalog directory");
  flags.add(*tta, "--episodes", "episodes", &PipelineConfig::episodes, "directory of episode .s3em files");
  flags.add(*tta, "--report", "report", &PipelineConfig::report, "report directory");
  add_metric_flags(*tta, flags);
  add_tta_flags(*tta, flags);

  std::string groups, compare, analyze_out;
  auto* analyze = app.add_subcommand("analyze", "compactness of embedding groups");
  analyze->add_option("--groups", groups, "manifest of '<group_id> <s3em path>' lines")->required();
  analyze->add_option("--compare", compare, "second manifest to compare against");
  analyze->add_option("--out", analyze_out, "CSV report")->required();

  SynthParams synth_params;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a deterministic synthetic benchmark");
  synth->add_option("--seed", synth_params.seed, "random seed (default 7)");
  synth->add_option("--classes", synth_params.classes, "number of classes (default 5)");
  synth->add_option("--synonyms", synth_params.synonyms, "texts per class including outliers (default 40)");
  synth->add_option("--outlier-rate", synth_params.outlier_rate, "fraction of planted outliers (default 0.1)");
  synth->add_option("--queries", synth_params.queries, "labelled query embeddings (default 500)");
  synth->add_option("--dim", synth_params.dim, "embedding dimension (default 64)");
  synth->add_option("--episodes", synth_params.episodes, "TTA episodes (default 20)");
  synth->add_option("--views", synth_params.views, "views per episode (default 64)");
  synth->add_option("--class-overlap", synth_params.class_overlap, "shared domain weight of the classes (default 0.8)");
  synth->add_option("--concept-spread", synth_params.concept_spread, "sub-concept offset (default 0.25)");
  synth->add_option("--query-noise", synth_params.query_noise, "query offset from its sub-concept (default 1.5)");
  synth->add_option("--out", synth_out, "output directory")->required();

  std::string dp_catalog, dp_embeddings, dp_out;
  auto* dump = app.add_subcommand("dump-persistence", "write 0-dim persistence bars and merges");
  dump->add_option("--catalog", dp_catalog, "catalog directory");
  dump->add_option("--embeddings", dp_embeddings, "single embedding file");
  dump->add_option("--out", dp_out, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    std::set<std::string> explicit_keys;
    if (generate->parsed()) return cmd_generate(gen, out);
    if (build->parsed()) return cmd_build(flags.resolve(config_path, explicit_keys), dump_dir, out);
    if (classify->parsed()) {
      auto cfg = flags.resolve(config_path, explicit_keys);
      return cmd_classify(std::move(cfg), explicit_keys, out);
    }
    if (tta->parsed()) {
      auto cfg = flags.resolve(config_path, explicit_keys);
      return cmd_tta(std::move(cfg), explicit_keys, out);
    }
    if (analyze->parsed()) return cmd_analyze(groups, compare, analyze_out, out);
    if (synth->parsed()) {
      write_benchmark(generate_benchmark(synth_params), synth_out);
      out << "synth: wrote " << synth_params.classes << " classes to " << synth_out << "\n";
      return 0;
    }
    if (dump->parsed()) return cmd_dump_persistence(dp_catalog, dp_embeddings, dp_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::InvalidRate;
    return usage ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace synspace
