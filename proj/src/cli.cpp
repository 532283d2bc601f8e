#include "genderprobe/cli.hpp"

#include "genderprobe/config.hpp"
#include "genderprobe/error.hpp"
#include "genderprobe/experiments.hpp"
#include "genderprobe/fixtures.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace genderprobe {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  bool dry_run = false;
  std::string eval_kind;
  std::vector<std::string> report_paths;
  std::string fixture_root = "fixtures";
};

ExperimentConfig load_config(const Options& o) {
  if (o.config_path.empty()) throw ValidationError("--config is required");
  Config c = Config::load(o.config_path);
  for (const auto& kv : o.overrides) c.set_override(kv);
  return ExperimentConfig::from(c);
}

std::string lang_name(Language l) { return std::string(to_string(l)); }

int cmd_ingest(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  Pipeline p(config);
  for (Language lang : config.languages) {
    const Lexicon lex = p.lexicon(lang);
    const auto& c = lex.counts();
    out << lang_name(lang) << " total=" << c.total << " masc=" << c.masculine << " fem=" << c.feminine << "\n";
  }
  return kExitOk;
}

int cmd_elicit(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  Pipeline p(config);
  for (const auto& spec : config.backends) {
    for (Language lang : config.languages) {
      const Lexicon lex = p.lexicon(lang);
      TranscriptStore& store = p.store(lang, spec.model_name);
      const PromptTemplate& tmpl = template_for(lang);
      std::size_t planned = 0;
      for (const Noun& n : lex.entries()) {
        const std::string prompt = render_prompt(tmpl, n);
        const std::size_t need = planned_requests(&store, spec.model_name, prompt, config.n_samples);
        planned += need;
        if (o.dry_run && need > 0) {
          out << "# " << lang_name(lang) << " " << n.surface << " samples=" << need << " hash=" << prompt_hash(prompt)
              << "\n"
              << prompt << "\n";
        }
      }
      out << lang_name(lang) << " " << spec.summary() << " planned_requests=" << planned << "\n";
      if (!o.dry_run && planned > 0) {
        p.preflight(spec, false);
        p.elicit_all(lang, spec);
        out << lang_name(lang) << " " << spec.summary() << " stored=" << store.size() << "\n";
      }
    }
  }
  return kExitOk;
}

int cmd_translate(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  Pipeline p(config);
  const BackendSpec& spec = config.backends.front();
  p.preflight(spec, false);
  for (Language lang : config.languages) {
    const auto pivot = p.pivot_profiles(p.source_profiles(lang, spec));
    std::size_t entries = 0;
    for (const auto& prof : pivot) entries += prof.size();
    out << lang_name(lang) << " profiles=" << pivot.size() << " pivot_entries=" << entries << "\n";
  }
  out << "cache_entries=" << p.cache().size() << "\n";
  return kExitOk;
}

int cmd_profile(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  Pipeline p(config);
  const BackendSpec& spec = config.backends.front();
  p.preflight(spec, false);
  const fs::path dir = config.out_dir / "profiles";
  for (Language lang : config.languages) {
    std::size_t empty = 0;
    const auto source = p.source_profiles(lang, spec, &empty);
    const auto pivot = p.pivot_profiles(source);
    const fs::path stem = transcript_file(dir, lang, spec.model_name).replace_extension();
    write_profiles(fs::path(stem.string() + ".source.jsonl"), source);
    write_profiles(fs::path(stem.string() + ".pivot.jsonl"), pivot);
    out << lang_name(lang) << " profiles=" << source.size() << " empty_parses=" << empty << " -> "
        << stem.string() << ".{source,pivot}.jsonl\n";
  }
  return kExitOk;
}

void print_rows(const EvalReport& r, std::ostream& out) {
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    out << lang_name(row.language) << " f1=" << m.f1_feminine << " overall=" << m.overall_accuracy
        << " masc=" << m.masculine_accuracy << " fem=" << m.feminine_accuracy << " n_test=" << row.n_test << "\n";
  }
  for (const auto& c : r.comparison) {
    out << c.backend << " " << c.setting << " f1=" << c.f1 << " overall=" << c.overall << "\n";
  }
}

int cmd_eval(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  EvalReport report;
  if (o.eval_kind == "same") {
    report = run_same_language(config);
  } else if (o.eval_kind == "transfer") {
    report = run_transfer(config);
  } else if (o.eval_kind == "compare") {
    report = run_model_comparison(config);
  } else {
    report = run_similarity(config);
  }
  const fs::path path = write_report(report, config.out_dir);
  print_rows(report, out);
  out << "report " << path.string() << "\n";
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const ExperimentConfig config = load_config(o);
  const auto fixtures = generate_synthetic(config);
  FixturePaths paths{config.lexicon_dir, config.transcript_dir, config.embeddings_path, config.dictionary_path};
  if (paths.embeddings.empty() || paths.dictionary.empty()) {
    throw ValidationError("synth needs embeddings_path and dictionary_path");
  }
  write_fixtures(fixtures, paths);
  for (const auto& f : fixtures) {
    out << lang_name(f.language) << " nouns=" << f.lexicon.size() << " records=" << f.transcript.size()
        << " withheld=" << f.oov.size() << "\n";
  }
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  std::vector<fs::path> inputs(o.report_paths.begin(), o.report_paths.end());
  if (inputs.empty()) {
    const ExperimentConfig config = load_config(o);
    if (fs::is_directory(config.out_dir)) {
      for (const auto& e : fs::directory_iterator(config.out_dir)) {
        if (e.path().extension() == ".json") inputs.push_back(e.path());
      }
    }
    std::sort(inputs.begin(), inputs.end());
  }
  if (inputs.empty()) throw ValidationError("no report JSON files found");
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    const fs::path stem = path.parent_path() / path.stem();
    for (const auto& [suffix, content] : render_csv(j)) {
      const fs::path target(stem.string() + suffix);
      std::ofstream(target, std::ios::binary | std::ios::trunc) << content;
      out << target.string() << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const FixtureReport r = verify_fixtures(o.fixture_root);
  for (const auto& s : r.sets) {
    out << s.root.filename().string() << " lexicons=" << s.lexicons << " records=" << s.transcript_records
        << " adjectives=" << s.adjectives_covered << "/" << s.adjectives_needed
        << " embedded_targets=" << s.targets_embedded << "/" << s.dictionary_targets << "\n";
  }
  for (const auto& f : r.failures) err << "FAIL " << f << "\n";
  return r.ok() ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"genderprobe: grammatical gender probe over LLM adjective descriptions", "genderprobe"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "config file (TOML subset or JSON snapshot)");
    sub->add_option("--set", o.overrides, "override a config key, key=value")->allow_extra_args(false);
  };

  auto* ingest = app.add_subcommand("ingest", "validate lexicons and print gender counts");
  auto* elicit = app.add_subcommand("elicit", "collect completions for every noun");
  elicit->add_flag("--dry-run", o.dry_run, "print prompts and planned request count only");
  auto* translate = app.add_subcommand("translate", "translate adjectives into the pivot language, filling the cache");
  auto* profile = app.add_subcommand("profile", "parse and aggregate completions into adjective profiles");
  auto* eval = app.add_subcommand("eval", "run an experiment and write a report");
  eval->add_option("kind", o.eval_kind, "same | transfer | compare | similarity")
      ->required()
      ->check(CLI::IsMember({"same", "transfer", "compare", "similarity"}));
  auto* synth = app.add_subcommand("synth", "generate synthetic fixtures");
  auto* report = app.add_subcommand("report", "re-render CSV tables from stored JSON reports");
  report->add_option("reports", o.report_paths, "report JSON files (default: every JSON in out_dir)");
  auto* verify = app.add_subcommand("verify-fixtures", "check fixture files and their cross-references");
  verify->add_option("root", o.fixture_root, "fixture root directory");
  for (auto* sub : {ingest, elicit, translate, profile, eval, synth, report}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (argc > 1) err << "error: " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (elicit->parsed()) return cmd_elicit(o, out);
    if (translate->parsed()) return cmd_translate(o, out);
    if (profile->parsed()) return cmd_profile(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (verify->parsed()) return cmd_verify(o, out, err);
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const TranslationError& e) {
    err << "translation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace genderprobe
