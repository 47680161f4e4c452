#include "uscc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uscc/interp.hpp"
#include "uscc/pipeline.hpp"
#include "uscc/printer.hpp"

namespace uscc {

namespace fs = std::filesystem;

namespace {

struct BuildConfig {
  std::vector<std::string> inputs;
  std::string out_dir;
  std::vector<std::string> emit;
  std::uint64_t max_variants = kDefaultMaxVariants;
  bool check_only = false;
  bool list_variants = false;
  bool dump_ast = false;
  bool verify = false;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

std::string value_text(const SpecSpace& space, const ValueAssignment& v) {
  const PathParam* p = space.find_param(v.path);
  if (p && p->param.kind == SpecKind::Bool) return v.value ? "true" : "false";
  if (p && p->param.kind == SpecKind::Enum)
    for (const auto& o : p->param.options)
      if (o.value == v.value) return o.label;
  return std::to_string(v.value);
}

void list_variants(const std::vector<SpecSpace>& spaces, std::ostream& out) {
  for (const auto& space : spaces) {
    if (spaces.size() > 1) out << "# " << space.entry_class << "\n";
    for (const auto& v : space.variants) {
      out << v.variant_id << "  " << v.impl_id;
      for (const auto& b : space.impl_classes[static_cast<std::size_t>(v.impl_id)].bindings)
        out << "  " << b.path << "=" << b.class_name;
      for (const auto& a : v.values) out << "  " << a.path << "=" << value_text(space, a);
      out << "\n";
    }
  }
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void print_located(const std::vector<Diagnostic>& diags, const Analysis& a, std::ostream& err) {
  err << format_all(diags, a.files);
}

int run_build(const BuildConfig& cfg, std::ostream& out, std::ostream& err) {
  Analysis analysis;
  try {
    analysis = analyze(read_sources(cfg.inputs));
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (cfg.dump_ast)
    for (std::size_t k = 0; k < analysis.units.size(); ++k)
      out << "// " << analysis.files.name(analysis.units[k].file) << "\n" << dump_unit(analysis.units[k]);
  if (!analysis.ok()) {
    err << analysis.report();
    return 1;
  }
  BuildResult result = build_all(analysis, cfg.max_variants);
  if (!result.ok()) {
    print_located(result.diagnostics, analysis, err);
    return 1;
  }
  if (cfg.list_variants) list_variants(result.spaces, out);
  if (cfg.check_only) return 0;

  std::vector<std::pair<fs::path, std::string>> files;
  if (cfg.verify) {
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    bool failed = false;
    for (const auto& space : result.spaces) {
      try {
        EquivalenceOptions opt;
        opt.max_variants = cfg.max_variants;
        EquivalenceReport r = equivalence_check(space.entry_class, analysis.registry, cfg.trials, cfg.seed, opt);
        out << r.to_text();
        failed = failed || !r.passed();
        reports.push_back(nlohmann::ordered_json::parse(r.to_json()));
      } catch (const InterpError& e) {
        std::vector<Diagnostic> d{{e.code(), e.what(), analysis.registry.get_class(space.entry_class).span}};
        print_located(d, analysis, err);
        return 1;
      }
    }
    if (failed) {
      err << "error: verification found counterexamples; no outputs written\n";
      return 1;
    }
    if (!cfg.out_dir.empty()) files.emplace_back(fs::path(cfg.out_dir) / "verify_report.json", reports.dump(2) + "\n");
  }

  if (!cfg.out_dir.empty()) {
    const bool all = cfg.emit.empty();
    auto wants = [&](const char* what) { return all || std::find(cfg.emit.begin(), cfg.emit.end(), what) != cfg.emit.end(); };
    if (wants("shaders"))
      for (const auto& s : result.shaders) files.emplace_back(fs::path(cfg.out_dir) / "shaders" / s.file_name, s.text);
    if (wants("manifest")) files.emplace_back(fs::path(cfg.out_dir) / "manifest.json", serialize_manifest(result.manifest));
  }
  try {
    for (const auto& [path, text] : files) write_file(path, text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"uscc: specializing compiler for Unified Shader Language", "uscc"};
  app.require_subcommand(1);
  BuildConfig cfg;
  CLI::App* build = app.add_subcommand("build", "compile .usl files into specialized shaders and a manifest");
  build->add_option("inputs", cfg.inputs, "input .usl files")->required();
  build->add_option("-o,--out", cfg.out_dir, "output directory");
  build->add_option("--emit", cfg.emit, "outputs to write: shaders, manifest (default both)")
      ->delimiter(',')
      ->allow_extra_args(false)
      ->check(CLI::IsMember({"shaders", "manifest"}));
  build->add_option("--max-variants", cfg.max_variants, "variant count guard per entry class")
      ->check(CLI::PositiveNumber);
  build->add_flag("--check", cfg.check_only, "parse and validate only");
  build->add_flag("--list-variants", cfg.list_variants, "print every variant of every entry class");
  build->add_flag("--dump-ast", cfg.dump_ast, "print the parsed syntax tree");
  build->add_flag("--verify", cfg.verify, "run the equivalence oracle before writing outputs");
  build->add_option("--trials", cfg.trials, "random inputs per variant for --verify");
  build->add_option("--seed", cfg.seed, "seed for --verify");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'uscc build --help' for usage\n";
    return 2;
  }
  if (cfg.out_dir.empty() && !cfg.check_only && !cfg.list_variants && !cfg.dump_ast) {
    err << "usage error: -o/--out is required unless --check, --list-variants or --dump-ast is given\n";
    return 2;
  }
  return run_build(cfg, out, err);
}

}  // namespace uscc
