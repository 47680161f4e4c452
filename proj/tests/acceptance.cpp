#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "guard_check.hpp"
#include "uscc/interp.hpp"
#include "uscc/runtime.hpp"

using namespace uscc;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

char buf[64];
const char* fmt_s(double s) {
  std::snprintf(buf, sizeof buf, "%.3fs", s);
  return buf;
}

Outcome count_check(const std::string& fixture, const std::string& entry, std::size_t impls, std::size_t variants,
                    double limit_s, bool brute) {
  Outcome o;
  auto t0 = Clock::now();
  Analysis a = testing::load_fixture(fixture);
  o.require(a.ok(), "fixture does not analyze: " + a.report());
  if (!o.pass) return o;
  SpecSpace s = enumerate_variants(entry, a.registry);
  auto closed = count_closed_form(entry, a.registry);
  o.require(s.impl_count() == impls, "ImplClasses " + std::to_string(s.impl_count()));
  o.require(s.variant_count() == variants, "variants " + std::to_string(s.variant_count()));
  o.require(closed.impl_count == impls && closed.variant_count == variants, "closed form disagrees");
  if (brute)
    o.require(testing::brute_force_assignments(entry, a.registry).size() == variants, "brute force disagrees");
  const double t = seconds_since(t0);
  o.require(t < limit_s, std::string("took ") + fmt_s(t));
  if (o.pass)
    o.note = std::to_string(impls) + " ImplClasses, " + std::to_string(variants) + " variants in " + fmt_s(t);
  return o;
}

Outcome ac3() {
  Outcome o;
  auto t0 = Clock::now();
  std::size_t checked = 0;
  for (const auto& name : testing::interpretable_fixtures()) {
    Analysis a = testing::load_fixture(name);
    for (const auto& e : entry_classes(a.registry)) {
      EquivalenceReport r = equivalence_check(e, a.registry, 100, 20240101);
      o.require(r.passed(), name + ": " + std::to_string(r.failures()) + " failing variants");
      checked += r.variants.size();
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 30.0, std::string("took ") + fmt_s(t));
  if (o.pass)
    o.note = std::to_string(checked) + " variants x 100 trials, " +
             std::to_string(testing::interpretable_fixtures().size()) + " fixtures, 0 counterexamples in " + fmt_s(t);
  return o;
}

Outcome ac4() {
  Outcome o;
  std::size_t artifacts = 0;
  for (const auto& name : testing::clean_fixtures()) {
    Analysis a = testing::load_fixture(name);
    for (const auto& e : entry_classes(a.registry)) {
      ShaderArtifact art = emit_shader(enumerate_variants(e, a.registry), a.registry);
      o.require(devirtualization_audit(art), name + ": audit failed");
      auto problems = testing::guard_soundness_problems(a, e);
      o.require(problems.empty(), problems.empty() ? "" : problems.front());
      ++artifacts;
    }
  }
  Analysis f = testing::load_fixture("filter");
  const std::string text = emit_shader(enumerate_variants("FilterShader", f.registry), f.registry).text;
  const auto marker = text.find("// HighQualityFilter bound to 'filterMethod'");
  const auto open = text.rfind("#if ", marker);
  const auto close = text.find("#endif", marker);
  bool contained = marker != std::string::npos && open != std::string::npos;
  for (auto pos = text.find("ExtraParameter"); pos != std::string::npos; pos = text.find("ExtraParameter", pos + 1))
    contained = contained && pos > open && pos < close;
  o.require(contained, "ExtraParameter escapes the HighQualityFilter guard");
  if (o.pass) o.note = std::to_string(artifacts) + " artifacts audited, guards sound for every variant";
  return o;
}

Outcome ac5() {
  Outcome o;
  Analysis a = testing::load_fixture("filter");
  Manifest m = build_all(a).manifest;
  const EntryPoint& ep = *m.find_entry("FilterShader");
  for (const auto& v : ep.variants) {
    ShaderInstance inst = make_instance(m, "FilterShader");
    set_param(inst, m, "filterMethod", ParamValue::TypeV(ep.impl_classes[static_cast<std::size_t>(v.impl_id)].bindings[0].class_name));
    set_param(inst, m, "IterationCount", ParamValue::IntV(*v.value_of("IterationCount")));
    Selection sel = select_variant(inst, m);
    o.require(sel.variant_id == v.variant_id && sel.defines == v.defines,
              "variant " + std::to_string(v.variant_id) + " selected " + std::to_string(sel.variant_id));
  }
  auto code_of = [&](const std::function<void()>& f) -> std::string {
    try {
      f();
    } catch (const RuntimeError& e) {
      return std::string(to_string(e.code()));
    }
    return "none";
  };
  ShaderInstance inst = make_instance(m, "FilterShader");
  o.require(code_of([&] { set_param(inst, m, "IterationCount", ParamValue::IntV(3)); }) == "ValueNotEnumerated",
            "IterationCount=3 accepted");
  set_param(inst, m, "IterationCount", ParamValue::IntV(4));
  o.require(code_of([&] { select_variant(inst, m); }) == "Unassigned", "unassigned filterMethod accepted");
  if (o.pass) o.note = "12/12 variants reconstruct; ValueNotEnumerated and Unassigned raised";
  return o;
}

Outcome ac6() {
  Outcome o;
  for (int k = 1; k <= 10; ++k) {
    const std::string code = "R" + std::to_string(k);
    auto sources = read_sources({testing::fixture_root() + "/mutations/" + code + ".usl"});
    Analysis a = analyze(sources);
    auto codes = testing::codes_of(a.diagnostics);
    o.require(codes == std::vector<std::string>{code}, code + " mutation yields " + a.report());
  }
  if (o.pass) o.note = "R1..R10 each yield exactly their own code";
  return o;
}

struct Build {
  std::vector<std::string> shaders;
  std::string manifest;
};

Build full_build(std::vector<NamedSource> sources) {
  BuildResult b = build_all(analyze(sources));
  Build out;
  for (const auto& s : b.shaders) out.shaders.push_back(s.file_name + "\n" + s.text);
  out.manifest = serialize_manifest(b.manifest);
  return out;
}

Outcome ac7() {
  Outcome o;
  std::mt19937_64 rng(7);
  for (const auto& name : testing::clean_fixtures()) {
    auto sources = read_sources(testing::fixture_files(name));
    Build first = full_build(sources);
    for (int k = 0; k < 3; ++k) {
      std::shuffle(sources.begin(), sources.end(), rng);
      Build again = full_build(sources);
      o.require(again.shaders == first.shaders, name + ": shader bytes differ");
      o.require(again.manifest == first.manifest, name + ": manifest bytes differ");
    }
  }
  if (o.pass) o.note = "shaders and manifest byte-identical across permuted input order";
  return o;
}

Outcome ac8() {
  Outcome o;
  for (const auto& name : testing::clean_fixtures()) {
    Manifest m = build_all(testing::load_fixture(name)).manifest;
    const std::string text = serialize_manifest(m);
    o.require(load_manifest(text) == m, name + ": round trip differs");
    for (const auto& ep : m.entry_points)
      for (const auto& v : ep.variants)
        o.require(encode_defines(ep.impl_classes[static_cast<std::size_t>(v.impl_id)].bindings, v.values,
                                 ep.type_tags) == v.defines,
                  name + ": defines of variant " + std::to_string(v.variant_id) + " do not recompute");
  }
  if (o.pass) o.note = "round trip exact, defines recompute on all fixtures";
  return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 FilterShader counts", [] { return count_check("filter", "FilterShader", 3, 12, 1.0, true); }},
      {"AC2 Reduction counts", [] { return count_check("reduction", "ReduceRunner", 10, 40, 1e9, true); }},
      {"AC3 Equivalence oracle", ac3},
      {"AC4 Static dispatch", ac4},
      {"AC5 Runtime selection", ac5},
      {"AC6 Validation suite", ac6},
      {"AC7 Determinism", ac7},
      {"AC8 Manifest round trip", ac8},
  };
  int failed = 0;
  for (const auto& [label, check] : criteria) {
    Outcome o = guarded(check);
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", label.c_str(), o.note.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
