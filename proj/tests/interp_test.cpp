#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "generator.hpp"
#include "uscc/interp.hpp"

namespace uscc {
namespace {

using testing::load_fixture;

InvocationInput filter_input(int extra, std::int64_t x, std::int64_t y) {
  InvocationInput in;
  in.varyings["SV_DispatchThreadID"] = Value::int_vec({x, y, 0, 0}, 2);
  Grid ones(8, 8);
  for (auto& t : ones.texels) t = {1.0, 1.0, 1.0, 1.0};
  in.resources.textures["ColorTexture"] = ones;
  in.resources.targets["Output"] = Grid(8, 8);
  in.uniforms["filterMethod.ExtraParameter"] = Value::integer(extra);
  return in;
}

TEST(Value, ConstructionAndComparison) {
  EXPECT_TRUE(Value::boolean(true).truthy());
  EXPECT_FALSE(Value::integer(0).truthy());
  EXPECT_EQ(Value::integer(-3).as_int(), -3);
  EXPECT_DOUBLE_EQ(Value::float_vec({1, 2, 3, 4}, 4).as_float(2), 3.0);
  EXPECT_TRUE(Value::float_vec({1, 2, 0, 0}, 2).is_vector());
  EXPECT_TRUE(values_close(Value::real(1.0), Value::real(1.0 + 1e-9)));
  EXPECT_FALSE(values_close(Value::real(1.0), Value::real(1.001)));
  EXPECT_FALSE(values_close(Value::integer(1), Value::integer(2)));
  EXPECT_FALSE(values_close(Value::float_vec({1, 2, 0, 0}, 2), Value::float_vec({1, 2, 0, 0}, 3)));
}

TEST(Interp, FilterHighQualityProducesTheSquaredParameter) {
  Analysis a = load_fixture("filter");
  InvocationInput in = filter_input(7, 3, 5);
  in.spec["filterMethod"] = ParamValue::TypeV("HighQualityFilter");
  in.spec["IterationCount"] = ParamValue::IntV(2);
  DynamicResult d = eval_dynamic("FilterShader", in, a.registry);
  ASSERT_EQ(d.resources.stores.size(), 1u);
  EXPECT_NEAR(d.resources.stores[0].value[0], 49.0, 1e-9);
  EXPECT_EQ(d.resources.stores[0].x, 3);
  EXPECT_EQ(d.resources.stores[0].y, 5);
  EXPECT_NEAR(d.resources.targets["Output"].at(3, 5)[0], 49.0, 1e-9);
  EXPECT_EQ(d.trace.size(), 2u);

  SpecSpace s = enumerate_variants("FilterShader", a.registry);
  ResourceModel r = eval_specialized(s, s.variants[0], in, a.registry);
  EXPECT_EQ(r.targets, d.resources.targets);
  EXPECT_NEAR(r.stores[0].value[0], 49.0, 1e-9);
}

TEST(Interp, TraceAgreesWithOverrideResolution) {
  for (const auto& name : testing::interpretable_fixtures()) {
    Analysis a = load_fixture(name);
    for (const auto& e : entry_classes(a.registry)) {
      SpecSpace s = enumerate_variants(e, a.registry);
      for (const auto& v : s.variants) {
        InvocationInput in;
        in.varyings["SV_DispatchThreadID"] = Value::int_vec({1, 2, 0, 0}, 3);
        in.varyings["SV_GroupIndex"] = Value::integer(3);
        for (const auto& u : s.uniforms) {
          const auto& t = u.uniform.gpu_type.name;
          if (t == "Texture2D") in.resources.textures[u.path] = Grid(8, 8);
          else if (t.rfind("RW", 0) == 0) in.resources.targets[u.path] = Grid(8, 8);
          else if (t == "int" || t == "uint") in.uniforms[u.path] = Value::integer(2);
          else if (t == "bool") in.uniforms[u.path] = Value::boolean(true);
          else if (t != "SamplerState") in.uniforms[u.path] = Value::real(0.5);
        }
        in.spec = assignments_for(s, v);
        DynamicResult d;
        try {
          d = eval_dynamic(e, in, a.registry);
        } catch (const InterpError&) {
          continue;  // e.g. an integer division the fixed input happens to hit
        }
        for (const auto& t : d.trace) {
          EXPECT_EQ(t.resolved_class, resolve_override(t.runtime_class, t.method, a.registry).declaring_class);
          const MethodInfo* bf = testing::brute_force_override(t.runtime_class, t.method, a.registry);
          ASSERT_NE(bf, nullptr);
          EXPECT_EQ(t.resolved_class, bf->declaring_class);
          const std::string bound = t.path.empty() ? e : in.spec.at(t.path).type_name;
          EXPECT_EQ(t.runtime_class, bound) << name << " " << t.path << " " << t.method;
        }
      }
    }
  }
}

TEST(Interp, FixturesAreEquivalentOverHundredTrials) {
  for (const auto& name : testing::interpretable_fixtures()) {
    Analysis a = load_fixture(name);
    for (const auto& e : entry_classes(a.registry)) {
      EquivalenceReport r = equivalence_check(e, a.registry, 100, 2024);
      EXPECT_TRUE(r.passed()) << r.to_text();
      EXPECT_EQ(r.variants.size(), enumerate_variants(e, a.registry).variant_count());
      for (const auto& v : r.variants) EXPECT_EQ(v.trials_run, 100u);
    }
  }
}

TEST(Interp, WrongOverrideIsPinpointed) {
  Analysis a = load_fixture("filter");
  const Registry& reg = a.registry;
  EquivalenceOptions opt;
  opt.resolver = [&](std::string_view cls, std::string_view m) -> const MethodInfo& {
    return resolve_override(cls == "LowQualityFilter" ? "MedQualityFilter" : cls, m, reg);
  };
  EquivalenceReport r = equivalence_check("FilterShader", reg, 20, 3, opt);
  EXPECT_FALSE(r.passed());
  std::set<int> failing;
  for (const auto& v : r.variants)
    if (v.status == VariantCheck::Status::Fail) {
      failing.insert(v.variant_id);
      EXPECT_TRUE(v.failing_trial.has_value());
      EXPECT_FALSE(v.detail.empty());
    }
  EXPECT_EQ(failing, (std::set<int>{4, 5, 6, 7}));
  EXPECT_EQ(r.failures(), 4u);
}

TEST(Interp, ReportsAreReproducible) {
  Analysis a = load_fixture("temporal");
  auto r1 = equivalence_check("TemporalShader", a.registry, 5, 11);
  auto r2 = equivalence_check("TemporalShader", a.registry, 5, 11);
  EXPECT_EQ(r1.to_json(), r2.to_json());
  EXPECT_EQ(r1.to_text(), r2.to_text());
  auto none = equivalence_check("TemporalShader", a.registry, 0, 11);
  EXPECT_TRUE(none.passed());
  EXPECT_EQ(none.failures(), 0u);
}

TEST(Interp, PassthroughCannotBeChecked) {
  Analysis a = load_fixture("passthrough");
  try {
    equivalence_check("Blit", a.registry, 1, 0);
    FAIL();
  } catch (const InterpError& e) {
    EXPECT_EQ(e.code(), "Passthrough");
  }
}

// Runs `body` as the entry of a one-class program in both modes; returns the
// shared outcome or "diverged".
std::string run_snippet(const std::string& body, const std::string& helpers = "") {
  Analysis a = testing::analyze_text(
      "class [[ShaderClass]] T {\npublic:\n  [[uniform]] RWTexture2D<float4> Output;\n  [[uniform]] int N;\n" +
      helpers + "  [[entry_ComputeShader(1, 1, 1)]]\n  void Main([[SV_DispatchThreadID]] uint3 id) const\n  {\n" +
      body + "\n  }\n};\n");
  if (!a.ok()) return "analysis: " + a.report();
  InvocationInput in;
  in.varyings["SV_DispatchThreadID"] = Value::int_vec({0, 0, 0, 0}, 3);
  in.uniforms["N"] = Value::integer(0);
  in.resources.targets["Output"] = Grid(2, 2);
  auto outcome = [](const ResourceModel& r) {
    if (r.stores.empty()) return std::string("ok");
    std::string s = "stored";
    for (double c : r.stores.back().value) s += " " + std::to_string(c);
    return s;
  };
  std::string dyn, spec;
  try {
    dyn = outcome(eval_dynamic("T", in, a.registry).resources);
  } catch (const InterpError& e) {
    dyn = e.code();
  }
  try {
    SpecSpace space = enumerate_variants("T", a.registry);
    spec = outcome(eval_specialized(space, space.variants[0], in, a.registry));
  } catch (const InterpError& e) {
    spec = e.code();
  }
  return dyn == spec ? dyn : "diverged: " + dyn + " / " + spec;
}

std::string stored(double x, double y, double z, double w) {
  return "stored " + std::to_string(x) + " " + std::to_string(y) + " " + std::to_string(z) + " " + std::to_string(w);
}

TEST(Interp, ArithmeticAndControlFlow) {
  EXPECT_EQ(run_snippet("    Output[int2(1, 1)] = float4(1.0, 2.0, 3.0, 4.0) * 2.0;"), stored(2, 4, 6, 8));
  EXPECT_EQ(run_snippet("    float4 v = float4(1.0, 2.0, 3.0, 4.0);\n    Output[int2(0, 0)] = v.wzyx + 1.0;"),
            stored(5, 4, 3, 2));
  EXPECT_EQ(run_snippet("    int s = 0;\n    for (int i = 0; i < 5; ++i) {\n      if (i != 3) { s += i; }\n    }\n"
                        "    Output[int2(0, 0)] = float4(float(s), float(7 / 2), float(-7 % 3), 0.0);"),
            stored(7, 3, -1, 0));
  EXPECT_EQ(run_snippet("    int k = 0;\n    for (int i = 0; i < 5; i += 2) {\n      k += 2;\n    }\n"
                        "    Output[int2(0, 0)] = float4(float(k), max(1.0, 3.0), abs(-2.0), clamp(5.0, 0.0, 1.0));"),
            stored(6, 3, 2, 1));
  EXPECT_EQ(run_snippet("    bool b = N > 0 || !(N < 0);\n    if (b && N == 0) {\n      Output[int2(0, 1)] = float4(1.0, 0.0, 0.0, 0.0);\n"
                        "    } else {\n      Output[int2(0, 1)] = float4(2.0, 0.0, 0.0, 0.0);\n    }"),
            stored(1, 0, 0, 0));
  EXPECT_EQ(run_snippet("    Output[int2(0, 0)] = float4(float(twice(N + 4)), 0.0, 0.0, 0.0);",
                        "  [[gpu]] int twice(int x) const\n  {\n    return x * 2;\n  }\n"),
            stored(8, 0, 0, 0));
  EXPECT_EQ(run_snippet("    float4 v = float4(0.0, 0.0, 0.0, 0.0);\n    v.y = 3.0;\n    v.xz += 1.0;\n"
                        "    Output[int2(0, 0)] = v;"),
            stored(1, 3, 1, 0));
}

TEST(Interp, RuntimeFaultsAreReportedByCode) {
  EXPECT_EQ(run_snippet("    int z = 1 / N;"), "DivisionByZero");
  EXPECT_EQ(run_snippet("    Output[int2(2, 0)] = float4(1.0, 1.0, 1.0, 1.0);"), "OutOfBounds");
  EXPECT_EQ(run_snippet("    Output[int2(0, 0)] = Output[int2(5, 5)] + 1.0;"), stored(1, 1, 1, 1));
  EXPECT_EQ(run_snippet("    for (int i = 0; i >= 0; i += N) {\n    }"), "LoopLimit");
  EXPECT_EQ(run_snippet("    int r = down(1);", "  [[gpu]] int down(int x) const\n  {\n    return down(x + 1);\n  }\n"),
            "RecursionLimit");
  EXPECT_EQ(run_snippet("    int r = pick(1);",
                        "  [[gpu]] int pick(int x) const\n  {\n    if (x > 5) { return 1; }\n  }\n"),
            "MissingReturn");
}

TEST(Interp, GeneratedProgramsAreEquivalent) {
  std::mt19937_64 rng(404);
  testing::GenLimits limits;
  limits.max_variants = 64;
  for (int k = 0; k < 25; ++k) {
    auto p = testing::generate_program(rng, limits);
    Analysis a = analyze(p.files);
    ASSERT_TRUE(a.ok()) << a.report();
    EquivalenceReport r = equivalence_check(p.entry_class, a.registry, 5, static_cast<std::uint64_t>(k));
    EXPECT_TRUE(r.passed()) << r.to_text();
    EXPECT_EQ(r.variants.size(), p.expected_variants);
  }
}

}  // namespace
}  // namespace uscc
