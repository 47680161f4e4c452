#include <gtest/gtest.h>

#include <functional>
#include <json.hpp>
#include <random>

#include "fixtures.hpp"
#include "generator.hpp"

namespace uscc {
namespace {

using json = nlohmann::json;
using testing::load_fixture;

Manifest manifest_of(const Analysis& a) {
  BuildResult b = build_all(a);
  EXPECT_TRUE(b.ok());
  return b.manifest;
}

std::string filter_text() { return serialize_manifest(manifest_of(load_fixture("filter"))); }

std::string schema_path_of(const std::string& text) {
  try {
    load_manifest(text);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "accepted";
}

std::string tampered(const std::function<void(json&)>& edit) {
  json j = json::parse(filter_text());
  edit(j);
  return schema_path_of(j.dump(2));
}

TEST(Manifest, RoundTripOnFixtures) {
  for (const auto& name : testing::clean_fixtures()) {
    Manifest m = manifest_of(load_fixture(name));
    const std::string text = serialize_manifest(m);
    Manifest back = load_manifest(text);
    EXPECT_EQ(back, m) << name;
    EXPECT_EQ(serialize_manifest(back), text) << name;
    EXPECT_EQ(text.back(), '\n');
  }
}

TEST(Manifest, RoundTripOnGeneratedPrograms) {
  std::mt19937_64 rng(77);
  testing::GenLimits limits;
  limits.max_variants = 512;
  for (int k = 0; k < 40; ++k) {
    auto p = testing::generate_program(rng, limits);
    Manifest m = manifest_of(analyze(p.files));
    ASSERT_EQ(m.entry_points.size(), 1u);
    EXPECT_EQ(m.entry_points[0].variants.size(), p.expected_variants);
    EXPECT_EQ(load_manifest(serialize_manifest(m)), m);
  }
}

TEST(Manifest, DefinesRecomputeFromBindingsAndValues) {
  for (const auto& name : testing::clean_fixtures()) {
    Manifest m = manifest_of(load_fixture(name));
    for (const auto& ep : m.entry_points)
      for (const auto& v : ep.variants) {
        const auto& impl = ep.impl_classes[static_cast<std::size_t>(v.impl_id)];
        EXPECT_EQ(encode_defines(impl.bindings, v.values, ep.type_tags), v.defines) << name << " " << v.variant_id;
      }
  }
}

TEST(Manifest, FilterContents) {
  Manifest m = manifest_of(load_fixture("filter"));
  EXPECT_EQ(m.schema_version, 1);
  EXPECT_EQ(m.tool_version, "0.1.0");
  const EntryPoint* ep = m.find_entry("FilterShader");
  ASSERT_NE(ep, nullptr);
  EXPECT_EQ(ep->shader_file, "shaders/FilterShader.hlsl");
  EXPECT_EQ(ep->group_size, (std::array<int, 3>{8, 8, 1}));
  std::vector<std::string> uniforms;
  for (const auto& u : ep->uniforms) uniforms.push_back(u.path + ":" + u.gpu_type);
  EXPECT_EQ(uniforms, (std::vector<std::string>{"ColorTexture:Texture2D", "ColorSampler:SamplerState",
                                                "Output:RWTexture2D<float4>", "filterMethod.ExtraParameter:int"}));
  EXPECT_EQ(ep->type_tags, (std::map<std::string, int>{{"HighQualityFilter", 0}, {"LowQualityFilter", 1},
                                                        {"MedQualityFilter", 2}}));
  EXPECT_EQ(ep->variants.size(), 12u);
  EXPECT_EQ(m.find_entry("Nope"), nullptr);
}

TEST(Manifest, BoolsAndEnumsUseTheirJsonSpelling) {
  json j = json::parse(serialize_manifest(manifest_of(load_fixture("temporal"))));
  const json& ep = j["entry_points"][0];
  bool saw_bool = false, saw_enum = false;
  for (const auto& p : ep["spec_params"]) {
    if (p["kind"] == "bool") {
      saw_bool = true;
      EXPECT_EQ(p["options"], json::parse("[false, true]"));
    }
    if (p["kind"] == "enum") {
      saw_enum = true;
      EXPECT_EQ(p["options"][2], json::parse(R"({"name": "High", "value": 4})"));
    }
  }
  EXPECT_TRUE(saw_bool && saw_enum);
  bool saw_bool_value = false;
  for (const auto& v : ep["variants"])
    for (const auto& a : v["values"])
      if (a["path"] == "cache.UseClamp") {
        saw_bool_value = true;
        EXPECT_TRUE(a["value"].is_boolean());
      }
  EXPECT_TRUE(saw_bool_value);
}

TEST(Manifest, SchemaErrorsNameTheOffendingElement) {
  EXPECT_EQ(tampered([](json&) {}), "accepted");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0].erase("shader_file"); }), "entry_points[0].shader_file");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["group_size"] = "8x8"; }), "entry_points[0].group_size");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["group_size"][1] = 0; }), "entry_points[0].group_size[1]");
  EXPECT_EQ(tampered([](json& j) { j["schema_version"] = 2; }), "schema_version");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["variants"][3]["defines"][1]["value"] = 5; }),
            "entry_points[0].variants[3].defines");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["variants"][3]["values"][0]["value"] = 3; }),
            "entry_points[0].variants[3].values[0].value");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["variants"][1]["variant_id"] = 7; }),
            "entry_points[0].variants[1].variant_id");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["impl_classes"][2]["impl_id"] = 0; }),
            "entry_points[0].impl_classes[2].impl_id");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["impl_classes"][0]["bindings"][0]["class"] = "Foo"; }),
            "entry_points[0].impl_classes[0].bindings[0].class");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["spec_params"][1]["kind"] = "float"; }),
            "entry_points[0].spec_params[1].kind");
  EXPECT_EQ(tampered([](json& j) { j["entry_points"][0]["variants"][0]["impl_id"] = 9; }),
            "entry_points[0].variants[0].impl_id");
  EXPECT_EQ(schema_path_of("{ not json"), "");
}

}  // namespace
}  // namespace uscc
