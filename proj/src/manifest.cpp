#include "uscc/manifest.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "uscc/codegen.hpp"

namespace uscc {

using Json = nlohmann::ordered_json;

const ManifestSpecParam* EntryPoint::find_param(std::string_view path) const {
  for (const auto& p : spec_params)
    if (p.path == path) return &p;
  return nullptr;
}

const EntryPoint* Manifest::find_entry(std::string_view entry_class) const {
  for (const auto& e : entry_points)
    if (e.entry_class == entry_class) return &e;
  return nullptr;
}

Manifest emit_manifest(const std::vector<SpecSpace>& spaces, const Registry& registry) {
  Manifest m;
  m.tool_version = kToolVersion;
  for (const auto& space : spaces) {
    const auto& cls = registry.get_class(space.entry_class);
    EntryPoint ep;
    ep.entry_class = space.entry_class;
    ep.shader_file = "shaders/" + space.entry_class + ".hlsl";
    if (const auto* e = cls.entry_method()) ep.group_size = e->entry_group_size.value_or(std::array<int, 3>{1, 1, 1});
    for (const auto& u : space.uniforms)
      ep.uniforms.push_back({u.path, u.uniform.gpu_type.spelling(), u.uniform.declaring_class});
    for (const auto& p : space.params) {
      ep.spec_params.push_back({p.path, p.param.kind, p.param.declaring_class, p.param.options});
      if (p.param.kind == SpecKind::ShaderClassRef)
        for (const auto& o : p.param.options) ep.type_tags[o.label] = static_cast<int>(o.value);
    }
    ep.impl_classes = space.impl_classes;
    ep.variants = space.variants;
    m.entry_points.push_back(std::move(ep));
  }
  return m;
}

namespace {

Json option_json(SpecKind kind, const SpecOption& o) {
  switch (kind) {
    case SpecKind::Bool:
      return o.value != 0;
    case SpecKind::SparseInt:
      return o.value;
    case SpecKind::Enum:
      return Json{{"name", o.label}, {"value", o.value}};
    case SpecKind::ShaderClassRef:
      return o.label;
  }
  return nullptr;
}

Json value_json(SpecKind kind, std::int64_t v) {
  if (kind == SpecKind::Bool) return v != 0;
  return v;
}

}  // namespace

std::string serialize_manifest(const Manifest& manifest) {
  Json root;
  root["schema_version"] = manifest.schema_version;
  root["tool_version"] = manifest.tool_version;
  root["entry_points"] = Json::array();
  for (const auto& ep : manifest.entry_points) {
    Json e;
    e["entry_class"] = ep.entry_class;
    e["shader_file"] = ep.shader_file;
    e["group_size"] = Json::array({ep.group_size[0], ep.group_size[1], ep.group_size[2]});
    e["uniforms"] = Json::array();
    for (const auto& u : ep.uniforms)
      e["uniforms"].push_back({{"path", u.path}, {"gpu_type", u.gpu_type}, {"declaring_class", u.declaring_class}});
    e["spec_params"] = Json::array();
    for (const auto& p : ep.spec_params) {
      Json options = Json::array();
      for (const auto& o : p.options) options.push_back(option_json(p.kind, o));
      e["spec_params"].push_back({{"path", p.path},
                                  {"kind", std::string(to_string(p.kind))},
                                  {"declaring_class", p.declaring_class},
                                  {"options", options}});
    }
    e["type_tags"] = Json::object();
    for (const auto& [cls, tag] : ep.type_tags) e["type_tags"][cls] = tag;
    e["impl_classes"] = Json::array();
    for (const auto& impl : ep.impl_classes) {
      Json bindings = Json::array();
      for (const auto& b : impl.bindings) bindings.push_back({{"path", b.path}, {"class", b.class_name}});
      e["impl_classes"].push_back({{"impl_id", impl.impl_id}, {"bindings", bindings}});
    }
    e["variants"] = Json::array();
    for (const auto& v : ep.variants) {
      Json values = Json::array();
      for (const auto& val : v.values) {
        const auto* p = ep.find_param(val.path);
        values.push_back({{"path", val.path}, {"value", value_json(p ? p->kind : SpecKind::SparseInt, val.value)}});
      }
      Json defines = Json::array();
      for (const auto& d : v.defines) defines.push_back({{"name", d.name}, {"value", d.value}});
      e["variants"].push_back(
          {{"variant_id", v.variant_id}, {"impl_id", v.impl_id}, {"values", values}, {"defines", defines}});
    }
    root["entry_points"].push_back(std::move(e));
  }
  return root.dump(2) + "\n";
}

namespace {

class Reader {
 public:
  const Json& field(const Json& obj, const std::string& key, const std::string& path) const {
    object(obj, path);
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(join(path, key), "missing required field");
    return *it;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  void object(const Json& j, const std::string& path) const {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
  }
  const Json& array(const Json& j, const std::string& path) const {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    return j;
  }
  std::string string(const Json& obj, const std::string& key, const std::string& path) const {
    const auto& j = field(obj, key, path);
    if (!j.is_string()) throw SchemaError(join(path, key), "expected a string");
    return j.get<std::string>();
  }
  std::int64_t integer(const Json& j, const std::string& path) const {
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    return j.get<std::int64_t>();
  }
  std::int64_t integer(const Json& obj, const std::string& key, const std::string& path) const {
    return integer(field(obj, key, path), join(path, key));
  }
};

SpecOption read_option(const Reader& r, SpecKind kind, const Json& j, const std::string& path,
                       const std::map<std::string, int>& tags) {
  switch (kind) {
    case SpecKind::Bool:
      if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
      return j.get<bool>() ? SpecOption{1, "true"} : SpecOption{0, "false"};
    case SpecKind::SparseInt: {
      auto v = r.integer(j, path);
      return {v, std::to_string(v)};
    }
    case SpecKind::Enum:
      return {r.integer(j, "value", path), r.string(j, "name", path)};
    case SpecKind::ShaderClassRef: {
      if (!j.is_string()) throw SchemaError(path, "expected a class name");
      auto name = j.get<std::string>();
      auto it = tags.find(name);
      if (it == tags.end()) throw SchemaError(path, "class '" + name + "' has no type tag");
      return {it->second, name};
    }
  }
  throw SchemaError(path, "unknown kind");
}

std::int64_t read_value(const Reader& r, SpecKind kind, const Json& j, const std::string& path) {
  if (kind == SpecKind::Bool) {
    if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
    return j.get<bool>() ? 1 : 0;
  }
  return r.integer(j, path);
}

EntryPoint read_entry(const Reader& r, const Json& j, const std::string& path) {
  EntryPoint ep;
  ep.entry_class = r.string(j, "entry_class", path);
  ep.shader_file = r.string(j, "shader_file", path);
  {
    const std::string p = Reader::join(path, "group_size");
    const auto& gs = r.array(r.field(j, "group_size", path), p);
    if (gs.size() != 3) throw SchemaError(p, "expected three integers");
    for (std::size_t i = 0; i < 3; ++i) {
      auto v = r.integer(gs[i], Reader::at(p, i));
      if (v <= 0) throw SchemaError(Reader::at(p, i), "group size must be positive");
      ep.group_size[i] = static_cast<int>(v);
    }
  }
  {
    const std::string p = Reader::join(path, "uniforms");
    const auto& us = r.array(r.field(j, "uniforms", path), p);
    for (std::size_t i = 0; i < us.size(); ++i) {
      auto up = Reader::at(p, i);
      ep.uniforms.push_back({r.string(us[i], "path", up), r.string(us[i], "gpu_type", up),
                             r.string(us[i], "declaring_class", up)});
    }
  }
  {
    const std::string p = Reader::join(path, "type_tags");
    const auto& tags = r.field(j, "type_tags", path);
    r.object(tags, p);
    for (const auto& [cls, tag] : tags.items()) ep.type_tags[cls] = static_cast<int>(r.integer(tag, p + "." + cls));
  }
  std::set<std::string> param_paths;
  {
    const std::string p = Reader::join(path, "spec_params");
    const auto& ps = r.array(r.field(j, "spec_params", path), p);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto pp = Reader::at(p, i);
      ManifestSpecParam sp;
      sp.path = r.string(ps[i], "path", pp);
      auto kind = spec_kind_from_string(r.string(ps[i], "kind", pp));
      if (!kind) throw SchemaError(Reader::join(pp, "kind"), "unknown parameter kind");
      sp.kind = *kind;
      sp.declaring_class = r.string(ps[i], "declaring_class", pp);
      const auto op = Reader::join(pp, "options");
      const auto& os = r.array(r.field(ps[i], "options", pp), op);
      if (os.empty()) throw SchemaError(op, "option list is empty");
      for (std::size_t k = 0; k < os.size(); ++k)
        sp.options.push_back(read_option(r, sp.kind, os[k], Reader::at(op, k), ep.type_tags));
      if (!param_paths.insert(sp.path).second) throw SchemaError(Reader::join(pp, "path"), "duplicate parameter");
      ep.spec_params.push_back(std::move(sp));
    }
  }
  {
    const std::string p = Reader::join(path, "impl_classes");
    const auto& is = r.array(r.field(j, "impl_classes", path), p);
    for (std::size_t i = 0; i < is.size(); ++i) {
      auto ip = Reader::at(p, i);
      ImplClassBinding impl;
      impl.entry_class = ep.entry_class;
      impl.impl_id = static_cast<int>(r.integer(is[i], "impl_id", ip));
      if (impl.impl_id != static_cast<int>(i)) throw SchemaError(Reader::join(ip, "impl_id"), "ids must be dense");
      const auto bp = Reader::join(ip, "bindings");
      const auto& bs = r.array(r.field(is[i], "bindings", ip), bp);
      for (std::size_t k = 0; k < bs.size(); ++k) {
        auto kp = Reader::at(bp, k);
        Binding b{r.string(bs[k], "path", kp), r.string(bs[k], "class", kp)};
        const auto* param = ep.find_param(b.path);
        if (!param || param->kind != SpecKind::ShaderClassRef)
          throw SchemaError(Reader::join(kp, "path"), "not a shader_class parameter");
        bool listed = std::any_of(param->options.begin(), param->options.end(),
                                  [&](const SpecOption& o) { return o.label == b.class_name; });
        if (!listed) throw SchemaError(Reader::join(kp, "class"), "class is not an option of '" + b.path + "'");
        impl.bindings.push_back(std::move(b));
      }
      ep.impl_classes.push_back(std::move(impl));
    }
  }
  {
    const std::string p = Reader::join(path, "variants");
    const auto& vs = r.array(r.field(j, "variants", path), p);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      auto vp = Reader::at(p, i);
      VariantDefineSet v;
      v.variant_id = static_cast<int>(r.integer(vs[i], "variant_id", vp));
      if (v.variant_id != static_cast<int>(i)) throw SchemaError(Reader::join(vp, "variant_id"), "ids must be dense");
      v.impl_id = static_cast<int>(r.integer(vs[i], "impl_id", vp));
      if (v.impl_id < 0 || v.impl_id >= static_cast<int>(ep.impl_classes.size()))
        throw SchemaError(Reader::join(vp, "impl_id"), "no such ImplClass");
      const auto valp = Reader::join(vp, "values");
      const auto& vals = r.array(r.field(vs[i], "values", vp), valp);
      for (std::size_t k = 0; k < vals.size(); ++k) {
        auto kp = Reader::at(valp, k);
        ValueAssignment a;
        a.path = r.string(vals[k], "path", kp);
        const auto* param = ep.find_param(a.path);
        if (!param || param->kind == SpecKind::ShaderClassRef)
          throw SchemaError(Reader::join(kp, "path"), "not a basic parameter");
        a.value = read_value(r, param->kind, r.field(vals[k], "value", kp), Reader::join(kp, "value"));
        bool listed = std::any_of(param->options.begin(), param->options.end(),
                                  [&](const SpecOption& o) { return o.value == a.value; });
        if (!listed)
          throw SchemaError(Reader::join(kp, "value"),
                            "value " + std::to_string(a.value) + " is not an option of '" + a.path + "'");
        v.values.push_back(std::move(a));
      }
      const auto dp = Reader::join(vp, "defines");
      const auto& ds = r.array(r.field(vs[i], "defines", vp), dp);
      for (std::size_t k = 0; k < ds.size(); ++k) {
        auto kp = Reader::at(dp, k);
        v.defines.push_back({r.string(ds[k], "name", kp), r.integer(ds[k], "value", kp)});
      }
      const auto& impl = ep.impl_classes[static_cast<std::size_t>(v.impl_id)];
      if (encode_defines(impl.bindings, v.values, ep.type_tags) != v.defines)
        throw SchemaError(dp, "defines do not match the bindings and values");
      ep.variants.push_back(std::move(v));
    }
  }
  return ep;
}

}  // namespace

Manifest load_manifest(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  Reader r;
  Manifest m;
  m.schema_version = static_cast<int>(r.integer(root, "schema_version", ""));
  if (m.schema_version != kSchemaVersion)
    throw SchemaError("schema_version", "unsupported schema version " + std::to_string(m.schema_version));
  m.tool_version = r.string(root, "tool_version", "");
  const auto& eps = r.array(r.field(root, "entry_points", ""), "entry_points");
  for (std::size_t i = 0; i < eps.size(); ++i) m.entry_points.push_back(read_entry(r, eps[i], Reader::at("entry_points", i)));
  return m;
}

}  // namespace uscc
