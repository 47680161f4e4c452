#include "generator.hpp"

#include <memory>
#include <sstream>

namespace uscc::testing {

namespace {

struct ClassModel;

struct BasicParam {
  enum Kind { Bool, Sparse, Enum } kind;
  std::string name;
  std::vector<int> values;  // sparse options
};

struct Slot {
  std::string name;
  std::string base;  // abstract or concrete base class name
  std::vector<ClassModel*> options;
};

struct ClassModel {
  std::string name;
  ClassModel* base = nullptr;
  bool abstract = false;
  bool overrides_eval = false;
  bool overrides_bias = false;
  std::vector<BasicParam> basics;
  std::vector<Slot> slots;
  std::string uniform;  // optional float uniform
};

// Three enumerators with gaps, so enum values are not just indices.
constexpr std::uint64_t kEnumSize = 3;

class Generator {
 public:
  Generator(std::mt19937_64& rng, const GenLimits& limits) : rng_(rng), limits_(limits) {}

  GeneratedProgram run() {
    GeneratedProgram out;
    ClassModel* entry = make_class("GenEntry", nullptr);
    fill(entry, 0, /*is_entry=*/true);
    out.entry_class = entry->name;
    out.expected_impls = impls(entry);
    out.expected_variants = variants(entry);
    out.depth = max_depth_seen_;
    collect_sparse(entry, "", out.sparse_params);

    out.files.push_back({"Enums.usl", "enum class Mode { A, B = 5, C = 9 };\n"});
    for (const auto& c : classes_) out.files.push_back({c->name + ".usl", render(*c, c.get() == entry)});
    return out;
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  ClassModel* make_class(std::string name, ClassModel* base) {
    classes_.push_back(std::make_unique<ClassModel>());
    ClassModel* c = classes_.back().get();
    c->name = std::move(name);
    c->base = base;
    return c;
  }

  void add_basics(ClassModel* c) {
    int n = uniform(0, limits_.max_basic);
    for (int k = 0; k < n; ++k) {
      BasicParam p;
      p.name = "p" + std::to_string(next_id_++);
      int kind = uniform(0, 2);
      p.kind = kind == 0 ? BasicParam::Bool : kind == 1 ? BasicParam::Sparse : BasicParam::Enum;
      if (p.kind == BasicParam::Sparse) {
        int count = uniform(1, 4);
        int v = uniform(0, 3);
        for (int i = 0; i < count; ++i) {
          p.values.push_back(v);
          v += uniform(1, 5);
        }
      }
      c->basics.push_back(p);
    }
  }

  // Adds parameters and, below max_depth, ShaderClass slots.
  void fill(ClassModel* c, int depth, bool is_entry) {
    add_basics(c);
    if (coin()) c->uniform = "g" + std::to_string(next_id_++);
    if (depth >= limits_.max_depth) return;
    int slots = is_entry ? uniform(1, 2) : (coin(0.4) ? 1 : 0);
    for (int k = 0; k < slots; ++k) c->slots.push_back(make_slot(depth + 1));
  }

  Slot make_slot(int depth) {
    max_depth_seen_ = std::max(max_depth_seen_, depth);
    const int id = next_id_++;
    Slot s;
    s.name = "c" + std::to_string(id);
    ClassModel* base = make_class("S" + std::to_string(id) + "Base", nullptr);
    base->abstract = coin(0.7);
    s.base = base->name;
    if (!base->abstract) s.options.push_back(base);
    const int subtypes = uniform(base->abstract ? 1 : 0, limits_.max_subtypes - (base->abstract ? 0 : 1));
    ClassModel* prev = nullptr;
    for (int j = 0; j < subtypes; ++j) {
      ClassModel* parent = prev && coin(0.3) ? prev : base;
      ClassModel* sub = make_class("S" + std::to_string(id) + "Impl" + std::to_string(j), parent);
      // Subtypes of the abstract base must supply eval; deeper ones may not.
      sub->overrides_eval = parent->abstract || coin(0.6);
      sub->overrides_bias = coin(0.5);
      fill(sub, depth, false);
      s.options.push_back(sub);
      prev = sub;
    }
    return s;
  }

  std::vector<const ClassModel*> chain(const ClassModel* c) const {
    std::vector<const ClassModel*> out;
    for (; c; c = c->base) out.insert(out.begin(), c);
    return out;
  }

  std::uint64_t impls(const ClassModel* c) const {
    std::uint64_t n = 1;
    for (const auto* k : chain(c))
      for (const auto& s : k->slots) {
        std::uint64_t sum = 0;
        for (const auto* o : s.options) sum += impls(o);
        n *= sum;
      }
    return n;
  }

  std::uint64_t variants(const ClassModel* c) const {
    std::uint64_t n = 1;
    for (const auto* k : chain(c)) {
      for (const auto& p : k->basics)
        n *= p.kind == BasicParam::Bool ? 2 : p.kind == BasicParam::Enum ? kEnumSize : p.values.size();
      for (const auto& s : k->slots) {
        std::uint64_t sum = 0;
        for (const auto* o : s.options) sum += variants(o);
        n *= sum;
      }
    }
    return n;
  }

  void collect_sparse(const ClassModel* c, const std::string& prefix, std::vector<std::string>& out) const {
    for (const auto* k : chain(c))
      for (const auto& p : k->basics)
        if (p.kind == BasicParam::Sparse) out.push_back(prefix + p.name);
  }

  std::string render(const ClassModel& c, bool is_entry) const {
    std::ostringstream o;
    o << "class [[ShaderClass]] " << c.name;
    if (c.base) o << " : public " << c.base->name;
    o << " {\npublic:\n";
    if (is_entry) o << "  [[uniform]] RWTexture2D<float4> Output;\n  [[uniform]] float Scale;\n";
    if (!c.uniform.empty()) o << "  [[uniform]] float " << c.uniform << ";\n";
    for (const auto& p : c.basics) {
      if (p.kind == BasicParam::Bool) o << "  [[specialization_Bool]] bool " << p.name << ";\n";
      if (p.kind == BasicParam::Enum) o << "  [[specialization_Enum]] Mode " << p.name << ";\n";
      if (p.kind == BasicParam::Sparse) {
        o << "  [[specialization_SparseInt(";
        for (std::size_t i = 0; i < p.values.size(); ++i) o << (i ? ", " : "") << p.values[i];
        o << ")]] int " << p.name << ";\n";
      }
    }
    for (const auto& s : c.slots) o << "  [[specialization_ShaderClass]] " << s.base << "* " << s.name << ";\n";
    o << "\n";

    const bool is_root_slot_class = !is_entry && !c.base;
    if (is_root_slot_class) {
      if (c.abstract) {
        o << "  [[gpu]] virtual float eval(float x) const = 0;\n";
      } else {
        o << "  [[gpu]] virtual float eval(float x) const\n  {\n" << body(c, "x * 0.5") << "  }\n";
      }
      o << "  [[gpu]] virtual float bias() const\n  {\n    return 0.25;\n  }\n";
    } else if (!is_entry) {
      if (c.overrides_eval)
        o << "  [[gpu]] virtual float eval(float x) const override\n  {\n" << body(c, "x * 0.75 + bias()") << "  }\n";
      if (c.overrides_bias) o << "  [[gpu]] virtual float bias() const override\n  {\n    return 0.5;\n  }\n";
    } else {
      o << "  [[entry_ComputeShader(8, 8, 1)]]\n"
        << "  void MainCS([[SV_DispatchThreadID]] uint2 id) const\n  {\n"
        << "    float x = float(id.x) * 0.25 + float(id.y) * Scale;\n"
        << body_statements(c, "x")
        << "    Output[int2(id.x, id.y)] = float4(r, x, 0.0, 1.0);\n  }\n";
    }
    o << "};\n";
    return o.str();
  }

  // Statements computing `r` from everything the class declares.
  std::string body_statements(const ClassModel& c, const std::string& init) const {
    std::ostringstream o;
    o << "    float r = " << init << ";\n";
    for (const auto& p : c.basics) {
      if (p.kind == BasicParam::Bool) o << "    if (" << p.name << ") {\n      r = 1.0 - r;\n    }\n";
      if (p.kind == BasicParam::Enum) o << "    if (" << p.name << " == Mode::B) {\n      r = r * 2.0;\n    }\n";
      if (p.kind == BasicParam::Sparse)
        o << "    for (int i = 0; i < " << p.name << "; ++i) {\n      r = r + 0.125;\n    }\n";
    }
    if (!c.uniform.empty()) o << "    r = r + " << c.uniform << ";\n";
    for (const auto& s : c.slots) o << "    r = r + " << s.name << "->eval(r);\n";
    return o.str();
  }

  std::string body(const ClassModel& c, const std::string& init) const {
    return body_statements(c, init) + "    return r;\n";
  }

  std::mt19937_64& rng_;
  GenLimits limits_;
  std::vector<std::unique_ptr<ClassModel>> classes_;
  int next_id_ = 1;
  int max_depth_seen_ = 0;
};

}  // namespace

GeneratedProgram generate_program(std::mt19937_64& rng, const GenLimits& limits) {
  for (;;) {
    GeneratedProgram p = Generator(rng, limits).run();
    if (p.expected_variants <= limits.max_variants) return p;
  }
}

}  // namespace uscc::testing
