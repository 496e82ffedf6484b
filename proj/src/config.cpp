#include "strata/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_ENABLE_FORMATTERS 0
#include "toml.hpp"

namespace strata {

namespace {

[[noreturn]] void fail(std::string_view where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, std::string(where) + ": " + what);
}

std::string position(std::string_view source, const toml::node& node) {
  const auto& b = node.source().begin;
  return std::string(source) + ":" + std::to_string(b.line) + ":" + std::to_string(b.column);
}

class Reader {
 public:
  Reader(const toml::table& table, std::string source, std::string context)
      : table_(table), source_(std::move(source)), context_(std::move(context)) {}

  const toml::node* find(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }

  const toml::node& need(std::string_view key) {
    const auto* n = find(key);
    if (!n) fail(source_, context_ + " is missing '" + std::string(key) + "'");
    return *n;
  }

  std::string where(const toml::node& n) const { return position(source_, n); }

  double number(const toml::node& n) const {
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_integer()) return static_cast<double>(v->get());
    fail(where(n), "expected a number");
  }

  std::int64_t integer(const toml::node& n) const {
    if (auto v = n.as_integer()) return v->get();
    fail(where(n), "expected an integer");
  }

  std::string string(const toml::node& n) const {
    if (auto v = n.as_string()) return v->get();
    fail(where(n), "expected a string");
  }

  const toml::array& array(const toml::node& n) const {
    if (auto a = n.as_array()) return *a;
    fail(where(n), "expected an array");
  }

  std::vector<double> numbers(const toml::node& n) const {
    std::vector<double> out;
    for (const auto& e : array(n)) out.push_back(number(e));
    return out;
  }

  std::vector<std::vector<double>> number_rows(const toml::node& n) const {
    std::vector<std::vector<double>> out;
    for (const auto& e : array(n)) out.push_back(numbers(e));
    return out;
  }

  std::vector<std::int64_t> integers(const toml::node& n) const {
    std::vector<std::int64_t> out;
    for (const auto& e : array(n)) out.push_back(integer(e));
    return out;
  }

  std::size_t count(const toml::node& n) const {
    const auto v = integer(n);
    if (v < 0) fail(where(n), "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  void reject_unknown() const {
    for (const auto& [key, node] : table_) {
      if (!seen_.contains(std::string(key.str()))) {
        fail(where(node), "unknown key '" + std::string(key.str()) + "' in " + context_);
      }
    }
  }

 private:
  const toml::table& table_;
  std::string source_;
  std::string context_;
  std::set<std::string> seen_;
};

DensityGrid read_density(Reader& r, bool segment) {
  DensityGrid g;
  const auto* breaks = r.find("breaks");
  const auto* masses = r.find("masses");
  if (!breaks && !masses) return g;
  if (!breaks || !masses) fail(r.where(breaks ? *breaks : *masses), "'breaks' and 'masses' must be given together");
  if (segment) {
    g.breaks.push_back(r.numbers(*breaks));
  } else {
    g.breaks = r.number_rows(*breaks);
  }
  g.masses = r.numbers(*masses);
  return g;
}

WeightedShape read_component(const toml::table& table, std::string_view source, std::size_t index) {
  Reader r(table, std::string(source), "component " + std::to_string(index + 1));
  WeightedShape ws;
  ws.weight = r.number(r.need("weight"));
  const auto& kind_node = r.need("kind");
  const std::string kind = r.string(kind_node);
  if (kind == "atoms") {
    AtomSet a;
    a.points = r.number_rows(r.need("points"));
    a.pmf = r.numbers(r.need("pmf"));
    ws.shape = std::move(a);
  } else if (kind == "segment") {
    Segment s;
    s.start = r.numbers(r.need("start"));
    s.end = r.numbers(r.need("end"));
    s.density = read_density(r, true);
    ws.shape = std::move(s);
  } else if (kind == "patch") {
    AxisPatch p;
    p.anchor = r.numbers(r.need("anchor"));
    for (auto ax : r.integers(r.need("axes"))) p.axes.push_back(static_cast<int>(ax));
    p.sides = r.numbers(r.need("sides"));
    p.density = read_density(r, false);
    ws.shape = std::move(p);
  } else if (kind == "box") {
    auto lower = r.numbers(r.need("lower"));
    auto upper = r.numbers(r.need("upper"));
    if (lower.size() != upper.size()) fail(r.where(table), "box 'lower' and 'upper' differ in length");
    ws.shape = make_box(std::move(lower), std::move(upper), read_density(r, false));
  } else {
    fail(r.where(kind_node), "unknown component kind '" + kind + "' (expected atoms, segment, patch or box)");
  }
  r.reject_unknown();
  return ws;
}

ExperimentSection read_experiment(const toml::table& table, std::string_view source) {
  Reader r(table, std::string(source), "[experiment]");
  ExperimentSection e;
  if (const auto* n = r.find("kind")) e.kind = r.string(*n);
  if (const auto* n = r.find("seed")) {
    const auto v = r.integer(*n);
    if (v < 0) fail(r.where(*n), "seed must be nonnegative");
    e.seed = static_cast<std::uint64_t>(v);
  }
  if (const auto* n = r.find("n")) {
    std::vector<std::size_t> ns;
    for (const auto& v : r.array(*n)) ns.push_back(r.count(v));
    e.n = std::move(ns);
  }
  if (const auto* n = r.find("delta")) e.delta = r.number(*n);
  if (const auto* n = r.find("xi")) e.xi = r.number(*n);
  if (const auto* n = r.find("trials")) e.trials = r.count(*n);
  if (const auto* n = r.find("levels")) {
    std::vector<int> levels;
    for (auto v : r.integers(*n)) levels.push_back(static_cast<int>(v));
    if (levels.size() != 2) fail(r.where(*n), "levels must be [first, last]");
    e.levels = std::move(levels);
  }
  if (const auto* n = r.find("out")) e.out = r.string(*n);
  r.reject_unknown();
  return e;
}

// Shortest decimal that reads back to the same double; always has a '.' or
// exponent so TOML reads it as a float.
std::string float_text(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string float_list(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + float_text(v[i]);
  return s + "]";
}

std::string float_rows(std::span<const std::vector<double>> rows) {
  std::string s = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? ", " : "") + float_list(rows[i]);
  return s + "]";
}

template <class Int>
std::string int_list(std::span<const Int> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(static_cast<unsigned char>(c)));
      out += buf;
      continue;
    }
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void write_density(std::ostringstream& out, const DensityGrid& g, bool segment) {
  if (g.breaks.empty()) return;
  out << "breaks = " << (segment ? float_list(g.breaks.front()) : float_rows(g.breaks)) << "\n";
  out << "masses = " << float_list(g.masses) << "\n";
}

}  // namespace

MeasureConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    fail(std::string(source) + ":" + std::to_string(b.line) + ":" + std::to_string(b.column),
         std::string(e.description()));
  }
  Reader r(root, std::string(source), "the top level");
  MeasureConfig c;
  c.ambient_dimension = r.count(r.need("ambient_dimension"));
  const auto& comps = r.array(r.need("component"));
  std::size_t index = 0;
  for (const auto& node : comps) {
    const auto* t = node.as_table();
    if (!t) fail(r.where(node), "each [[component]] must be a table");
    c.components.push_back(read_component(*t, source, index++));
  }
  if (c.components.empty()) fail(source, "at least one [[component]] is required");
  if (const auto* n = r.find("experiment")) {
    const auto* t = n->as_table();
    if (!t) fail(r.where(*n), "[experiment] must be a table");
    c.experiment = read_experiment(*t, source);
  }
  r.reject_unknown();
  return c;
}

MeasureConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string write_config(const MeasureConfig& config) {
  std::ostringstream out;
  out << "ambient_dimension = " << config.ambient_dimension << "\n";
  if (config.experiment) {
    const auto& e = *config.experiment;
    out << "\n[experiment]\n";
    if (e.kind) out << "kind = " << toml_string(*e.kind) << "\n";
    if (e.seed) {
      // TOML integers are signed 64-bit.
      require(*e.seed <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()), ErrorCode::ConfigError,
              "seed " + std::to_string(*e.seed) + " does not fit a TOML integer");
      out << "seed = " << *e.seed << "\n";
    }
    if (e.n) out << "n = " << int_list<std::size_t>(*e.n) << "\n";
    if (e.delta) out << "delta = " << float_text(*e.delta) << "\n";
    if (e.xi) out << "xi = " << float_text(*e.xi) << "\n";
    if (e.trials) out << "trials = " << *e.trials << "\n";
    if (e.levels) out << "levels = " << int_list<int>(*e.levels) << "\n";
    if (e.out) out << "out = " << toml_string(*e.out) << "\n";
  }
  for (const auto& ws : config.components) {
    out << "\n[[component]]\n";
    out << "kind = " << toml_string(shape::kind_name(ws.shape)) << "\n";
    out << "weight = " << float_text(ws.weight) << "\n";
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, AtomSet>) {
            out << "points = " << float_rows(s.points) << "\n";
            out << "pmf = " << float_list(s.pmf) << "\n";
          } else if constexpr (std::is_same_v<T, Segment>) {
            out << "start = " << float_list(s.start) << "\n";
            out << "end = " << float_list(s.end) << "\n";
            write_density(out, s.density, true);
          } else if (s.box_upper) {
            out << "lower = " << float_list(s.anchor) << "\n";
            out << "upper = " << float_list(*s.box_upper) << "\n";
            write_density(out, s.density, false);
          } else {
            out << "anchor = " << float_list(s.anchor) << "\n";
            out << "axes = " << int_list<int>(s.axes) << "\n";
            out << "sides = " << float_list(s.sides) << "\n";
            write_density(out, s.density, false);
          }
        },
        ws.shape);
  }
  return out.str();
}

std::vector<Diagnostic> validate_config(const MeasureConfig& config) {
  auto out = validate_components(config.components);
  for (std::size_t i = 0; i < config.components.size(); ++i) {
    const auto d = shape::ambient(config.components[i].shape);
    if (d != config.ambient_dimension) {
      out.push_back({ErrorCode::AmbientMismatch, "component " + std::to_string(i + 1) + " lives in dimension " +
                                                     std::to_string(d) + " but ambient_dimension is " +
                                                     std::to_string(config.ambient_dimension)});
    }
  }
  if (const auto& e = config.experiment) {
    if (e->xi && !(*e->xi > 0.0 && *e->xi < 0.5)) {
      out.push_back({ErrorCode::BadExponent, "xi must lie in (0, 1/2)"});
    }
    if (e->delta && !(*e->delta >= 0.0)) {
      out.push_back({ErrorCode::PreconditionViolation, "delta must be nonnegative"});
    }
    if (e->levels && (*e->levels)[0] > (*e->levels)[1]) {
      out.push_back({ErrorCode::PreconditionViolation, "levels must be increasing"});
    }
  }
  return out;
}

}  // namespace strata
