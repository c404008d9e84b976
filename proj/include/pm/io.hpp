#pragma once

// JSON instance files and state dumps.
//
//   {"dimension": d, "domain": {"min": [...], "max": [...]}, "cutoff": r_c,
//    "method": {"name": ..., "params": {...}},
//    "global": {"t": 1, "t_max": T, ...extras},
//    "particles": [{"id": 0, "x": [...], "props": {"h": 10, ...}}, ...]}
//
// Dumps list particles sorted by id and print doubles in shortest round-trip
// form, so dump -> load -> dump reproduces the same bytes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pm/cell_grid.hpp"
#include "pm/core.hpp"
#include "pm/index_space.hpp"
#include "pm/methods.hpp"

namespace pm {

using Json = nlohmann::ordered_json;

namespace detail {

struct DecimalForm {
  bool negative = false;
  std::string digits;  // no leading or trailing zeros; empty for zero
  long exponent = 0;   // value = 0.digits * 10^exponent
  friend bool operator==(const DecimalForm&, const DecimalForm&) = default;
};

inline DecimalForm normalize_decimal(const std::string& text) {
  DecimalForm f;
  std::string mant = text;
  long e = 0;
  if (auto pos = text.find_first_of("eE"); pos != std::string::npos) {
    mant = text.substr(0, pos);
    e = std::stol(text.substr(pos + 1));
  }
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    f.negative = mant[0] == '-';
    mant.erase(0, 1);
  }
  const auto dot = mant.find('.');
  const std::string ip = mant.substr(0, dot);
  const std::string fp = dot == std::string::npos ? "" : mant.substr(dot + 1);
  f.digits = ip + fp;
  f.exponent = static_cast<long>(ip.size()) + e;
  std::size_t lead = 0;
  while (lead < f.digits.size() && f.digits[lead] == '0') ++lead;
  f.digits.erase(0, lead);
  f.exponent -= static_cast<long>(lead);
  while (!f.digits.empty() && f.digits.back() == '0') f.digits.pop_back();
  if (f.digits.empty()) f = DecimalForm{};
  return f;
}

/// True when the decimal literal denotes exactly the double it parses to.
inline bool decimal_is_exact(const std::string& text, double parsed) {
  std::vector<char> buf(1100);
  std::snprintf(buf.data(), buf.size(), "%.800e", parsed);  // exact expansion, every double has < 770 digits
  return normalize_decimal(text) == normalize_decimal(buf.data());
}

/// Accepted position literals: exact decimals, and machine-written values,
/// i.e. the shortest round-trip form of a double with at least 15
/// significant digits. Short inexact literals such as 0.1 are rejected.
inline bool position_literal_ok(const std::string& text, double parsed) {
  if (decimal_is_exact(text, parsed)) return true;
  const DecimalForm f = normalize_decimal(text);
  return f.digits.size() >= 15 && f == normalize_decimal(Json(parsed).dump());
}

/// Records the literal text of every floating-point number together with its
/// JSON pointer.
class FloatLiteralCollector : public Json::json_sax_t {
 public:
  struct Literal {
    std::string pointer;
    std::string text;
    double value;
  };
  std::vector<Literal> literals;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t v, const string_t& s) override {
    literals.push_back({pointer(), s, v});
    return value();
  }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    stack_.push_back({false, 0, {}});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = k;
    return true;
  }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override {
    stack_.push_back({true, 0, {}});
    return true;
  }
  bool end_array() override { return close(); }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };
  std::vector<Frame> stack_;

  std::string pointer() const {
    std::string p;
    for (const Frame& f : stack_) p += "/" + (f.array ? std::to_string(f.index) : f.key);
    return p;
  }
  bool value() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
    return true;
  }
  bool close() {
    stack_.pop_back();
    return value();
  }
};

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw InputError("field '" + path + "' must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError("missing field '" + path + "/" + key + "'");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError("field '" + path + "' must be a number");
  return j.get<double>();
}

inline std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError("field '" + path + "' must be an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw InputError("field '" + path + "' is out of range");
  return j.get<std::int64_t>();
}

inline Scalar scalar(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return integer(j, path);
  if (j.is_number_float()) return j.get<double>();
  throw InputError("field '" + path + "' must be a number");
}

inline Json scalar_json(const Scalar& s) {
  if (is_integer(s)) return std::get<std::int64_t>(s);
  return std::get<double>(s);
}

inline Position vector_field(const Json& j, int d, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw InputError("field '" + path + "' must be an array of " + std::to_string(d) + " numbers");
  Position x{};
  for (int l = 0; l < d; ++l) x[l] = number(j[static_cast<std::size_t>(l)], path + "/" + std::to_string(l));
  return x;
}

inline Json vector_json(const Position& x, int d) {
  Json a = Json::array();
  for (int l = 0; l < d; ++l) a.push_back(x[l]);
  return a;
}

}  // namespace detail

inline Instance instance_from_json(const Json& doc) {
  using namespace detail;
  Instance inst;
  const std::int64_t d = integer(field(doc, "dimension", ""), "/dimension");
  if (d < 1 || d > kMaxDim) throw InputError("field '/dimension' must be in 1.." + std::to_string(kMaxDim));
  inst.domain.d = static_cast<int>(d);
  const Json& dom = field(doc, "domain", "");
  inst.domain.min = vector_field(field(dom, "min", "/domain"), inst.domain.d, "/domain/min");
  inst.domain.max = vector_field(field(dom, "max", "/domain"), inst.domain.d, "/domain/max");
  inst.cutoff = number(field(doc, "cutoff", ""), "/cutoff");

  const Json& method = field(doc, "method", "");
  const Json& name = field(method, "name", "/method");
  if (!name.is_string()) throw InputError("field '/method/name' must be a string");
  inst.method.name = name.get<std::string>();
  if (auto it = method.find("params"); it != method.end()) {
    if (!it->is_object()) throw InputError("field '/method/params' must be an object");
    for (const auto& [k, v] : it->items()) inst.method.values[k] = scalar(v, "/method/params/" + k);
  }

  const Json& global = field(doc, "global", "");
  if (!global.is_object()) throw InputError("field '/global' must be an object");
  for (const auto& [k, v] : global.items()) {
    if (k == "t") inst.state.g.t = integer(v, "/global/t");
    else if (k == "t_max") inst.state.g.t_max = integer(v, "/global/t_max");
    else inst.state.g.extras[k] = scalar(v, "/global/" + k);
  }
  if (!global.contains("t_max")) throw InputError("missing field '/global/t_max'");

  AlgorithmSpec spec;
  try {
    inst.domain.validate();
    spec = instantiate(inst.method, inst.domain, inst.cutoff);
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.what());
  }

  const Json& parts = field(doc, "particles", "");
  if (!parts.is_array()) throw InputError("field '/particles' must be an array");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string path = "/particles/" + std::to_string(i);
    const Json& pj = parts[i];
    Particle p;
    const Json& id = field(pj, "id", path);
    if (!id.is_number_integer() || (id.is_number_integer() && !id.is_number_unsigned() && id.get<std::int64_t>() < 0))
      throw InputError("field '" + path + "/id' must be a non-negative integer");
    p.id = id.get<std::uint64_t>();
    p.x = vector_field(field(pj, "x", path), inst.domain.d, path + "/x");
    p.props = zero_props(spec);
    if (auto it = pj.find("props"); it != pj.end()) {
      if (!it->is_object()) throw InputError("field '" + path + "/props' must be an object");
      for (const auto& [k, v] : it->items()) {
        const std::string pp = path + "/props/" + k;
        std::size_t idx = 0;
        try {
          idx = spec.property_index(k);
        } catch (const Error&) {
          throw InputError("field '" + pp + "' is not a property of " + spec.name);
        }
        if (spec.properties[idx].kind == PropertyKind::Integer) p.props[idx] = integer(v, pp);
        else p.props[idx] = number(v, pp);
      }
    }
    inst.state.particles.push_back(std::move(p));
  }

  try {
    validate(inst);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  return inst;
}

/// Parses and validates an instance document. Methods with exact arithmetic
/// additionally require every position literal to be exactly representable.
inline Instance parse_instance(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  Instance inst = instance_from_json(doc);
  if (instantiate(inst).exact()) {
    detail::FloatLiteralCollector c;
    Json::sax_parse(text, &c);
    for (const auto& lit : c.literals) {
      const bool is_position = lit.pointer.rfind("/particles/", 0) == 0 &&
                               lit.pointer.find("/x/") != std::string::npos;
      if (is_position && !detail::position_literal_ok(lit.text, lit.value))
        throw InputError("field '" + lit.pointer + "' = " + lit.text +
                         " is not exactly representable in binary (required for exact methods)");
    }
  }
  return inst;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

inline Json instance_to_json(const Instance& inst) {
  using namespace detail;
  const AlgorithmSpec spec = instantiate(inst);
  Json doc;
  doc["dimension"] = inst.domain.d;
  doc["domain"] = {{"min", vector_json(inst.domain.min, inst.domain.d)},
                   {"max", vector_json(inst.domain.max, inst.domain.d)}};
  doc["cutoff"] = inst.cutoff;
  Json params = Json::object();
  for (const auto& [k, v] : inst.method.values) params[k] = scalar_json(v);
  doc["method"] = {{"name", inst.method.name}, {"params", params}};
  Json global = {{"t", inst.state.g.t}, {"t_max", inst.state.g.t_max}};
  for (const auto& [k, v] : inst.state.g.extras) global[k] = scalar_json(v);
  doc["global"] = global;

  std::vector<const Particle*> order;
  for (const Particle& p : inst.state.particles) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Particle* a, const Particle* b) { return a->id < b->id; });
  Json parts = Json::array();
  for (const Particle* p : order) {
    Json props = Json::object();
    for (std::size_t i = 0; i < spec.properties.size() && i < p->props.size(); ++i)
      props[spec.properties[i].name] = scalar_json(p->props[i]);
    parts.push_back({{"id", p->id}, {"x", vector_json(p->x, inst.domain.d)}, {"props", props}});
  }
  doc["particles"] = parts;
  return doc;
}

inline std::string dump_instance(const Instance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

/// The instance with its state replaced, for writing final states.
inline Instance with_state(const Instance& inst, State state) {
  Instance out = inst;
  out.state = std::move(state);
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Digest of the canonical dump; independent of particle order.
inline std::string state_digest(const Instance& inst, const State& state) {
  return hex64(fnv1a64(dump_instance(with_state(inst, state))));
}

/// Per-process view of a distributed state: the cell, the local copy of t and
/// the ids held in each non-empty compartment.
inline Json distributed_to_json(const DistributedState& s, const CellGrid& grid) {
  Json procs = Json::array();
  for (std::int64_t w = 1; w <= static_cast<std::int64_t>(s.processes()); ++w) {
    const IndexVec c = to_vec(w, grid.dims);
    Json cell = Json::array();
    for (int l = 0; l < c.d; ++l) cell.push_back(c[l]);
    Json comps = Json::array();
    const ProcessStorage& st = s.storage(w);
    for (std::int64_t l = 1; l <= static_cast<std::int64_t>(st.compartments.size()); ++l) {
      if (st.at(l).empty()) continue;
      Json ids = Json::array();
      for (const Particle& p : st.at(l)) ids.push_back(p.id);
      comps.push_back({{"compartment", l}, {"ids", ids}});
    }
    procs.push_back({{"process", w}, {"cell", cell}, {"t", s.globals[static_cast<std::size_t>(w - 1)].t},
                     {"compartments", comps}});
  }
  return {{"n_cell", grid.n_cell()}, {"processes", procs}};
}

}  // namespace pm
