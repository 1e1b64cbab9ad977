#include "ctepa/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctepa/errors.hpp"

namespace ctepa::io {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json inequality(const std::optional<Inequality>& in) {
  if (!in) return nullptr;
  return Json{{"lhs", in->lhs}, {"rhs", in->rhs}, {"strict", in->strict}, {"holds", in->holds()},
              {"margin", in->margin()}};
}

}  // namespace

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double get_number(const Json& j, const char* key, const std::string& where, double fallback) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

Params params_from_json(const Json& j) {
  require_keys(j, {"k", "c_minus", "c_plus", "nu_minus", "nu_plus"}, "params");
  return validate(get_number(j, "k", "params"), get_number(j, "c_minus", "params"), get_number(j, "c_plus", "params"),
                  get_number(j, "nu_minus", "params"), get_number(j, "nu_plus", "params"));
}

Json to_json(const Params& p) {
  return Json{{"k", p.k}, {"c_minus", p.c_minus}, {"c_plus", p.c_plus}, {"nu_minus", p.nu_minus},
              {"nu_plus", p.nu_plus}};
}

Json to_json(const Regime& r) {
  return Json{{"alignment", std::string(to_string(r.label))},
              {"sub_scenario", std::string(to_string(r.sub))},
              {"sup_scenario", std::string(to_string(r.sup))}};
}

Json to_json(const CornerSet& cs) {
  const auto s_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->s) : std::nullopt; };
  const auto w_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->w) : std::nullopt; };
  const LocalConstants& z = cs.constants;
  return Json{{"w1", cs.sub.step1.w},
              {"s2", optional_number(s_of(cs.sub.step2))},
              {"w3", optional_number(w_of(cs.sub.step3))},
              {"s4", optional_number(s_of(cs.sub.step4))},
              {"w_star", optional_number(cs.sub.w_star)},
              {"sub_stop", cs.sub.stop_reason},
              {"wt1", cs.sup.step1.w},
              {"st2", optional_number(s_of(cs.sup.step2))},
              {"wt3", optional_number(w_of(cs.sup.step3))},
              {"wt_star", optional_number(cs.sup.w_star)},
              {"sup_stop", cs.sup.stop_reason},
              {"z1", optional_number(z.z1)},
              {"z2", optional_number(z.z2)},
              {"z3", optional_number(z.z3)},
              {"z4", optional_number(z.z4)},
              {"eta1", optional_number(z.eta1)},
              {"eta3", optional_number(z.eta3)}};
}

Json to_json(const Admissibility& a) {
  return Json{{"applicable", a.applicable},
              {"closure", a.closure()},
              {"closes", a.closes()},
              {"ac1", a.ac1},
              {"ac2", a.ac2},
              {"ac3", a.ac3},
              {"ac1e", inequality(a.ac1e)},
              {"ac2e", inequality(a.ac2e)},
              {"ac3e", inequality(a.ac3e)},
              {"ac3_explicit", inequality(a.ac3_explicit)},
              {"sup_s2", a.sup_s2},
              {"sup_w3", a.sup_w3},
              {"sup_wstar", a.sup_wstar}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string config_hash(const Json& config) {
  // Sorted keys make the hash independent of the order in the file.
  const std::string text = nlohmann::json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_header(const std::string& hash) {
  return std::string("# ctepa ") + kVersion + " config_hash=" + hash;
}

Json meta(const std::string& hash) {
  return Json{{"tool", "ctepa"}, {"version", kVersion}, {"config_hash", hash}};
}

}  // namespace ctepa::io
