#include "tac/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tac {

using nlohmann::json;

namespace {

int state_index(const Variable& v, const std::string& label, const std::string& where) {
  for (size_t i = 0; i < v.states.size(); ++i)
    if (v.states[i] == label) return static_cast<int>(i);
  throw ModelError(where + ": '" + label + "' is not a state of '" + v.name + "'");
}

std::vector<double> get_probs(const json& row, const char* key, int card,
                              const std::string& where) {
  if (!row.contains(key))
    throw ModelError(where + ": missing '" + key + "'");
  const json& arr = row.at(key);
  if (!arr.is_array() || (int)arr.size() != card)
    throw ModelError(where + ": '" + key + "' must list " + std::to_string(card) + " numbers");
  std::vector<double> out;
  for (const auto& x : arr) {
    if (!x.is_number()) throw ModelError(where + ": '" + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

TbnModel load_model(const std::string& text, bool auto_renormalize) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model parse error: ") + e.what());
  }

  if (!doc.is_object() || !doc.contains("variables") || !doc.contains("cpts"))
    throw ModelError("model file needs 'variables' and 'cpts'");

  std::vector<Variable> vars;
  for (const auto& jv : doc.at("variables")) {
    Variable v;
    if (!jv.contains("name") || !jv.contains("states"))
      throw ModelError("variable entry needs 'name' and 'states'");
    v.name = jv.at("name").get<std::string>();
    for (const auto& s : jv.at("states")) v.states.push_back(s.get<std::string>());
    vars.push_back(std::move(v));
  }

  auto find_var = [&](const std::string& name, const std::string& where) -> VarId {
    for (VarId i = 0; i < vars.size(); ++i)
      if (vars[i].name == name) return i;
    throw ModelError(where + ": unknown variable '" + name + "'");
  };

  std::vector<Cpt> cpts;
  for (const auto& jc : doc.at("cpts")) {
    if (!jc.contains("child"))
      throw ModelError("cpt entry needs 'child'");
    const std::string child_name = jc.at("child").get<std::string>();
    const std::string where = "cpt for '" + child_name + "'";
    Cpt c;
    c.child = find_var(child_name, where);
    if (jc.contains("parents"))
      for (const auto& p : jc.at("parents"))
        c.parents.push_back(find_var(p.get<std::string>(), where));

    const std::string kind = jc.value("kind", std::string("regular"));
    if (kind == "regular") c.kind = CptKind::Regular;
    else if (kind == "testing") c.kind = CptKind::Testing;
    else throw ModelError(where + ": kind must be 'regular' or 'testing'");

    std::vector<int> pcards;
    for (VarId p : c.parents) pcards.push_back(vars[p].card());
    const int64_t np = mixed_radix_size(pcards);
    const int card = vars[c.child].card();

    if (c.testing()) {
      c.thresholds.assign(np, -1.0);
      c.pos_entries.assign(np * card, -1.0);
      c.neg_entries.assign(np * card, -1.0);
    } else {
      c.entries.assign(np * card, -1.0);
    }

    if (!jc.contains("rows") || (int64_t)jc.at("rows").size() != np)
      throw ModelError(where + ": expected " + std::to_string(np) + " rows");
    for (const auto& row : jc.at("rows")) {
      std::vector<int> digits;
      const auto& given = row.at("given");
      if ((size_t)given.size() != c.parents.size())
        throw ModelError(where + ": 'given' must name one state per parent");
      for (size_t i = 0; i < c.parents.size(); ++i)
        digits.push_back(state_index(vars[c.parents[i]], given[i].get<std::string>(), where));
      const int64_t u = mixed_radix_index(pcards, digits);

      if (c.testing()) {
        if (!row.contains("threshold"))
          throw ModelError(where + ": testing row needs 'threshold'");
        if (c.thresholds[u] >= 0.0) throw ModelError(where + ": duplicate row");
        c.thresholds[u] = row.at("threshold").get<double>();
        auto pos = get_probs(row, "pos", card, where);
        auto neg = get_probs(row, "neg", card, where);
        for (int x = 0; x < card; ++x) {
          c.pos_entries[u * card + x] = pos[x];
          c.neg_entries[u * card + x] = neg[x];
        }
      } else {
        if (c.entries[u * card] >= 0.0) throw ModelError(where + ": duplicate row");
        auto probs = get_probs(row, "probs", card, where);
        for (int x = 0; x < card; ++x) c.entries[u * card + x] = probs[x];
      }
    }
    cpts.push_back(std::move(c));
  }

  return TbnModel(std::move(vars), std::move(cpts), auto_renormalize);
}

TbnModel load_model_file(const std::string& path, bool auto_renormalize) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str(), auto_renormalize);
}

std::string save_model(const TbnModel& model) {
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : model.variables())
    doc["variables"].push_back({{"name", v.name}, {"states", v.states}});

  doc["cpts"] = json::array();
  for (VarId v = 0; v < model.size(); ++v) {
    const Cpt& c = model.cpt(v);
    json jc;
    jc["child"] = model.var(v).name;
    json parents = json::array();
    std::vector<int> pcards;
    for (VarId p : c.parents) {
      parents.push_back(model.var(p).name);
      pcards.push_back(model.var(p).card());
    }
    jc["parents"] = parents;
    jc["kind"] = c.testing() ? "testing" : "regular";

    const int card = model.var(v).card();
    const int64_t np = mixed_radix_size(pcards);
    json rows = json::array();
    std::vector<int> digits;
    for (int64_t u = 0; u < np; ++u) {
      mixed_radix_decode(pcards, u, digits);
      json row;
      json given = json::array();
      for (size_t i = 0; i < c.parents.size(); ++i)
        given.push_back(model.var(c.parents[i]).states[digits[i]]);
      row["given"] = given;
      if (c.testing()) {
        row["threshold"] = c.thresholds[u];
        row["pos"] = std::vector<double>(c.pos_entries.begin() + u * card,
                                         c.pos_entries.begin() + (u + 1) * card);
        row["neg"] = std::vector<double>(c.neg_entries.begin() + u * card,
                                         c.neg_entries.begin() + (u + 1) * card);
      } else {
        row["probs"] = std::vector<double>(c.entries.begin() + u * card,
                                           c.entries.begin() + (u + 1) * card);
      }
      rows.push_back(std::move(row));
    }
    jc["rows"] = std::move(rows);
    doc["cpts"].push_back(std::move(jc));
  }
  return doc.dump(2);
}

void save_model_file(const TbnModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file '" + path + "'");
  out << save_model(model) << "\n";
}

Cpt regular_cpt(VarId child, std::vector<VarId> parents, std::vector<double> entries) {
  Cpt c;
  c.child = child;
  c.parents = std::move(parents);
  c.kind = CptKind::Regular;
  c.entries = std::move(entries);
  return c;
}

Cpt testing_cpt(VarId child, std::vector<VarId> parents, std::vector<double> thresholds,
                std::vector<double> pos, std::vector<double> neg) {
  Cpt c;
  c.child = child;
  c.parents = std::move(parents);
  c.kind = CptKind::Testing;
  c.thresholds = std::move(thresholds);
  c.pos_entries = std::move(pos);
  c.neg_entries = std::move(neg);
  return c;
}

}  // namespace tac
