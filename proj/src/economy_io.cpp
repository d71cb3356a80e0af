#include "brace/economy_io.hpp"

#include <algorithm>
#include <fstream>

namespace brace {

using nlohmann::json;

Bundle parse_bundle(const json& j, std::size_t goods) {
  if (!j.is_array()) throw SpecError("bundle must be an integer array");
  std::vector<int> q;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw SpecError("bundle entries must be integers");
    q.push_back(v.get<int>());
  }
  if (q.size() != goods) throw SpecError("bundle length " + std::to_string(q.size()) + " != good count");
  return Bundle(std::move(q));
}

json to_json(const Bundle& b) { return json(b.quantities()); }

Lottery parse_lottery(const json& j, std::size_t goods) {
  if (!j.is_array() || j.empty()) throw SpecError("lottery must be a non-empty array");
  std::vector<Outcome> out;
  for (const auto& o : j) out.push_back({parse_bundle(o.at("bundle"), goods), o.at("prob").get<double>()});
  return Lottery(std::move(out));
}

json to_json(const Lottery& l) {
  json arr = json::array();
  for (const auto& o : l.support()) arr.push_back({{"bundle", to_json(o.bundle)}, {"prob", o.prob}});
  return arr;
}

WeakOrder parse_order(const json& j, std::size_t goods) {
  std::vector<Bundle> acceptable;
  for (const auto& b : j.at("acceptable")) acceptable.push_back(parse_bundle(b, goods));
  if (acceptable.empty()) throw SpecError("empty acceptable set");
  std::sort(acceptable.begin(), acceptable.end());
  if (std::adjacent_find(acceptable.begin(), acceptable.end()) != acceptable.end()) {
    throw SpecError("duplicate acceptable bundle");
  }
  std::vector<std::vector<Bundle>> classes;
  if (j.contains("order")) {
    for (const auto& cls : j.at("order")) {
      std::vector<Bundle> c;
      for (const auto& b : cls) c.push_back(parse_bundle(b, goods));
      classes.push_back(std::move(c));
    }
  } else {
    classes.push_back(acceptable);
  }
  WeakOrder order(std::move(classes));
  if (order.bundles() != acceptable) throw SpecError("order classes do not cover the acceptable set exactly");
  return order;
}

IdentityType parse_type(const json& j, std::size_t goods) {
  return IdentityType(parse_lottery(j.at("endowment"), goods), parse_order(j, goods));
}

json to_json(const IdentityType& t) {
  json acc = json::array();
  for (const auto& b : t.acceptable()) acc.push_back(to_json(b));
  json order = json::array();
  for (const auto& cls : t.order().classes()) {
    json c = json::array();
    for (const auto& b : cls) c.push_back(to_json(b));
    order.push_back(std::move(c));
  }
  return {{"endowment", to_json(t.endowment())}, {"acceptable", std::move(acc)}, {"order", std::move(order)}};
}

EconomyDescription parse_economy(const json& j) {
  try {
    EconomyDescription d;
    for (const auto& g : j.at("goods")) d.goods.push_back({g.at("name").get<std::string>(), g.at("capacity").get<int>()});
    const std::size_t m = d.goods.size();
    for (const auto& id : j.at("identities")) {
      Identity ident;
      ident.id = id.at("id").is_string() ? id.at("id").get<std::string>() : id.at("id").dump();
      ident.principal = id.at("principal").is_string() ? id.at("principal").get<std::string>() : id.at("principal").dump();
      ident.type = parse_type(id, m);
      d.identities.push_back(std::move(ident));
    }
    d.delta = j.value("delta", 0.0);
    return d;
  } catch (const json::exception& ex) {
    throw SpecError(std::string("malformed economy spec: ") + ex.what());
  }
}

json to_json(const EconomyDescription& d) {
  json goods = json::array();
  for (const auto& g : d.goods) goods.push_back({{"name", g.name}, {"capacity", g.capacity}});
  json ids = json::array();
  for (const auto& id : d.identities) {
    json t = to_json(id.type);
    t["id"] = id.id;
    t["principal"] = id.principal;
    ids.push_back(std::move(t));
  }
  return {{"goods", std::move(goods)}, {"identities", std::move(ids)}, {"delta", d.delta}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw SpecError(path.string() + ": " + ex.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Economy load_economy(const std::filesystem::path& path, EndowmentCheck check) {
  return build_economy(parse_economy(read_json_file(path)), check);
}

}  // namespace brace
