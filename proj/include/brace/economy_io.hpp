#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "brace/economy.hpp"

namespace brace {

// Economy file:
//   {goods: [{name, capacity}],
//    identities: [{id, principal, endowment: [{bundle, prob}],
//                  acceptable: [bundle], order: [[bundle, ...], ...]}],
//    delta}
// `order` may be omitted, in which case every acceptable bundle is placed in
// a single indifference class.
EconomyDescription parse_economy(const nlohmann::json& j);
nlohmann::json to_json(const EconomyDescription& d);

Bundle parse_bundle(const nlohmann::json& j, std::size_t goods);
nlohmann::json to_json(const Bundle& b);
Lottery parse_lottery(const nlohmann::json& j, std::size_t goods);
nlohmann::json to_json(const Lottery& l);
// {acceptable, order?}; a missing order means one indifference class.
WeakOrder parse_order(const nlohmann::json& j, std::size_t goods);
IdentityType parse_type(const nlohmann::json& j, std::size_t goods);
nlohmann::json to_json(const IdentityType& t);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

Economy load_economy(const std::filesystem::path& path,
                     EndowmentCheck check = EndowmentCheck::Capacity);

}  // namespace brace
