// Copyright 2026 The Capmatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include <json.hpp>

#include "capmatch/core.hpp"
#include "capmatch/instances.hpp"

namespace capmatch {

using Json = nlohmann::ordered_json;

namespace detail {

inline Rational rational_field(const Json& node, const std::string& path) {
  if (!node.is_string())
    throw ParseError(path, "expected a rational string like \"3/7\", \"12\" or \"0.45\"");
  try {
    return parse_rational(node.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, e.what());
  }
}

inline const Json& member(const Json& node, const std::string& key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

}  // namespace detail

/// Parses the instance schema: top-level `kind`, `capacity`, and either
/// general agents with per-position `values` or position-auction agents with
/// a top-level `ctrs` vector. All numbers are rational strings; ids are
/// 1-based and contiguous. Violations name the offending field.
inline AnyInstance parse_instance(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("$", e.what());
  }
  if (!doc.is_object()) throw ParseError("$", "expected a JSON object");

  const Json& kind_node = detail::member(doc, "kind", "$");
  if (!kind_node.is_string()) throw ParseError("$.kind", "expected a string");
  const std::string kind = kind_node.get<std::string>();
  const Rational capacity = detail::rational_field(detail::member(doc, "capacity", "$"),
                                                   "$.capacity");

  const Json& agents = detail::member(doc, "agents", "$");
  if (!agents.is_array()) throw ParseError("$.agents", "expected an array");

  const auto agent_path = [](std::size_t index) {
    return "$.agents[" + std::to_string(index) + "]";
  };
  const auto check_id = [&](const Json& agent, std::size_t index) {
    const Json& id = detail::member(agent, "id", agent_path(index));
    if (!id.is_number_integer() || id.get<long>() != static_cast<long>(index) + 1)
      throw ParseError(agent_path(index) + ".id",
                       "ids must be 1-based and contiguous; expected " +
                           std::to_string(index + 1));
  };

  if (kind == "general") {
    Instance instance;
    instance.capacity = capacity;
    std::size_t positions = 0;
    for (std::size_t t = 0; t < agents.size(); ++t) {
      const Json& agent = agents[t];
      if (!agent.is_object()) throw ParseError(agent_path(t), "expected an object");
      check_id(agent, t);
      instance.sizes.push_back(detail::rational_field(
          detail::member(agent, "size", agent_path(t)), agent_path(t) + ".size"));
      const Json& values = detail::member(agent, "values", agent_path(t));
      if (!values.is_array()) throw ParseError(agent_path(t) + ".values", "expected an array");
      if (t == 0) positions = values.size();
      if (values.size() != positions)
        throw ParseError(agent_path(t) + ".values", "rows must have equal length");
      std::vector<Rational> row;
      for (std::size_t j = 0; j < values.size(); ++j)
        row.push_back(detail::rational_field(
            values[j], agent_path(t) + ".values[" + std::to_string(j) + "]"));
      instance.values.push_back(std::move(row));
    }
    try {
      validate_instance(instance);
    } catch (const InstanceError& e) {
      throw ParseError("$", e.what());
    }
    return instance;
  }

  if (kind == "position-auction") {
    PositionAuctionInstance pos;
    pos.capacity = capacity;
    for (std::size_t t = 0; t < agents.size(); ++t) {
      const Json& agent = agents[t];
      if (!agent.is_object()) throw ParseError(agent_path(t), "expected an object");
      check_id(agent, t);
      pos.values.push_back(detail::rational_field(
          detail::member(agent, "value", agent_path(t)), agent_path(t) + ".value"));
      pos.sizes.push_back(detail::rational_field(
          detail::member(agent, "size", agent_path(t)), agent_path(t) + ".size"));
    }
    const Json& ctrs = detail::member(doc, "ctrs", "$");
    if (!ctrs.is_array()) throw ParseError("$.ctrs", "expected an array");
    for (std::size_t j = 0; j < ctrs.size(); ++j)
      pos.ctrs.push_back(
          detail::rational_field(ctrs[j], "$.ctrs[" + std::to_string(j) + "]"));
    try {
      validate_instance(pos);
    } catch (const InstanceError& e) {
      throw ParseError("$", e.what());
    }
    return pos;
  }

  throw ParseError("$.kind", "expected \"general\" or \"position-auction\"");
}

inline std::string serialize_instance(const AnyInstance& any) {
  Json doc;
  if (const auto* general = std::get_if<Instance>(&any)) {
    doc["kind"] = "general";
    doc["capacity"] = to_fraction_string(general->capacity);
    Json agents = Json::array();
    for (AgentId i = 1; i <= general->num_agents(); ++i) {
      Json agent;
      agent["id"] = i;
      agent["size"] = to_fraction_string(general->size(i));
      Json values = Json::array();
      for (PositionId j = 1; j <= general->num_positions(); ++j)
        values.push_back(to_fraction_string(general->value(i, j)));
      agent["values"] = std::move(values);
      agents.push_back(std::move(agent));
    }
    doc["agents"] = std::move(agents);
  } else {
    const auto& pos = std::get<PositionAuctionInstance>(any);
    doc["kind"] = "position-auction";
    doc["capacity"] = to_fraction_string(pos.capacity);
    Json agents = Json::array();
    for (AgentId i = 1; i <= pos.num_agents(); ++i) {
      Json agent;
      agent["id"] = i;
      agent["value"] = to_fraction_string(pos.value(i));
      agent["size"] = to_fraction_string(pos.size(i));
      agents.push_back(std::move(agent));
    }
    doc["agents"] = std::move(agents);
    Json ctrs = Json::array();
    for (PositionId j = 1; j <= pos.num_positions(); ++j)
      ctrs.push_back(to_fraction_string(pos.ctr(j)));
    doc["ctrs"] = std::move(ctrs);
  }
  return doc.dump(2) + "\n";
}

/// FNV-1a content hash used as the instance digest in reports.
inline std::string content_digest(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace capmatch
