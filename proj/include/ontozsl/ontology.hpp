#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl {

// Categories used by the ablation machinery. `comment` marks the property
// that carries textual descriptions; its triples never enter the structural
// triple set.
enum class PropertyTag { Hierarchy, Attribute, DomainRange, Comment, Other };

PropertyTag parse_tag(const std::string& s);
std::string tag_name(PropertyTag t);

struct Triple {
  std::string head, property, tail;
  auto operator<=>(const Triple&) const = default;
};

// Concept/property graph plus per-concept text. Immutable after load.
struct Schema {
  std::set<std::string> concepts;
  std::set<std::string> properties;
  std::vector<Triple> triples;
  std::map<std::string, std::string> descriptions;
  std::map<std::string, PropertyTag> property_tags;

  PropertyTag tag_of(const std::string& property) const;
  std::vector<Triple> triples_with_tag(PropertyTag t) const;
  void validate() const;

  bool operator==(const Schema&) const = default;
};

// Loads a schema from the three text files. Triples whose property is
// tagged `comment` are routed to descriptions instead of the triple list.
// With strict=true, descriptions or tags naming identifiers absent from the
// triples raise instead of extending the schema.
Schema load_schema(const std::string& triples_path, const std::string& descriptions_path,
                   const std::string& tags_path, bool strict = false);

// Writes the three files back out (canonical form; a reload is identical).
void save_schema(const Schema& schema, const std::string& triples_path,
                 const std::string& descriptions_path, const std::string& tags_path);

// Copy with all triples of the dropped tags removed; dropping Comment also
// clears descriptions. Concepts are kept as-is.
Schema ablate(const Schema& schema, const std::set<PropertyTag>& drop);

}  // namespace ontozsl
