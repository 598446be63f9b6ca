#include "ontozsl/ontology.hpp"

#include <sstream>

#include "ontozsl/error.hpp"
#include "ontozsl/io.hpp"

namespace ontozsl {

PropertyTag parse_tag(const std::string& s) {
  if (s == "hierarchy") return PropertyTag::Hierarchy;
  if (s == "attribute") return PropertyTag::Attribute;
  if (s == "domain_range") return PropertyTag::DomainRange;
  if (s == "comment") return PropertyTag::Comment;
  if (s == "other") return PropertyTag::Other;
  throw Error("unknown property tag: " + s);
}

std::string tag_name(PropertyTag t) {
  switch (t) {
    case PropertyTag::Hierarchy: return "hierarchy";
    case PropertyTag::Attribute: return "attribute";
    case PropertyTag::DomainRange: return "domain_range";
    case PropertyTag::Comment: return "comment";
    case PropertyTag::Other: return "other";
  }
  return "other";
}

PropertyTag Schema::tag_of(const std::string& property) const {
  auto it = property_tags.find(property);
  return it == property_tags.end() ? PropertyTag::Other : it->second;
}

std::vector<Triple> Schema::triples_with_tag(PropertyTag t) const {
  std::vector<Triple> out;
  for (const Triple& tr : triples)
    if (tag_of(tr.property) == t) out.push_back(tr);
  return out;
}

void Schema::validate() const {
  for (const std::string& c : concepts) require(!c.empty(), "empty concept identifier");
  for (const std::string& p : properties) require(!p.empty(), "empty property identifier");
  for (const Triple& t : triples) {
    require(concepts.count(t.head) && concepts.count(t.tail),
            "triple references unknown concept: " + t.head + " / " + t.tail);
    require(properties.count(t.property), "triple references unknown property: " + t.property);
    require(tag_of(t.property) != PropertyTag::Comment,
            "comment-tagged triple in structural triple set");
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return parts;
}

}  // namespace

Schema load_schema(const std::string& triples_path, const std::string& descriptions_path,
                   const std::string& tags_path, bool strict) {
  Schema s;

  long lineno = 0;
  for (const std::string& line : io::read_lines(tags_path)) {
    ++lineno;
    if (line.empty()) continue;
    auto parts = split_tabs(line);
    if (parts.size() != 2 || parts[0].empty())
      throw Error(tags_path + ":" + std::to_string(lineno) + ": expected `property TAB tag`");
    s.property_tags[parts[0]] = parse_tag(parts[1]);
  }

  lineno = 0;
  for (const std::string& line : io::read_lines(triples_path)) {
    ++lineno;
    if (line.empty()) continue;
    auto parts = split_tabs(line);
    if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty())
      throw Error(triples_path + ":" + std::to_string(lineno) +
                  ": expected three tab-separated identifiers");
    const std::string &head = parts[0], &prop = parts[1], &tail = parts[2];
    s.concepts.insert(head);
    if (s.tag_of(prop) == PropertyTag::Comment) {
      // comment payloads live in descriptions, never in the triple set
      std::string& d = s.descriptions[head];
      if (!d.empty()) d += ' ';
      d += tail;
      continue;
    }
    s.concepts.insert(tail);
    s.properties.insert(prop);
    if (!s.property_tags.count(prop)) s.property_tags[prop] = PropertyTag::Other;
    s.triples.push_back({head, prop, tail});
  }

  lineno = 0;
  for (const std::string& line : io::read_lines(descriptions_path)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error(descriptions_path + ":" + std::to_string(lineno) +
                  ": expected `concept TAB text`");
    std::string id = line.substr(0, tab);
    if (strict && !s.concepts.count(id))
      throw Error(descriptions_path + ":" + std::to_string(lineno) +
                  ": description for undeclared concept `" + id + "`");
    s.concepts.insert(id);
    std::string& d = s.descriptions[id];
    if (!d.empty()) d += ' ';
    d += line.substr(tab + 1);
  }

  if (strict) {
    for (const auto& [prop, tag] : s.property_tags) {
      (void)tag;
      if (tag != PropertyTag::Comment && !s.properties.count(prop))
        throw Error(tags_path + ": tag for undeclared property `" + prop + "`");
    }
  }

  s.validate();
  return s;
}

void save_schema(const Schema& schema, const std::string& triples_path,
                 const std::string& descriptions_path, const std::string& tags_path) {
  std::ostringstream t;
  for (const Triple& tr : schema.triples)
    t << tr.head << '\t' << tr.property << '\t' << tr.tail << '\n';
  io::write_text(triples_path, t.str());

  std::ostringstream d;
  for (const auto& [id, text] : schema.descriptions)
    if (!text.empty()) d << id << '\t' << text << '\n';
  io::write_text(descriptions_path, d.str());

  std::ostringstream g;
  for (const auto& [prop, tag] : schema.property_tags) g << prop << '\t' << tag_name(tag) << '\n';
  io::write_text(tags_path, g.str());
}

Schema ablate(const Schema& schema, const std::set<PropertyTag>& drop) {
  for (PropertyTag t : drop)
    require(t != PropertyTag::Other, "cannot ablate the `other` tag");
  Schema out = schema;
  out.triples.clear();
  for (const Triple& t : schema.triples)
    if (!drop.count(schema.tag_of(t.property))) out.triples.push_back(t);
  if (drop.count(PropertyTag::Comment))
    for (auto& [id, text] : out.descriptions) text.clear();
  return out;
}

}  // namespace ontozsl
