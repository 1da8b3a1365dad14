// Copyright 2026 The wsibench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "wsibench/error.hpp"
#include "wsibench/slide_io.hpp"

namespace wsibench {

namespace {

namespace pt = boost::property_tree;

std::string format_coordinate(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_decimal(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v))
    throw Error(ErrorCode::kSchema, where + ": non-numeric coordinate '" + text + "'");
  return v;
}

long parse_order(const std::string& text, const std::string& where) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || v < 0)
    throw Error(ErrorCode::kSchema, where + ": Order must be a non-negative integer, got '" +
                                        text + "'");
  return v;
}

std::string escape_attribute(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string required_attr(const pt::ptree& node, const char* name, const std::string& where) {
  const auto v = node.get_optional<std::string>(std::string("<xmlattr>.") + name);
  if (!v) throw Error(ErrorCode::kSchema, where + ": missing attribute " + name);
  return *v;
}

}  // namespace

void validate_annotations(const AnnotationSet& a) {
  std::set<std::string> names;
  for (const auto& ann : a.annotations) {
    if (!names.insert(ann.name).second)
      throw Error(ErrorCode::kSchema, a.slide_id + ": duplicate annotation name '" + ann.name + "'");
    if (ann.vertices.size() < 3)
      throw Error(ErrorCode::kSchema,
                  a.slide_id + ": annotation '" + ann.name + "' has fewer than 3 vertices");
    for (const auto& v : ann.vertices)
      if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw Error(ErrorCode::kSchema,
                    a.slide_id + ": annotation '" + ann.name + "' has a non-finite coordinate");
  }
}

AnnotationSet parse_annotations_string(const std::string& xml, const std::string& slide_id,
                                       const std::string& source) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::kSchema, source + ": malformed XML at line " +
                                        std::to_string(e.line()) + ": " + e.message());
  }
  const auto root = tree.get_child_optional("ASAP_Annotations");
  if (!root) throw Error(ErrorCode::kSchema, source + ": missing root element ASAP_Annotations");

  AnnotationSet set;
  set.slide_id = slide_id;
  const auto annotations = root->get_child_optional("Annotations");
  if (!annotations) return set;

  std::size_t index = 0;
  for (const auto& [tag, node] : *annotations) {
    if (tag != "Annotation") continue;
    const std::string where = source + ": Annotation[" + std::to_string(index++) + "]";
    Annotation ann;
    ann.name = required_attr(node, "Name", where);
    const std::string type = required_attr(node, "Type", where);
    if (type != "Polygon")
      throw Error(ErrorCode::kSchema,
                  where + " ('" + ann.name + "'): unsupported Type '" + type + "'");
    ann.group = node.get<std::string>("<xmlattr>.PartOfGroup", "");

    std::map<long, Point> ordered;
    if (const auto coords = node.get_child_optional("Coordinates")) {
      for (const auto& [ctag, c] : *coords) {
        if (ctag != "Coordinate") continue;
        const std::string cwhere = where + " ('" + ann.name + "') Coordinate";
        const long order = parse_order(required_attr(c, "Order", cwhere), cwhere);
        const Point p{parse_decimal(required_attr(c, "X", cwhere), cwhere + " X"),
                      parse_decimal(required_attr(c, "Y", cwhere), cwhere + " Y")};
        if (!ordered.emplace(order, p).second)
          throw Error(ErrorCode::kSchema, cwhere + ": duplicate Order " + std::to_string(order));
      }
    }
    for (const auto& [order, p] : ordered) ann.vertices.push_back(p);
    set.annotations.push_back(std::move(ann));
  }
  try {
    validate_annotations(set);
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  return set;
}

AnnotationSet parse_annotations(const fs::path& xml_path) {
  std::ifstream in(xml_path);
  if (!in) throw Error(ErrorCode::kIo, xml_path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_annotations_string(buf.str(), xml_path.stem().string(), xml_path.string());
}

std::string serialize_annotations_string(const AnnotationSet& a) {
  validate_annotations(a);
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n<ASAP_Annotations>\n\t<Annotations>\n";
  for (const auto& ann : a.annotations) {
    out << "\t\t<Annotation Name=\"" << escape_attribute(ann.name)
        << "\" Type=\"Polygon\" PartOfGroup=\"" << escape_attribute(ann.group) << "\">\n";
    out << "\t\t\t<Coordinates>\n";
    for (std::size_t i = 0; i < ann.vertices.size(); ++i)
      out << "\t\t\t\t<Coordinate Order=\"" << i << "\" X=\""
          << format_coordinate(ann.vertices[i].x) << "\" Y=\""
          << format_coordinate(ann.vertices[i].y) << "\" />\n";
    out << "\t\t\t</Coordinates>\n\t\t</Annotation>\n";
  }
  out << "\t</Annotations>\n</ASAP_Annotations>\n";
  return out.str();
}

void serialize_annotations(const AnnotationSet& a, const fs::path& path) {
  const std::string text = serialize_annotations_string(a);
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

AnnotationSet round_to_printed_precision(AnnotationSet a) {
  for (auto& ann : a.annotations)
    for (auto& v : ann.vertices) {
      v.x = std::strtod(format_coordinate(v.x).c_str(), nullptr);
      v.y = std::strtod(format_coordinate(v.y).c_str(), nullptr);
    }
  return a;
}

}  // namespace wsibench
