#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::volume {

struct Rgba8 {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  friend constexpr bool operator==(const Rgba8&, const Rgba8&) = default;
};

struct HierarchyEntry {
  OrganId organ;
  std::string name;
  Rgba8 color;
  friend bool operator==(const HierarchyEntry&, const HierarchyEntry&) = default;
};

/// Display names and colors per (L1, L2) organ. Text form is one entry per
/// line: `l1,l2,name,#RRGGBBAA`; blank lines and `#`-comments are skipped.
class SegmentationHierarchy {
 public:
  SegmentationHierarchy() = default;
  explicit SegmentationHierarchy(std::vector<HierarchyEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  void add(HierarchyEntry entry) {
    if (entry.name.empty()) throw Error(ErrorKind::kFormat, "hierarchy entry " + entry.organ.str() + " has no name");
    if (find(entry.organ)) throw Error(ErrorKind::kFormat, "duplicate hierarchy entry " + entry.organ.str());
    entries_.push_back(std::move(entry));
  }

  const std::vector<HierarchyEntry>& entries() const { return entries_; }

  const HierarchyEntry* find(OrganId organ) const {
    for (const auto& e : entries_)
      if (e.organ == organ) return &e;
    return nullptr;
  }

  const HierarchyEntry* find_by_name(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  std::set<OrganId> organs_in_system(int l1) const {
    std::set<OrganId> out;
    for (const auto& e : entries_)
      if (e.organ.l1 == l1) out.insert(e.organ);
    return out;
  }

  std::set<OrganId> all_organs() const {
    std::set<OrganId> out;
    for (const auto& e : entries_) out.insert(e.organ);
    return out;
  }

  static SegmentationHierarchy parse(std::istream& in) {
    SegmentationHierarchy h;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      if (fields.size() != 4)
        throw Error(ErrorKind::kFormat, "hierarchy line " + std::to_string(line_no) + ": expected 4 fields");
      HierarchyEntry e;
      try {
        const int l1 = std::stoi(fields[0]);
        const int l2 = std::stoi(fields[1]);
        (void)encode_code(l1, l2, 0);
        e.organ = OrganId{static_cast<std::uint8_t>(l1), static_cast<std::uint8_t>(l2)};
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::kFormat, "hierarchy line " + std::to_string(line_no) + ": bad level id");
      }
      e.name = fields[2];
      e.color = parse_color(fields[3], line_no);
      h.add(std::move(e));
    }
    return h;
  }

  static SegmentationHierarchy load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open hierarchy file " + path);
    return parse(in);
  }

  void write(std::ostream& out) const {
    for (const auto& e : entries_) {
      char color[10];
      std::snprintf(color, sizeof(color), "#%02X%02X%02X%02X", e.color.r, e.color.g, e.color.b, e.color.a);
      out << int(e.organ.l1) << ',' << int(e.organ.l2) << ',' << e.name << ',' << color << '\n';
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::kIo, "cannot write hierarchy file " + path);
    write(out);
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
  }

  friend bool operator==(const SegmentationHierarchy&, const SegmentationHierarchy&) = default;

 private:
  static Rgba8 parse_color(const std::string& s, int line_no) {
    if (s.size() != 9 || s[0] != '#')
      throw Error(ErrorKind::kFormat, "hierarchy line " + std::to_string(line_no) + ": color must be #RRGGBBAA");
    std::array<std::uint8_t, 4> c{};
    for (std::size_t i = 0; i < 4; ++i) {
      unsigned v = 0;
      for (std::size_t k = 0; k < 2; ++k) {
        const char ch = s[1 + 2 * i + k];
        v <<= 4;
        if (ch >= '0' && ch <= '9') v |= unsigned(ch - '0');
        else if (ch >= 'a' && ch <= 'f') v |= unsigned(ch - 'a' + 10);
        else if (ch >= 'A' && ch <= 'F') v |= unsigned(ch - 'A' + 10);
        else throw Error(ErrorKind::kFormat, "hierarchy line " + std::to_string(line_no) + ": bad hex digit");
      }
      c[i] = static_cast<std::uint8_t>(v);
    }
    return {c[0], c[1], c[2], c[3]};
  }

  std::vector<HierarchyEntry> entries_;
};

}  // namespace holoview::volume
