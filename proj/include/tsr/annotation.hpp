#pragma once

#include <string>
#include <vector>

#include "tsr/table.hpp"

namespace tsr {

// Table annotations are exchanged as JSON documents holding cell geometry
// only; relations are always re-derived from the grid after loading.
std::string table_to_json(const Table& table);
Table table_from_json(const std::string& text);

void save_annotation(const Table& table, const std::string& path);
Table load_annotation(const std::string& path);  // relations left empty

// One dataset entry as listed in a manifest file.
struct ManifestEntry {
  int id = 0;
  std::string image;       // path relative to the manifest's directory
  std::string annotation;  // path relative to the manifest's directory
  std::string split;       // train / val / test
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(const std::string& name) const {
    if (name == "all") return entries;
    std::vector<ManifestEntry> out;
    for (const ManifestEntry& e : entries)
      if (e.split == name) out.push_back(e);
    return out;
  }
};

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace tsr
