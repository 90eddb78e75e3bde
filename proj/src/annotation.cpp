#include "tsr/annotation.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace tsr {
namespace {

using nlohmann::json;

json box_to_json(const BBox& box) { return json::array({box.x1, box.y1, box.x2, box.y2}); }

BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw AnnotationError("box must be a 4-element array [x1,y1,x2,y2]");
  return BBox{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnnotationError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AnnotationError("cannot write " + path);
  out << text;
}

}  // namespace

std::string table_to_json(const Table& table) {
  json cells = json::array();
  for (const Cell& cell : table.cells) {
    json c;
    c["id"] = cell.id;
    c["aligned_box"] = box_to_json(cell.aligned_box);
    c["text_box"] = cell.text_box ? box_to_json(*cell.text_box) : json(nullptr);
    c["grid"] = json::array({cell.row_start, cell.row_end, cell.col_start, cell.col_end});
    c["empty"] = cell.empty;
    cells.push_back(std::move(c));
  }
  json doc;
  doc["id"] = table.id;
  doc["image"] = table.image_path;
  doc["width"] = table.width;
  doc["height"] = table.height;
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

Table table_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw AnnotationError(std::string("annotation is not valid JSON: ") + e.what());
  }
  try {
    Table table;
    table.id = doc.at("id").get<int>();
    table.image_path = doc.at("image").get<std::string>();
    table.width = doc.at("width").get<int>();
    table.height = doc.at("height").get<int>();
    for (const json& c : doc.at("cells")) {
      Cell cell;
      cell.id = c.at("id").get<int>();
      cell.aligned_box = box_from_json(c.at("aligned_box"));
      const json& tb = c.at("text_box");
      if (!tb.is_null()) cell.text_box = box_from_json(tb);
      const json& grid = c.at("grid");
      if (!grid.is_array() || grid.size() != 4)
        throw AnnotationError("grid must be a 4-element array [r1,r2,c1,c2]");
      cell.row_start = grid[0].get<int>();
      cell.row_end = grid[1].get<int>();
      cell.col_start = grid[2].get<int>();
      cell.col_end = grid[3].get<int>();
      cell.empty = c.at("empty").get<bool>();
      table.cells.push_back(std::move(cell));
    }
    return table;
  } catch (const json::exception& e) {
    throw AnnotationError(std::string("annotation schema mismatch: ") + e.what());
  }
}

void save_annotation(const Table& table, const std::string& path) {
  write_file(path, table_to_json(table));
}

Table load_annotation(const std::string& path) { return table_from_json(read_file(path)); }

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  json rows = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json r;
    r["id"] = e.id;
    r["image"] = e.image;
    r["annotation"] = e.annotation;
    r["split"] = e.split;
    rows.push_back(std::move(r));
  }
  json doc;
  doc["tables"] = std::move(rows);
  write_file(path, doc.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw AnnotationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest manifest;
  try {
    for (const json& r : doc.at("tables")) {
      ManifestEntry e;
      e.id = r.at("id").get<int>();
      e.image = r.at("image").get<std::string>();
      e.annotation = r.at("annotation").get<std::string>();
      e.split = r.at("split").get<std::string>();
      manifest.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw AnnotationError(std::string("manifest schema mismatch: ") + e.what());
  }
  return manifest;
}

}  // namespace tsr
