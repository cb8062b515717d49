#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rolegraph/roles.hpp"

namespace rolegraph {

/// A trained model plus the window grid it was trained on.
struct ModelBundle {
  RoleModel model;
  std::int64_t window_origin = 0;
  std::int64_t window_seconds = 0;
  std::string source = "all";
};

// Writes schema.txt, F.csv, meta.txt and grid.csv into `dir` (created if
// missing). Files are byte-identical for identical bundles.
void save_model(const ModelBundle& bundle, const std::filesystem::path& dir);

// Throws Error(Io) for missing files, Error(SchemaMismatch) when F, the
// schema and the recorded schema id disagree.
ModelBundle load_model(const std::filesystem::path& dir);

void write_grid_csv(const std::vector<GridPoint>& grid, std::ostream& out);

}  // namespace rolegraph
