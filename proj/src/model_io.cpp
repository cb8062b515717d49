#include "rolegraph/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "rolegraph/config.hpp"
#include "rolegraph/csv.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/ingest.hpp"

namespace rolegraph {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "rolegraph-model 1";

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", p.string()));
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot read {}", p.string()));
  return in;
}

}  // namespace

void write_grid_csv(const std::vector<GridPoint>& grid, std::ostream& out) {
  out << "roles,bits,model_cost,error_cost,total\n";
  for (const auto& g : grid) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", g.roles, g.bits, g.model_cost,
                       g.error_cost, g.total);
  }
}

void save_model(const ModelBundle& bundle, const fs::path& dir) {
  const auto& m = bundle.model;
  m.validate();
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "schema.txt");
    out << m.schema.serialize();
  }
  {
    auto out = open_out(dir / "F.csv");
    CsvRow header{"role"};
    for (const auto& f : m.schema.features) header.push_back(m.schema.name_of(f.id));
    write_csv_row(out, header);
    for (Eigen::Index r = 0; r < m.F.rows(); ++r) {
      out << r;
      for (Eigen::Index j = 0; j < m.F.cols(); ++j) out << fmt::format(",{:.17g}", m.F(r, j));
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "grid.csv");
    write_grid_csv(m.grid, out);
  }
  auto out = open_out(dir / "meta.txt");
  out << "format=" << kFormat << '\n'
      << "num_roles=" << m.num_roles << '\n'
      << "num_bits=" << m.num_bits << '\n'
      << "num_features=" << m.schema.size() << '\n'
      << "schema_id=" << m.schema.fingerprint() << '\n'
      << "seed=" << m.seed << '\n'
      << "train_start=" << m.train_start << '\n'
      << "train_end=" << m.train_end << '\n'
      << "train_start_utc=" << format_utc(m.train_start) << '\n'
      << "train_end_utc=" << format_utc(m.train_end) << '\n'
      << "window_origin=" << bundle.window_origin << '\n'
      << "window_seconds=" << bundle.window_seconds << '\n'
      << "source=" << bundle.source << '\n';
  for (const auto& g : m.grid) {
    out << fmt::format("grid_L_r{}_b{}={:.17g}\n", g.roles, g.bits, g.total);
  }
}

ModelBundle load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, fmt::format("no model directory {}", dir.string()));
  std::map<std::string, std::string> meta;
  {
    auto in = open_in(dir / "meta.txt");
    std::string line;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorCode::SchemaMismatch, fmt::format("meta.txt lacks {}", key));
    return it->second;
  };
  if (need("format") != kFormat) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("unsupported model format '{}'", need("format")));
  }

  ModelBundle b;
  auto& m = b.model;
  try {
    m.num_roles = static_cast<int>(parse_int(need("num_roles"), "num_roles"));
    m.num_bits = static_cast<int>(parse_int(need("num_bits"), "num_bits"));
    m.seed = static_cast<std::uint64_t>(parse_int(need("seed"), "seed"));
    m.train_start = parse_int(need("train_start"), "train_start");
    m.train_end = parse_int(need("train_end"), "train_end");
    b.window_origin = parse_int(need("window_origin"), "window_origin");
    b.window_seconds = parse_int(need("window_seconds"), "window_seconds");
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  b.source = need("source");

  {
    auto in = open_in(dir / "schema.txt");
    m.schema = FeatureSchema::parse(in);
  }
  if (m.schema.fingerprint() != need("schema_id")) {
    throw Error(ErrorCode::SchemaMismatch, "schema.txt does not match the recorded schema id");
  }

  {
    auto in = open_in(dir / "F.csv");
    std::vector<CsvRow> rows;
    try {
      rows = read_csv(in);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaMismatch, fmt::format("F.csv: {}", e.what()));
    }
    if (rows.empty() || rows.front().size() != m.schema.size() + 1) {
      throw Error(ErrorCode::SchemaMismatch, "F.csv header does not match the schema");
    }
    for (std::size_t j = 0; j < m.schema.size(); ++j) {
      if (rows.front()[j + 1] != m.schema.name_of(m.schema.features[j].id)) {
        throw Error(ErrorCode::SchemaMismatch, fmt::format("F.csv column {} is not {}", j + 1,
                                                           m.schema.name_of(m.schema.features[j].id)));
      }
    }
    if (rows.size() != static_cast<std::size_t>(m.num_roles) + 1) {
      throw Error(ErrorCode::SchemaMismatch, "F.csv row count differs from num_roles");
    }
    m.F.resize(m.num_roles, static_cast<Eigen::Index>(m.schema.size()));
    for (int r = 0; r < m.num_roles; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r) + 1];
      if (row.size() != m.schema.size() + 1) {
        throw Error(ErrorCode::SchemaMismatch, fmt::format("F.csv row {} has {} fields", r, row.size()));
      }
      for (std::size_t j = 0; j < m.schema.size(); ++j) {
        try {
          m.F(r, static_cast<Eigen::Index>(j)) = parse_double(row[j + 1], "F");
        } catch (const Error& e) {
          throw Error(ErrorCode::SchemaMismatch, e.what());
        }
      }
    }
  }

  if (fs::exists(dir / "grid.csv")) {
    auto in = open_in(dir / "grid.csv");
    auto rows = read_csv(in);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() != 5) throw Error(ErrorCode::SchemaMismatch, "grid.csv row has the wrong width");
      GridPoint g;
      g.roles = static_cast<int>(parse_int(row[0], "roles"));
      g.bits = static_cast<int>(parse_int(row[1], "bits"));
      g.model_cost = parse_double(row[2], "model_cost");
      g.error_cost = parse_double(row[3], "error_cost");
      g.total = parse_double(row[4], "total");
      m.grid.push_back(g);
    }
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  return b;
}

}  // namespace rolegraph
