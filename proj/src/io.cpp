#include "consensus/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "consensus/errors.hpp"

namespace consensus::io {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

const Json& require(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::ParseError, what + " is missing the \"" + key + "\" field");
  }
  return j.at(key);
}

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::ParseError, origin + ":" + line_col(text, e.byte) + ": " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, what + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    fail(ErrorKind::ParseError, what + " must be an array of non-empty row arrays");
  }
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(ErrorKind::ParseError, what + " row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        fail(ErrorKind::ParseError, what + " entry (" + std::to_string(r + 1) + ", " +
                                        std::to_string(c + 1) + ") is not a number");
      }
      const double v = j[r][c].get<double>();
      if (!std::isfinite(v)) fail(ErrorKind::ParseError, what + " has a non-finite entry");
      m(r, c) = v;
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Vector> vectors_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::ParseError, what + " must be an array of vectors");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array()) fail(ErrorKind::ParseError, what + " entry " + std::to_string(i + 1) + " is not an array");
    Vector v(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!row[k].is_number()) fail(ErrorKind::ParseError, what + " contains a non-number");
      v(k) = row[k].get<double>();
    }
    out.push_back(std::move(v));
  }
  return out;
}

AgentModel model_from_json(const Json& j) {
  return AgentModel(matrix_from_json(require(j, "A", "model"), "A"),
                    matrix_from_json(require(j, "B", "model"), "B"),
                    matrix_from_json(require(j, "C", "model"), "C"));
}

Json model_to_json(const AgentModel& model) {
  return Json{{"A", matrix_to_json(model.A())},
              {"B", matrix_to_json(model.B())},
              {"C", matrix_to_json(model.C())}};
}

Topology topology_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::ParseError, "topology must be a JSON object");
  if (j.contains("D")) {
    Topology t = validate_topology(matrix_from_json(j.at("D"), "D"));
    if (j.contains("n") && j.at("n").get<int>() != t.n_agents()) {
      fail(ErrorKind::DimensionMismatch, "\"n\" does not match the size of D");
    }
    return t;
  }
  if (!j.contains("edges")) fail(ErrorKind::ParseError, "topology needs either \"D\" or \"edges\"");
  const int n = require(j, "n", "topology").get<int>();
  const double floor = j.value("self_weight_floor", 0.5);
  std::vector<Edge> edges;
  for (const Json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) fail(ErrorKind::ParseError, "edges must be [j, i] pairs");
    edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
  }
  return build_from_edges(n, edges, floor);
}

Json topology_to_json(const Topology& t) {
  return Json{{"n", t.n_agents()}, {"D", matrix_to_json(t.weights())}};
}

ProtocolGains gains_from_json(const Json& j, const AgentModel& model) {
  Matrix k = matrix_from_json(require(j, "K", "gains"), "K");
  Matrix l = matrix_from_json(require(j, "L", "gains"), "L");
  const DesignMethod method =
      j.contains("method") ? design_method_from_string(j.at("method").get<std::string>())
                           : DesignMethod::UserSupplied;
  std::optional<double> delta;
  if (j.contains("certified_delta") && !j.at("certified_delta").is_null()) {
    delta = j.at("certified_delta").get<double>();
  }
  return ProtocolGains(model, std::move(k), std::move(l), method, delta);
}

Json gains_to_json(const ProtocolGains& g) {
  Json out{{"K", matrix_to_json(g.K())},
           {"L", matrix_to_json(g.L())},
           {"method", to_string(g.method())}};
  out["certified_delta"] = g.certified_delta() ? Json(*g.certified_delta()) : Json(nullptr);
  return out;
}

Formation formation_from_json(const Json& j) {
  return Formation{vectors_from_json(require(j, "h", "formation"), "h")};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_region_csv(std::ostream& os, const ConsensusRegion& region) {
  os << "re,im,stable,margin\n";
  for (const GridCell& c : region.cells()) {
    os << format_csv_double(c.re) << ',' << format_csv_double(c.im) << ',' << (c.stable ? 1 : 0)
       << ',' << format_csv_double(c.margin) << '\n';
  }
}

Json intervals_to_json(const std::vector<RealInterval>& intervals) {
  Json out = Json::array();
  for (const RealInterval& iv : intervals) out.push_back(Json::array({iv.lo, iv.hi}));
  return out;
}

void write_region_pgm(std::ostream& os, const ConsensusRegion& region) {
  const int res = region.resolution();
  os << "P5\n" << res << ' ' << res << "\n255\n";
  for (int row = res - 1; row >= 0; --row) {
    for (int col = 0; col < res; ++col) {
      os.put(region.cell(row, col).stable ? static_cast<char>(255) : static_cast<char>(0));
    }
  }
}

void write_mare_csv(std::ostream& os, const MareSolution& sol) {
  os << "iteration,step_norm,trace\n";
  for (const MareStep& s : sol.history) {
    os << s.iteration << ',' << format_csv_double(s.step_norm) << ','
       << format_csv_double(s.trace) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  if (log.x.empty()) return;
  const Eigen::Index dim = log.x.front().rows();
  os << "step,agent,kind";
  for (Eigen::Index c = 0; c < dim; ++c) os << ",c" << c;
  os << '\n';
  auto row = [&](std::size_t k, Eigen::Index i, const char* kind, const Matrix& m) {
    os << k << ',' << i + 1 << ',' << kind;
    for (Eigen::Index c = 0; c < dim; ++c) os << ',' << format_csv_double(m(c, i));
    os << '\n';
  };
  for (std::size_t k = 0; k < log.x.size(); ++k) {
    for (Eigen::Index i = 0; i < log.x[k].cols(); ++i) {
      row(k, i, "x", log.x[k]);
      if (k < log.v.size()) row(k, i, "v", log.v[k]);
    }
  }
}

void write_error_csv(std::ostream& os, const TrajectoryLog& log) {
  os << "step,consensus_error,formation_error\n";
  for (std::size_t k = 0; k < log.consensus_error.size(); ++k) {
    os << k << ',' << format_csv_double(log.consensus_error[k]) << ',';
    if (k < log.formation_error.size()) os << format_csv_double(log.formation_error[k]);
    os << '\n';
  }
}

}  // namespace consensus::io
