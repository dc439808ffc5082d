#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "consensus/gain_design.hpp"
#include "consensus/network_sim.hpp"
#include "consensus/region.hpp"

namespace consensus::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file; parse failures become ParseError with
/// file:line:column context.
Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& origin);

Matrix matrix_from_json(const Json& j, const std::string& what);
Json matrix_to_json(const Matrix& m);
std::vector<Vector> vectors_from_json(const Json& j, const std::string& what);

/// {"A": [[...]], "B": [[...]], "C": [[...]]}
AgentModel model_from_json(const Json& j);
Json model_to_json(const AgentModel& model);

/// {"n": int, "D": [[...]]} or {"n": int, "edges": [[j, i], ...],
/// "self_weight_floor": float}. Edge labels are 1-based agent numbers and
/// [j, i] means agent i receives from agent j.
Topology topology_from_json(const Json& j);
Json topology_to_json(const Topology& t);

/// {"K": [[...]], "L": [[...]], "method": "...", "certified_delta": float}
ProtocolGains gains_from_json(const Json& j, const AgentModel& model);
Json gains_to_json(const ProtocolGains& g);

/// {"h": [[...], ...]}
Formation formation_from_json(const Json& j);

/// Shortest decimal text that reads back to exactly the same double.
std::string format_double(double v);
/// Fixed 17 significant digits, the CSV convention.
std::string format_csv_double(double v);

void write_region_csv(std::ostream& os, const ConsensusRegion& region);
Json intervals_to_json(const std::vector<RealInterval>& intervals);
/// Binary PGM (P5): white = stable, black = unstable, top row = largest imag.
void write_region_pgm(std::ostream& os, const ConsensusRegion& region);

void write_mare_csv(std::ostream& os, const MareSolution& sol);

/// step,agent,kind,c0,...,c{n-1}; agents are 1-based.
void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log);
/// step,consensus_error,formation_error (formation column empty outside formation mode).
void write_error_csv(std::ostream& os, const TrajectoryLog& log);

}  // namespace consensus::io
