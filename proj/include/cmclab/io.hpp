#pragma once

// Text formats for cell sets and problem descriptions.
//
// CellSet file:
//     cmcgrid v1 d=2 ext=8,8 h=0.25 origin=0.125,0.125 stencil=crofton
//     <run-length tokens>
// Tokens are "<count><bit>" (for example "12 0" is written "120"), space
// separated, in cell index order. Reals use shortest round-trip formatting.
// A header without origin= denotes a corner-aligned grid (origin h/2).

#include "cmclab/grid.hpp"
#include "cmclab/mincut.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cmclab {

std::string format_real(double v);

std::string rle_encode(const std::vector<bool>& bits);
std::vector<bool> rle_decode(const std::string& text, std::size_t expected);

std::string format_cellset(const CellSet& set);
CellSet parse_cellset(const std::string& text);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

void save_cellset(const std::filesystem::path& path, const CellSet& set);
CellSet load_cellset(const std::filesystem::path& path);

nlohmann::json grid_to_json(const GridGeometry& grid);
GridPtr grid_from_json(const nlohmann::json& j);

// {grid, lambda, fixed_in, fixed_out, active_region, weights?}; masks are RLE strings.
nlohmann::json problem_to_json(const MinCutProblem& problem);
MinCutProblem problem_from_json(const nlohmann::json& j);

nlohmann::json result_summary(const MinimizerResult& res);

// Throws UsageError naming the first key of j that is not in allowed.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where);

} // namespace cmclab
