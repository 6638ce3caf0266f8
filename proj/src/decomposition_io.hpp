#pragma once

#include <filesystem>

#include <json.hpp>

#include "amalgam/czdecomp.hpp"

namespace amalgam::lab {

nlohmann::json cube_json(const Cube& q);
Cube cube_from_json(const nlohmann::json& j, int dim);

/// stem.bin (profile / scale as a field) and stem.json (cube, exponents,
/// validate_atom verdicts).
void write_atom(const Atom& a, const std::filesystem::path& stem);
Atom read_atom(const std::filesystem::path& stem);

/// dir/manifest.json, dir/atom_NNNNN.{bin,json}, dir/residual.bin.
void write_decomposition(const AtomicDecomposition& dec, const std::filesystem::path& dir);
AtomicDecomposition read_decomposition(const std::filesystem::path& dir);

}  // namespace amalgam::lab
