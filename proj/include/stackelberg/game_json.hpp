#pragma once

// JSON form of an AggregativeGame. Matrices are row-major arrays of rows.
//
//   { "n0": .., "N": .., "m": .., "b": [..],
//     "leader": { "R0", "r0", "S": [..], "t": [..], "Y0": { "lo", "hi" }, "G0", "h0" },
//     "followers": [ { "Q", "C_row", "C0", "F", "g", "A", "h" }, .. ] }
//
// C_row is either { "self": M, "other": M } (every off-diagonal block equal)
// or { "blocks": [M, ..] }. Infinite box bounds are written as null.

#include <string>

#include <json.hpp>

#include "stackelberg/game.hpp"

namespace stackelberg {

nlohmann::json game_to_json(const AggregativeGame& game);

// Throws StructuralError on missing keys or inconsistent sizes.
AggregativeGame game_from_json(const nlohmann::json& j);

AggregativeGame load_game(const std::string& path);
void save_game(const AggregativeGame& game, const std::string& path);

}  // namespace stackelberg
