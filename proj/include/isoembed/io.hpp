#pragma once
#include <string>

#include "json.hpp"
#include "isoembed/decompose.hpp"
#include "isoembed/map.hpp"

namespace isoembed {

nlohmann::json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

/// {grid, rank, samples}; samples[c] lists component c over the grid, last index fastest.
nlohmann::json field_to_json(const PeriodicField& f);
PeriodicField field_from_json(const nlohmann::json& j);
PeriodicField load_field(const std::string& path);

nlohmann::json map_to_json(const EquivariantMap& u);
EquivariantMap map_from_json(const nlohmann::json& j);
EquivariantMap load_map(const std::string& path);

nlohmann::json decomposition_to_json(const PropertyEDecomposition& d);

/// Rows x_1..x_n, u_1..u_q at every grid point.
void write_samples_csv(const EquivariantMap& u, const std::string& path);
/// Rows x_1..x_n, then the first three principal components of the centred image.
void write_projected3d_csv(const EquivariantMap& u, const std::string& path);
void write_field_csv(const PeriodicField& f, const std::string& path);
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace isoembed
