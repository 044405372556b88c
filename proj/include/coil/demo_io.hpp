#pragma once

#include <string>
#include <vector>

#include "coil/features.hpp"

namespace coil::io {

// Demonstration files carry a versioned header (schema + episode table)
// followed by one whitespace-separated feature row per timestep. Values are
// printed with round-trip precision so save/load is an identity.
void save_demos(const std::vector<features::FeatureTrajectory>& demos,
                const std::string& path);

std::vector<features::FeatureTrajectory> load_demos(const std::string& path);

// Raises SchemaError unless the file schema matches the expected one.
void require_schema(const std::vector<features::FeatureTrajectory>& demos,
                    const features::FeatureSchema& expected);

}  // namespace coil::io
