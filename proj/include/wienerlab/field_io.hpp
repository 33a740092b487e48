#pragma once

#include <filesystem>

#include "wienerlab/field.hpp"

namespace wienerlab {

inline constexpr int kFieldFormatVersion = 1;

/// Writes `path` (raw little-endian complex128, row-major, centered lattice for
/// frequency fields) and the sidecar `path.json`:
///   {"d": .., "M": .., "L": .., "space": "physical"|"frequency", "version": 1}
void save_field(const std::filesystem::path& path, const Field& field);

struct FieldLoadOptions {
    bool require_decay = true;        // reject data that does not vanish at the box edge
    double decay_tolerance = 1e-10;
};

Field load_field(const std::filesystem::path& path, const FieldLoadOptions& options = {});

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace wienerlab
