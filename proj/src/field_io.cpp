#include "wienerlab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "wienerlab/errors.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

void save_field(const std::filesystem::path& path, const Field& field) {
    const auto& g = field.grid();
    nlohmann::json meta = {{"d", g.dim()},
                           {"M", g.points()},
                           {"L", g.half_extent()},
                           {"space", std::string(to_string(field.space()))},
                           {"version", kFieldFormatVersion}};
    std::ofstream raw(path, std::ios::binary | std::ios::trunc);
    if (!raw) throw ValidationError("cannot open '" + path.string() + "' for writing");
    raw.write(reinterpret_cast<const char*>(field.values().data()),
              static_cast<std::streamsize>(field.size() * sizeof(Complex)));
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw ValidationError("cannot open '" + sidecar_path(path).string() + "' for writing");
    side << meta.dump(2) << '\n';
}

Field load_field(const std::filesystem::path& path, const FieldLoadOptions& options) {
    std::ifstream side(sidecar_path(path));
    if (!side) throw ValidationError("missing sidecar '" + sidecar_path(path).string() + "'");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("sidecar '" + sidecar_path(path).string() + "': " + e.what());
    }
    for (const char* key : {"d", "M", "L", "space", "version"}) {
        if (!meta.contains(key)) throw ValidationError("sidecar: missing field '" + std::string(key) + "'");
    }
    if (meta["version"].get<int>() != kFieldFormatVersion) {
        throw ValidationError("sidecar.version: unsupported field format version " + meta["version"].dump());
    }
    const TorusGrid grid = make_grid(meta["d"].get<int>(), meta["M"].get<int>(), meta["L"].get<double>());
    const Space space = space_from_string(meta["space"].get<std::string>());

    std::ifstream raw(path, std::ios::binary);
    if (!raw) throw ValidationError("cannot open '" + path.string() + "'");
    ComplexBuffer values(grid.size());
    raw.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(Complex)));
    if (raw.gcount() != static_cast<std::streamsize>(values.size() * sizeof(Complex)) || raw.peek() != EOF) {
        throw ValidationError("'" + path.string() + "': payload size does not match the sidecar grid");
    }
    Field field(grid, space, std::move(values));
    if (options.require_decay) require_boundary_decay(field, options.decay_tolerance);
    return field;
}

}  // namespace wienerlab
