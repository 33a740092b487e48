#include "wienerlab/field.hpp"

#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

std::string_view to_string(Space space) {
    return space == Space::physical ? "physical" : "frequency";
}

Space space_from_string(std::string_view name) {
    if (name == "physical") return Space::physical;
    if (name == "frequency") return Space::frequency;
    throw ValidationError("space: expected 'physical' or 'frequency', got '" + std::string(name) + "'");
}

Field::Field(TorusGrid grid, Space space)
    : grid_(std::move(grid)), space_(space), values_(grid_.size(), Complex{}) {}

Field::Field(TorusGrid grid, Space space, ComplexBuffer values)
    : grid_(std::move(grid)), space_(space), values_(std::move(values)) {
    require(values_.size() == grid_.size(), "field: value count does not match grid size");
}

namespace {
void require_compatible(const Field& a, const Field& b) {
    require(a.grid() == b.grid(), "field arithmetic: grids differ");
    require(a.space() == b.space(), "field arithmetic: spaces differ");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(Complex scale) {
    for (auto& v : values_) v *= scale;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Complex scale, Field a) { return a *= scale; }

void SpacetimeField::validate() const {
    require(!frames.empty(), "spacetime field: no frames");
    require(dt > 0.0, "spacetime field: dt must be positive");
    for (const auto& f : frames) {
        require(f.grid() == frames.front().grid(), "spacetime field: frames live on different grids");
    }
}

}  // namespace wienerlab
