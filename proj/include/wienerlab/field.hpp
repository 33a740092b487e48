#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "wienerlab/aligned.hpp"
#include "wienerlab/grid.hpp"

namespace wienerlab {

enum class Space { physical, frequency };

std::string_view to_string(Space space);
Space space_from_string(std::string_view name);

/// Complex scalar function sampled on a TorusGrid, in one of the two spaces.
class Field {
public:
    Field() = default;
    Field(TorusGrid grid, Space space);
    Field(TorusGrid grid, Space space, ComplexBuffer values);

    const TorusGrid& grid() const { return grid_; }
    Space space() const { return space_; }
    std::size_t size() const { return values_.size(); }

    std::span<Complex> values() { return values_; }
    std::span<const Complex> values() const { return values_; }
    ComplexBuffer& buffer() { return values_; }
    const ComplexBuffer& buffer() const { return values_; }

    Complex& operator[](std::size_t i) { return values_[i]; }
    const Complex& operator[](std::size_t i) const { return values_[i]; }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(Complex scale);

private:
    TorusGrid grid_;
    Space space_ = Space::physical;
    ComplexBuffer values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Complex scale, Field a);

/// Frames u(t0 + k dt), k = 0..n-1, on one grid.
struct SpacetimeField {
    std::vector<Field> frames;
    double t0 = 0.0;
    double dt = 0.0;

    std::size_t count() const { return frames.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double end_time() const { return frames.empty() ? t0 : time(frames.size() - 1); }
    const TorusGrid& grid() const { return frames.front().grid(); }

    /// Throws ValidationError unless non-empty, dt > 0 and all frames share a grid.
    void validate() const;
};

}  // namespace wienerlab
