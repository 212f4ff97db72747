#pragma once

#include "lexcraft/image.hpp"

#include <json.hpp>

namespace lexcraft {

/// Axis-aligned rectangle in fractions of its owning surface.
/// Construct through make(); the invariants hold for every instance.
class NormRect {
public:
    NormRect() = default;

    /// Throws Error{InvalidGeometry} unless 0 <= x, y; w, h > 0; x + w <= 1; y + h <= 1.
    static NormRect make(double x, double y, double w, double h);

    double x() const { return x_; }
    double y() const { return y_; }
    double w() const { return w_; }
    double h() const { return h_; }
    double area() const { return w_ * h_; }

    /// Same size, new origin. Throws if the result leaves the unit square.
    NormRect moved_to(double x, double y) const { return make(x, y, w_, h_); }

    /// Pixel rectangle on a width x height surface, edges rounded to the
    /// nearest pixel and at least one pixel on each side.
    PixelRect to_pixels(int width, int height) const;

    nlohmann::json to_json() const;
    static NormRect from_json(const nlohmann::json& j);

    friend bool operator==(const NormRect&, const NormRect&) = default;

private:
    NormRect(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {}

    double x_ = 0.0;
    double y_ = 0.0;
    double w_ = 1.0;
    double h_ = 1.0;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Throws Error{InvalidGeometry} outside [0,1]^2.
Point make_point(double x, double y);

double iou(const NormRect& a, const NormRect& b);

} // namespace lexcraft
