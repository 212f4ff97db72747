#include "lexcraft/geometry.hpp"

#include "lexcraft/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lexcraft {

namespace {
// Slack for sums such as 0.7 + 0.3 that land a hair above 1 in binary.
constexpr double kSlack = 1e-9;
} // namespace

NormRect NormRect::make(double x, double y, double w, double h)
{
    const bool finite = std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
    if (!finite || x < 0.0 || y < 0.0 || w <= 0.0 || h <= 0.0 || x + w > 1.0 + kSlack || y + h > 1.0 + kSlack)
        throw Error(ErrorCode::InvalidGeometry, "rect (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                                                    std::to_string(w) + ", " + std::to_string(h) +
                                                    ") is not inside the unit square");
    return NormRect(x, y, w, h);
}

PixelRect NormRect::to_pixels(int width, int height) const
{
    PixelRect r;
    r.x0 = std::clamp(static_cast<int>(std::lround(x_ * width)), 0, width - 1);
    r.y0 = std::clamp(static_cast<int>(std::lround(y_ * height)), 0, height - 1);
    r.x1 = std::clamp(static_cast<int>(std::lround((x_ + w_) * width)), r.x0 + 1, width);
    r.y1 = std::clamp(static_cast<int>(std::lround((y_ + h_) * height)), r.y0 + 1, height);
    return r;
}

nlohmann::json NormRect::to_json() const
{
    return {{"x", x_}, {"y", y_}, {"w", w_}, {"h", h_}};
}

NormRect NormRect::from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidGeometry, "rect must be an object with x, y, w, h");
    return make(j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>());
}

Point make_point(double x, double y)
{
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw Error(ErrorCode::InvalidGeometry, "position must lie in [0,1]^2");
    return {x, y};
}

double iou(const NormRect& a, const NormRect& b)
{
    const double ix = std::max(0.0, std::min(a.x() + a.w(), b.x() + b.w()) - std::max(a.x(), b.x()));
    const double iy = std::max(0.0, std::min(a.y() + a.h(), b.y() + b.h()) - std::max(a.y(), b.y()));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

} // namespace lexcraft
