#include "polypcount/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polypcount/errors.hpp"

namespace polypcount {

bool BBox::valid() const {
    const bool finite = std::isfinite(x_min) && std::isfinite(y_min) &&
                        std::isfinite(x_max) && std::isfinite(y_max);
    return finite && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max && y_min < y_max;
}

double iou(const BBox& a, const BBox& b) {
    if (!a.valid() || !b.valid()) {
        std::ostringstream msg;
        msg << "iou: degenerate bounding box ["
            << (a.valid() ? b.x_min : a.x_min) << ", "
            << (a.valid() ? b.y_min : a.y_min) << ", "
            << (a.valid() ? b.x_max : a.x_max) << ", "
            << (a.valid() ? b.y_max : a.y_max) << "] (invalid annotation)";
        throw DataError(msg.str());
    }
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

} // namespace polypcount
