#pragma once

namespace polypcount {

// Axis-aligned box in pixel coordinates, corners (x_min, y_min)-(x_max, y_max).
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    // Finite, non-negative coordinates with strictly positive extent.
    bool valid() const;

    bool operator==(const BBox&) const = default;
};

// Intersection over union in [0, 1]. Throws DataError when either box is
// degenerate (zero area counts as a corrupted annotation).
double iou(const BBox& a, const BBox& b);

} // namespace polypcount
