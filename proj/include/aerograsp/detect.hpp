#pragma once

#include <cstdint>
#include <vector>

#include "aerograsp/camera.hpp"
#include "aerograsp/errors.hpp"
#include "aerograsp/frames.hpp"

namespace aerograsp {

/// Object classes the color detector reports, in report order.
enum class ObjectClass { Red, Blue, Black };

const char* to_string(ObjectClass cls);

/// Hexcone HSV values: hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
    double h;
    double s;
    double v;
};

Hsv rgb_to_hsv(const Rgb& rgb);

/// Accepted HSV window for one color class. A hue interval with lo > hi wraps
/// through 0 (e.g. red: [345, 15]).
struct ClassThreshold {
    double hue_lo = 0.0;
    double hue_hi = 360.0;
    double sat_min = 0.0;
    double sat_max = 1.0;
    double val_min = 0.0;
    double val_max = 1.0;

    bool contains(const Hsv& hsv) const;
};

struct ColorThresholds {
    ClassThreshold red;
    ClassThreshold blue;
    ClassThreshold black;

    static ColorThresholds defaults();
    const ClassThreshold& for_class(ObjectClass cls) const;
};

/// 8x downsample by block mean, rounded half up. Output dimensions are
/// floor(input / 8); trailing rows/columns that do not fill a block are dropped.
ImageBuffer downsample_eighth(const ImageBuffer& img);

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major, 0 or 1

    static BinaryMask zeros(int width, int height);
    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { data[std::size_t(y) * width + x] = v; }
    bool operator==(const BinaryMask&) const = default;
};

BinaryMask classify_mask(const ImageBuffer& img, const ClassThreshold& threshold);

/// Square structuring element of side 2*radius+1; pixels beyond the image
/// border count as background for both erosion and dilation.
enum class MorphOp { Open, Close };

BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask morphology(const BinaryMask& mask, MorphOp op, int radius);

/// One 8-connected component with raw moments (m00 = pixel_count).
struct Component {
    int pixel_count = 0;
    std::int64_t m10 = 0;  // sum of x coordinates
    std::int64_t m01 = 0;  // sum of y coordinates
    int min_row = 0;
    int min_col = 0;
};

/// Components sorted by (min_row, min_col).
std::vector<Component> extract_components(const BinaryMask& mask);

struct DetectedObject {
    ObjectClass color_class = ObjectClass::Red;
    Vec2 centroid_px = Vec2::Zero();  // full-resolution pixel coordinates
    double area_fraction = 0.0;       // of the downsampled image plane
    int pixel_count = 0;              // downsampled pixels
};

/// Full pipeline on a full-resolution frame: downsample, threshold per class,
/// open then close (radius 1), extract components, drop components outside
/// [0.004, 0.9] of the downsampled area, and map centroids back to
/// full-resolution coordinates. Report order is red, blue, black; within a
/// class by (min_row, min_col).
std::vector<DetectedObject> detect_objects(const ImageBuffer& img,
                                           const ColorThresholds& thresholds);

}  // namespace aerograsp
