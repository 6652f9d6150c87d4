#include "aerograsp/detect.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace aerograsp {

const char* to_string(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::Red: return "red";
        case ObjectClass::Blue: return "blue";
        case ObjectClass::Black: return "black";
    }
    return "unknown";
}

Hsv rgb_to_hsv(const Rgb& rgb) {
    const double r = rgb.r / 255.0;
    const double g = rgb.g / 255.0;
    const double b = rgb.b / 255.0;
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    const double delta = maxc - minc;

    Hsv out{0.0, 0.0, maxc};
    if (maxc > 0.0) {
        out.s = delta / maxc;
    }
    if (delta > 0.0) {
        double h;
        if (maxc == r) {
            h = std::fmod((g - b) / delta, 6.0);
        } else if (maxc == g) {
            h = (b - r) / delta + 2.0;
        } else {
            h = (r - g) / delta + 4.0;
        }
        h *= 60.0;
        if (h < 0.0) {
            h += 360.0;
        }
        out.h = h;
    }
    return out;
}

bool ClassThreshold::contains(const Hsv& hsv) const {
    const bool hue_ok = hue_lo <= hue_hi ? (hsv.h >= hue_lo && hsv.h <= hue_hi)
                                         : (hsv.h >= hue_lo || hsv.h <= hue_hi);
    return hue_ok && hsv.s >= sat_min && hsv.s <= sat_max && hsv.v >= val_min &&
           hsv.v <= val_max;
}

ColorThresholds ColorThresholds::defaults() {
    ColorThresholds t;
    t.red = ClassThreshold{345.0, 15.0, 0.5, 1.0, 0.3, 1.0};
    t.blue = ClassThreshold{200.0, 260.0, 0.5, 1.0, 0.3, 1.0};
    // Hue is meaningless at low value, so black constrains value only.
    t.black = ClassThreshold{0.0, 360.0, 0.0, 1.0, 0.0, 0.2};
    return t;
}

const ClassThreshold& ColorThresholds::for_class(ObjectClass cls) const {
    switch (cls) {
        case ObjectClass::Red: return red;
        case ObjectClass::Blue: return blue;
        case ObjectClass::Black: return black;
    }
    return red;
}

ImageBuffer downsample_eighth(const ImageBuffer& img) {
    const int out_w = img.width / 8;
    const int out_h = img.height / 8;
    if (out_w == 0 || out_h == 0) {
        throw TooSmall("image smaller than one 8x8 block");
    }
    ImageBuffer out = ImageBuffer::filled(out_w, out_h, 0, 0, 0);
    for (int by = 0; by < out_h; ++by) {
        for (int bx = 0; bx < out_w; ++bx) {
            unsigned sum[3] = {0, 0, 0};
            for (int dy = 0; dy < 8; ++dy) {
                const std::uint8_t* p = img.at(bx * 8, by * 8 + dy);
                for (int dx = 0; dx < 8; ++dx) {
                    sum[0] += p[0];
                    sum[1] += p[1];
                    sum[2] += p[2];
                    p += 3;
                }
            }
            out.set(bx, by, std::uint8_t((sum[0] + 32) >> 6), std::uint8_t((sum[1] + 32) >> 6),
                    std::uint8_t((sum[2] + 32) >> 6));
        }
    }
    return out;
}

BinaryMask BinaryMask::zeros(int width, int height) {
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.data.assign(std::size_t(width) * height, 0);
    return m;
}

BinaryMask classify_mask(const ImageBuffer& img, const ClassThreshold& threshold) {
    BinaryMask mask = BinaryMask::zeros(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* p = img.at(x, y);
            if (threshold.contains(rgb_to_hsv(Rgb{p[0], p[1], p[2]}))) {
                mask.set(x, y, 1);
            }
        }
    }
    return mask;
}

namespace {

template <bool Erode>
BinaryMask morph_square(const BinaryMask& mask, int radius) {
    if (radius < 1) {
        throw Error("morphology radius must be >= 1");
    }
    BinaryMask out = BinaryMask::zeros(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool acc = Erode;
            for (int dy = -radius; dy <= radius && acc == Erode; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    const bool v = nx >= 0 && nx < mask.width && ny >= 0 && ny < mask.height &&
                                   mask.at(nx, ny) != 0;
                    if (v != Erode) {
                        acc = !Erode;
                        break;
                    }
                }
            }
            out.set(x, y, acc ? 1 : 0);
        }
    }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int radius) { return morph_square<true>(mask, radius); }

BinaryMask dilate(const BinaryMask& mask, int radius) {
    return morph_square<false>(mask, radius);
}

BinaryMask morphology(const BinaryMask& mask, MorphOp op, int radius) {
    return op == MorphOp::Open ? dilate(erode(mask, radius), radius)
                               : erode(dilate(mask, radius), radius);
}

std::vector<Component> extract_components(const BinaryMask& mask) {
    std::vector<std::uint8_t> seen(mask.data.size(), 0);
    std::vector<Component> components;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const std::size_t idx = std::size_t(y) * mask.width + x;
            if (mask.data[idx] == 0 || seen[idx]) {
                continue;
            }
            Component comp;
            comp.min_row = y;
            comp.min_col = x;
            seen[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++comp.pixel_count;
                comp.m10 += cx;
                comp.m01 += cy;
                comp.min_row = std::min(comp.min_row, cy);
                comp.min_col = std::min(comp.min_col, cx);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height) {
                            continue;
                        }
                        const std::size_t nidx = std::size_t(ny) * mask.width + nx;
                        if (mask.data[nidx] != 0 && !seen[nidx]) {
                            seen[nidx] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            components.push_back(comp);
        }
    }
    std::sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
        return std::tie(a.min_row, a.min_col) < std::tie(b.min_row, b.min_col);
    });
    return components;
}

std::vector<DetectedObject> detect_objects(const ImageBuffer& img,
                                           const ColorThresholds& thresholds) {
    const ImageBuffer small = downsample_eighth(img);
    const double plane = double(small.width) * small.height;
    std::vector<DetectedObject> out;
    for (ObjectClass cls : {ObjectClass::Red, ObjectClass::Blue, ObjectClass::Black}) {
        BinaryMask mask = classify_mask(small, thresholds.for_class(cls));
        mask = morphology(mask, MorphOp::Open, 1);
        mask = morphology(mask, MorphOp::Close, 1);
        for (const Component& comp : extract_components(mask)) {
            const double frac = comp.pixel_count / plane;
            if (frac < 0.004 || frac > 0.9) {
                continue;
            }
            // Downsampled cell (i, j) covers full-resolution pixels
            // [8i, 8i+7] x [8j, 8j+7]; its center sits at 8i + 3.5.
            DetectedObject det;
            det.color_class = cls;
            det.centroid_px =
                Vec2(8.0 * comp.m10 / comp.pixel_count + 3.5, 8.0 * comp.m01 / comp.pixel_count + 3.5);
            det.area_fraction = frac;
            det.pixel_count = comp.pixel_count;
            out.push_back(det);
        }
    }
    return out;
}

}  // namespace aerograsp
