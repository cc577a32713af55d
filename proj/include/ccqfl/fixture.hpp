// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Deterministic synthetic digit fixture for environments without the MNIST
 * files: renders jittered stroke glyphs of "3" and "6" into standard IDX
 * image/label pairs, so the full ingestion -> PCA -> training pipeline can
 * run offline. Point the data-path config keys at real MNIST to reproduce
 * the reference experiments instead.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ccqfl/errors.hpp"
#include "ccqfl/rng.hpp"

namespace ccqfl::fixture {

inline constexpr int kCanvas = 28;

namespace detail {

struct Point {
    double x;
    double y;
};

/// Jittered affine placement of a glyph in the canvas.
struct Placement {
    double scale;
    double angle;
    double shear;
    double dx;
    double dy;
    double wobble_amp;
    double wobble_phase;

    Point apply(Point p, double t) const {
        // wobble: low-frequency hand shake along the stroke parameter
        p.x += wobble_amp * std::sin(4.0 * t + wobble_phase);
        p.y += wobble_amp * std::cos(3.0 * t + 1.7 * wobble_phase);
        const double cx = kCanvas / 2.0;
        const double cy = kCanvas / 2.0;
        double x = (p.x - cx) * scale;
        double y = (p.y - cy) * scale;
        x += shear * y;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        return {cx + c * x - s * y + dx, cy + s * x + c * y + dy};
    }
};

inline void splat(std::vector<double> &canvas, Point p, double sigma, double amplitude) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(p.x) - radius);
    const int x1 = std::min(kCanvas - 1, static_cast<int>(p.x) + radius);
    const int y0 = std::max(0, static_cast<int>(p.y) - radius);
    const int y1 = std::min(kCanvas - 1, static_cast<int>(p.y) + radius);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double ddx = x - p.x;
            const double ddy = y - p.y;
            const double value = amplitude * std::exp(-(ddx * ddx + ddy * ddy) /
                                                      (2.0 * sigma * sigma));
            double &cell = canvas[y * kCanvas + x];
            cell = std::max(cell, value);
        }
    }
}

inline void draw_arc(std::vector<double> &canvas, const Placement &placement, double cx,
                     double cy, double r, double a0, double a1, double sigma,
                     double amplitude) {
    const int steps = 90;
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const double a = a0 + (a1 - a0) * t;
        splat(canvas, placement.apply({cx + r * std::cos(a), cy + r * std::sin(a)}, t),
              sigma, amplitude);
    }
}

inline void draw_bezier(std::vector<double> &canvas, const Placement &placement, Point p0,
                        Point p1, Point p2, double sigma, double amplitude) {
    const int steps = 70;
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const double u = 1.0 - t;
        const Point p = {u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x,
                         u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y};
        splat(canvas, placement.apply(p, t), sigma, amplitude);
    }
}

inline constexpr double kDeg = 3.14159265358979323846 / 180.0;

// y grows downward; angle 90 deg points to the bottom of the canvas.
inline void draw_three(std::vector<double> &canvas, const Placement &pl, double sigma,
                       double amplitude) {
    draw_arc(canvas, pl, 13.0, 9.3, 4.6, 195.0 * kDeg, 450.0 * kDeg, sigma, amplitude);
    draw_arc(canvas, pl, 13.0, 18.4, 4.6, -90.0 * kDeg, 165.0 * kDeg, sigma, amplitude);
}

inline void draw_six(std::vector<double> &canvas, const Placement &pl, double sigma,
                     double amplitude) {
    draw_bezier(canvas, pl, {17.6, 4.4}, {12.2, 5.8}, {10.6, 13.6}, sigma, amplitude);
    draw_arc(canvas, pl, 13.4, 17.6, 4.3, 0.0, 360.0 * kDeg, sigma, amplitude);
}

} // namespace detail

/// Render one glyph of `digit` (3 or 6) with seeded jitter and noise.
inline std::vector<std::uint8_t> render_digit(int digit, RngStream &rng) {
    detail::Placement placement;
    placement.scale = rng.uniform(0.82, 1.12);
    placement.angle = rng.uniform(-0.16, 0.16);
    placement.shear = rng.uniform(-0.18, 0.18);
    placement.dx = rng.uniform(-2.2, 2.2);
    placement.dy = rng.uniform(-2.2, 2.2);
    placement.wobble_amp = rng.uniform(0.0, 0.55);
    placement.wobble_phase = rng.uniform(0.0, 6.283185307179586);
    const double sigma = rng.uniform(0.85, 1.35);
    const double amplitude = rng.uniform(190.0, 255.0);

    std::vector<double> canvas(kCanvas * kCanvas, 0.0);
    if (digit == 3) {
        detail::draw_three(canvas, placement, sigma, amplitude);
    } else {
        detail::draw_six(canvas, placement, sigma, amplitude);
    }

    const double noise_sigma = rng.uniform(4.0, 14.0);
    std::vector<std::uint8_t> pixels(canvas.size());
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        const double value = canvas[i] + noise_sigma * rng.normal();
        pixels[i] = static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0));
    }
    return pixels;
}

/**
 * @brief Write `count` images of randomly interleaved 3s and 6s as an IDX
 * image/label file pair. Fully determined by the seed.
 */
inline void write_synthetic_idx(const std::string &images_path,
                                const std::string &labels_path, std::size_t count,
                                std::uint64_t seed) {
    RngStream rng(seed);

    auto put_be32 = [](std::ofstream &out, std::uint32_t v) {
        const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                               static_cast<char>(v >> 8), static_cast<char>(v)};
        out.write(bytes, 4);
    };

    std::ofstream images(images_path, std::ios::binary);
    std::ofstream labels(labels_path, std::ios::binary);
    if (!images || !labels) {
        throw IngestionError("cannot open fixture output files");
    }
    put_be32(images, 0x00000803);
    put_be32(images, static_cast<std::uint32_t>(count));
    put_be32(images, kCanvas);
    put_be32(images, kCanvas);
    put_be32(labels, 0x00000801);
    put_be32(labels, static_cast<std::uint32_t>(count));

    for (std::size_t i = 0; i < count; ++i) {
        RngStream image_rng = rng.child(i);
        const int digit = image_rng.uniform_int(2) ? 6 : 3;
        const std::vector<std::uint8_t> pixels = render_digit(digit, image_rng);
        images.write(reinterpret_cast<const char *>(pixels.data()),
                     static_cast<std::streamsize>(pixels.size()));
        const char label = static_cast<char>(digit);
        labels.write(&label, 1);
    }
    if (!images || !labels) {
        throw IngestionError("failed writing fixture files");
    }
}

} // namespace ccqfl::fixture
