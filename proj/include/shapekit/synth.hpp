#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapekit/geometry.hpp"

namespace shapekit::synth {

// Filled binary silhouettes on a dark canvas (foreground 1.0). Vertices are
// in image coordinates; pixels are classified by even-odd polygon membership.
GrayImage fill_polygon(int width, int height, const std::vector<Vec2>& vertices);

// All shapes are centered on the canvas. `phase` rotates the vertex ring.
GrayImage regular_polygon(int canvas, int sides, double radius, double phase = 0.0);
GrayImage square(int canvas, double side, double phase = 0.0);
GrayImage rectangle(int canvas, double width, double height, double phase = 0.0);
GrayImage triangle(int canvas, double radius, double phase = 0.0);
GrayImage star(int canvas, int points, double r_outer, double r_inner, double phase = 0.0);
GrayImage cross(int canvas, double arm_length, double arm_width, double phase = 0.0);
GrayImage l_shape(int canvas, double size, double thickness, double phase = 0.0);
GrayImage arrow(int canvas, double length, double width, double phase = 0.0);
GrayImage disk(int canvas, double radius);
GrayImage annulus(int canvas, double r_outer, double r_inner);
GrayImage ellipse(int canvas, double a, double b, double phase = 0.0);

// Ten distinct corner-rich polygons sized for descriptor work; used when no
// real dataset is available.
std::vector<std::pair<std::string, GrayImage>> polygon_suite(int canvas = 512);

// Writes a labeled dataset of PGM silhouettes named <class>-<index>.pgm with
// per-instance rotation, scale, and boundary-noise jitter. Returns the class
// names used.
std::vector<std::string> make_synthetic_dataset(const std::string& dir, int num_classes,
                                                int per_class, std::uint64_t seed,
                                                int canvas = 192);

}  // namespace shapekit::synth
