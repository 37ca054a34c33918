#include "shapekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "shapekit/image.hpp"

namespace shapekit::synth {

namespace {

std::vector<Vec2> rotate_about(const std::vector<Vec2>& pts, double cx, double cy, double phase) {
    const double c = std::cos(phase), s = std::sin(phase);
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const Vec2& p : pts) {
        const double dx = p.x - cx, dy = p.y - cy;
        out.push_back({cx + c * dx - s * dy, cy + s * dx + c * dy});
    }
    return out;
}

std::vector<Vec2> ring(int n, double cx, double cy, double radius, double phase) {
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double a = phase + kTwoPi * i / n;
        pts.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a)});
    }
    return pts;
}

}  // namespace

GrayImage fill_polygon(int width, int height, const std::vector<Vec2>& vertices) {
    GrayImage img(width, height, 0.0);
    if (vertices.size() < 3) return img;
    double min_x = vertices[0].x, max_x = min_x, min_y = vertices[0].y, max_y = min_y;
    for (const Vec2& v : vertices) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)));
    const std::size_t n = vertices.size();
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            bool inside = false;
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Vec2& a = vertices[i];
                const Vec2& b = vertices[j];
                if ((a.y > y) != (b.y > y) &&
                    x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x)
                    inside = !inside;
            }
            if (inside) img.at(x, y) = 1.0;
        }
    }
    return img;
}

GrayImage regular_polygon(int canvas, int sides, double radius, double phase) {
    const double c = (canvas - 1) / 2.0;
    return fill_polygon(canvas, canvas, ring(sides, c, c, radius, phase));
}

GrayImage square(int canvas, double side, double phase) {
    const double c = (canvas - 1) / 2.0;
    const double h = side / 2.0;
    std::vector<Vec2> pts{{c - h, c - h}, {c + h, c - h}, {c + h, c + h}, {c - h, c + h}};
    return fill_polygon(canvas, canvas, rotate_about(pts, c, c, phase));
}

GrayImage rectangle(int canvas, double width, double height, double phase) {
    const double c = (canvas - 1) / 2.0;
    const double hw = width / 2.0, hh = height / 2.0;
    std::vector<Vec2> pts{{c - hw, c - hh}, {c + hw, c - hh}, {c + hw, c + hh}, {c - hw, c + hh}};
    return fill_polygon(canvas, canvas, rotate_about(pts, c, c, phase));
}

GrayImage triangle(int canvas, double radius, double phase) {
    return regular_polygon(canvas, 3, radius, phase - kPi / 2.0);
}

GrayImage star(int canvas, int points, double r_outer, double r_inner, double phase) {
    const double c = (canvas - 1) / 2.0;
    std::vector<Vec2> pts;
    pts.reserve(2 * points);
    for (int i = 0; i < 2 * points; ++i) {
        const double r = i % 2 == 0 ? r_outer : r_inner;
        const double a = phase + kPi * i / points;
        pts.push_back({c + r * std::cos(a), c + r * std::sin(a)});
    }
    return fill_polygon(canvas, canvas, pts);
}

GrayImage cross(int canvas, double arm_length, double arm_width, double phase) {
    const double c = (canvas - 1) / 2.0;
    const double l = arm_length / 2.0, w = arm_width / 2.0;
    std::vector<Vec2> pts{{c - w, c - l}, {c + w, c - l}, {c + w, c - w}, {c + l, c - w},
                          {c + l, c + w}, {c + w, c + w}, {c + w, c + l}, {c - w, c + l},
                          {c - w, c + w}, {c - l, c + w}, {c - l, c - w}, {c - w, c - w}};
    return fill_polygon(canvas, canvas, rotate_about(pts, c, c, phase));
}

GrayImage l_shape(int canvas, double size, double thickness, double phase) {
    const double c = (canvas - 1) / 2.0;
    const double h = size / 2.0;
    // unequal arm thicknesses: a mirror-symmetric L puts its notch corner on
    // the exact centroid ray of an outer corner, which makes angular
    // nearest-neighbor signatures multivalued there
    const double tx = thickness * 0.8, ty = thickness * 1.2;
    std::vector<Vec2> pts{{c - h, c - h}, {c - h + tx, c - h}, {c - h + tx, c + h - ty},
                          {c + h, c + h - ty}, {c + h, c + h}, {c - h, c + h}};
    return fill_polygon(canvas, canvas, rotate_about(pts, c, c, phase));
}

GrayImage arrow(int canvas, double length, double width, double phase) {
    const double c = (canvas - 1) / 2.0;
    const double l = length / 2.0, w = width / 2.0;
    std::vector<Vec2> pts{{c - l, c - w / 2}, {c + l / 4, c - w / 2}, {c + l / 4, c - w},
                          {c + l, c},         {c + l / 4, c + w},     {c + l / 4, c + w / 2},
                          {c - l, c + w / 2}};
    return fill_polygon(canvas, canvas, rotate_about(pts, c, c, phase));
}

GrayImage disk(int canvas, double radius) {
    GrayImage img(canvas, canvas, 0.0);
    const double c = (canvas - 1) / 2.0;
    for (int y = 0; y < canvas; ++y)
        for (int x = 0; x < canvas; ++x)
            if (std::hypot(x - c, y - c) <= radius) img.at(x, y) = 1.0;
    return img;
}

GrayImage annulus(int canvas, double r_outer, double r_inner) {
    GrayImage img(canvas, canvas, 0.0);
    const double c = (canvas - 1) / 2.0;
    for (int y = 0; y < canvas; ++y)
        for (int x = 0; x < canvas; ++x) {
            const double r = std::hypot(x - c, y - c);
            if (r <= r_outer && r >= r_inner) img.at(x, y) = 1.0;
        }
    return img;
}

GrayImage ellipse(int canvas, double a, double b, double phase) {
    GrayImage img(canvas, canvas, 0.0);
    const double c = (canvas - 1) / 2.0;
    const double cp = std::cos(phase), sp = std::sin(phase);
    for (int y = 0; y < canvas; ++y)
        for (int x = 0; x < canvas; ++x) {
            const double dx = x - c, dy = y - c;
            const double u = cp * dx + sp * dy, v = -sp * dx + cp * dy;
            if (u * u / (a * a) + v * v / (b * b) <= 1.0) img.at(x, y) = 1.0;
        }
    return img;
}

std::vector<std::pair<std::string, GrayImage>> polygon_suite(int canvas) {
    const double r = canvas * 0.30;
    std::vector<std::pair<std::string, GrayImage>> shapes;
    shapes.emplace_back("square", square(canvas, 1.5 * r));
    shapes.emplace_back("rect", rectangle(canvas, 2.0 * r, 0.9 * r));
    shapes.emplace_back("triangle", triangle(canvas, 1.2 * r));
    shapes.emplace_back("cross", cross(canvas, 2.2 * r, 0.7 * r));
    shapes.emplace_back("star5", star(canvas, 5, 1.2 * r, 0.55 * r));
    shapes.emplace_back("star7", star(canvas, 7, 1.2 * r, 0.7 * r));
    shapes.emplace_back("hexagon", regular_polygon(canvas, 6, 1.1 * r));
    shapes.emplace_back("pentagon", regular_polygon(canvas, 5, 1.1 * r));
    shapes.emplace_back("lshape", l_shape(canvas, 1.9 * r, 0.7 * r));
    shapes.emplace_back("arrow", arrow(canvas, 2.1 * r, 1.2 * r));
    return shapes;
}

std::vector<std::string> make_synthetic_dataset(const std::string& dir, int num_classes,
                                                int per_class, std::uint64_t seed, int canvas) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const double r = canvas * 0.28;
    struct ClassSpec {
        const char* name;
        GrayImage (*make)(int canvas, double size, double phase);
    };
    static const ClassSpec specs[] = {
        {"square", [](int cv, double sz, double ph) { return square(cv, 1.5 * sz, ph); }},
        {"rect", [](int cv, double sz, double ph) { return rectangle(cv, 2.0 * sz, 0.8 * sz, ph); }},
        {"triangle", [](int cv, double sz, double ph) { return triangle(cv, 1.2 * sz, ph); }},
        {"cross", [](int cv, double sz, double ph) { return cross(cv, 2.2 * sz, 0.7 * sz, ph); }},
        {"star5", [](int cv, double sz, double ph) { return star(cv, 5, 1.2 * sz, 0.55 * sz, ph); }},
        {"star7", [](int cv, double sz, double ph) { return star(cv, 7, 1.2 * sz, 0.7 * sz, ph); }},
        {"hexagon", [](int cv, double sz, double ph) { return regular_polygon(cv, 6, 1.1 * sz, ph); }},
        {"lshape", [](int cv, double sz, double ph) { return l_shape(cv, 1.9 * sz, 0.7 * sz, ph); }},
        {"arrow", [](int cv, double sz, double ph) { return arrow(cv, 2.1 * sz, 1.2 * sz, ph); }},
        {"ellipse", [](int cv, double sz, double ph) { return ellipse(cv, 1.3 * sz, 0.7 * sz, ph); }},
    };
    num_classes = std::min<int>(num_classes, static_cast<int>(std::size(specs)));

    SplitMix64 rng(seed);
    std::vector<std::string> names;
    for (int c = 0; c < num_classes; ++c) {
        names.emplace_back(specs[c].name);
        for (int i = 1; i <= per_class; ++i) {
            const double phase = rng.uniform(0.0, kTwoPi);
            const double size = r * rng.uniform(0.75, 1.0);
            GrayImage img = specs[c].make(canvas, size, phase);
            img = flip_boundary_noise(img, 0.005, rng.next());
            const fs::path out = fs::path(dir) / (names.back() + "-" + std::to_string(i) + ".pgm");
            save_pgm(img, out.string());
        }
    }
    return names;
}

}  // namespace shapekit::synth
