#include "dih/color.hpp"

#include <algorithm>
#include <cmath>

namespace dih {
namespace {

// D65 reference white in XYZ scaled so Yn = 1.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

constexpr double kLabEps = 216.0 / 24389.0;  // (6/29)^3
constexpr double kLabKappa = 24389.0 / 27.0; // (29/3)^3

double gamma_decode(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double gamma_encode(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    return t > kLabEps ? std::cbrt(t) : (kLabKappa * t + 16.0) / 116.0;
}

double lab_f_inv(double ft) {
    const double t3 = ft * ft * ft;
    return t3 > kLabEps ? t3 : (116.0 * ft - 16.0) / kLabKappa;
}

} // namespace

void srgb_to_lab(double r, double g, double b, double& L, double& a, double& bb) {
    const double rl = gamma_decode(r);
    const double gl = gamma_decode(g);
    const double bl = gamma_decode(b);

    const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

    const double fx = lab_f(x / kXn);
    const double fy = lab_f(y / kYn);
    const double fz = lab_f(z / kZn);

    L = 116.0 * fy - 16.0;
    a = 500.0 * (fx - fy);
    bb = 200.0 * (fy - fz);
}

void lab_to_srgb(double L, double a, double bb, double& r, double& g, double& b) {
    const double fy = (L + 16.0) / 116.0;
    const double fx = fy + a / 500.0;
    const double fz = fy - bb / 200.0;

    const double x = kXn * lab_f_inv(fx);
    const double y = kYn * lab_f_inv(fy);
    const double z = kZn * lab_f_inv(fz);

    const double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    r = std::clamp(gamma_encode(std::max(rl, 0.0)), 0.0, 1.0);
    g = std::clamp(gamma_encode(std::max(gl, 0.0)), 0.0, 1.0);
    b = std::clamp(gamma_encode(std::max(bl, 0.0)), 0.0, 1.0);
}

LabImage rgb_to_lab(const Image& image) {
    LabImage lab(image.width, image.height);
    const size_t n = image.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        double L, a, b;
        srgb_to_lab(image.data[i * 3 + 0], image.data[i * 3 + 1], image.data[i * 3 + 2], L, a, b);
        lab.data[i * 3 + 0] = static_cast<float>(L);
        lab.data[i * 3 + 1] = static_cast<float>(a);
        lab.data[i * 3 + 2] = static_cast<float>(b);
    }
    return lab;
}

Image lab_to_rgb(const LabImage& lab) {
    Image out(lab.width, lab.height);
    const size_t n = static_cast<size_t>(lab.width) * lab.height;
    for (size_t i = 0; i < n; ++i) {
        double r, g, b;
        lab_to_srgb(lab.data[i * 3 + 0], lab.data[i * 3 + 1], lab.data[i * 3 + 2], r, g, b);
        out.data[i * 3 + 0] = static_cast<float>(r);
        out.data[i * 3 + 1] = static_cast<float>(g);
        out.data[i * 3 + 2] = static_cast<float>(b);
    }
    return out;
}

} // namespace dih
