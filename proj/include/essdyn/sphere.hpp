#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace essdyn {

using Complex = std::complex<double>;

/// A point of the Riemann sphere: a finite complex number or the point at
/// infinity. Finite coordinates are never NaN.
struct SpherePoint {
    Complex value{0.0, 0.0};
    bool at_infinity = false;

    SpherePoint() = default;

    static SpherePoint finite(Complex z) {
        if (std::isnan(z.real()) || std::isnan(z.imag()))
            throw std::invalid_argument("SpherePoint: NaN coordinate");
        SpherePoint p;
        p.value = z;
        return p;
    }

    static SpherePoint infinity() {
        SpherePoint p;
        p.at_infinity = true;
        return p;
    }

    bool is_finite() const { return !at_infinity; }

    std::string str() const;
};

inline bool operator==(const SpherePoint& a, const SpherePoint& b) {
    if (a.at_infinity || b.at_infinity) return a.at_infinity == b.at_infinity;
    return a.value == b.value;
}

/// Chordal metric on the sphere; chordal(z, inf) = 2/sqrt(1+|z|^2), max 2.
double chordal(const SpherePoint& p, const SpherePoint& q);
double chordal(Complex p, Complex q);
double chordal_to_infinity(Complex p);

/// Axis-aligned rectangle in the plane.
struct Window {
    double re_min = -1.0, re_max = 1.0;
    double im_min = -1.0, im_max = 1.0;

    bool contains(Complex z) const {
        return z.real() >= re_min && z.real() <= re_max &&
               z.imag() >= im_min && z.imag() <= im_max;
    }
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    bool valid() const { return re_max > re_min && im_max > im_min; }
};

}  // namespace essdyn
