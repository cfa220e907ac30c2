#include "essdyn/sphere.hpp"

#include <sstream>

namespace essdyn {

std::string SpherePoint::str() const {
    if (at_infinity) return "inf";
    std::ostringstream os;
    os << value.real();
    if (value.imag() != 0.0) os << (value.imag() < 0 ? "" : "+") << value.imag() << "i";
    return os.str();
}

double chordal_to_infinity(Complex p) {
    return 2.0 / std::hypot(1.0, std::abs(p));
}

double chordal(Complex p, Complex q) {
    // Moderate magnitudes: one sqrt over squared norms, no overflow possible.
    double np = std::norm(p), nq = std::norm(q);
    if (np < 1e120 && nq < 1e120)
        return 2.0 * std::sqrt(std::norm(p - q) / ((1.0 + np) * (1.0 + nq)));

    double ap = std::abs(p), aq = std::abs(q);
    // Invert both points when they are large; the metric is inversion-invariant
    // and this avoids overflow in |p-q| and |p|^2.
    if (ap > 1.0 && aq > 1.0) {
        Complex ip = 1.0 / p, iq = 1.0 / q;
        return 2.0 * std::abs(ip - iq) / (std::hypot(1.0, std::abs(ip)) * std::hypot(1.0, std::abs(iq)));
    }
    return 2.0 * std::abs(p - q) / (std::hypot(1.0, ap) * std::hypot(1.0, aq));
}

double chordal(const SpherePoint& p, const SpherePoint& q) {
    if (p.at_infinity && q.at_infinity) return 0.0;
    if (p.at_infinity) return chordal_to_infinity(q.value);
    if (q.at_infinity) return chordal_to_infinity(p.value);
    return chordal(p.value, q.value);
}

}  // namespace essdyn
