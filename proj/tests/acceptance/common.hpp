#pragma once

#include <chrono>
#include <cstdio>
#include <numbers>
#include <string>

#include "essdyn/hair.hpp"
#include "essdyn/render.hpp"

namespace acceptance {

using namespace essdyn;
using Clock = std::chrono::steady_clock;

inline SpherePoint fin(double re, double im = 0) { return SpherePoint::finite({re, im}); }

class Criterion {
  public:
    Criterion(int number, double time_limit_s)
        : number_(number), limit_(time_limit_s), start_(Clock::now()) {}

    double elapsed() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

    // Prints the single verdict line and returns the process exit code.
    int finish(bool ok, const std::string& summary) {
        double t = elapsed();
        bool in_time = limit_ <= 0.0 || t < limit_;
        bool pass = ok && in_time;
        std::string line = summary;
        if (!in_time) line += " [exceeded " + std::to_string(limit_) + " s limit]";
        std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", number_,
                    line.c_str(), t);
        return pass ? 0 : 1;
    }

  private:
    int number_;
    double limit_;
    Clock::time_point start_;
};

}  // namespace acceptance
