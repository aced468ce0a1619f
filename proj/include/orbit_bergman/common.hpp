#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace orbit_bergman {

using Complex = std::complex<double>;

/// Holomorphic function handle, used wherever a function is not stored as coefficients.
using Evaluator = std::function<Complex(Complex)>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

inline constexpr const char* version = "1.0.0";

enum class ErrorKind {
    precondition,
    boundary,
    budget,
    overflow,
    convergence,
    coverage,
    truncation,
    quadrature,
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::boundary: return "boundary";
        case ErrorKind::budget: return "budget";
        case ErrorKind::overflow: return "overflow";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::coverage: return "coverage";
        case ErrorKind::truncation: return "truncation";
        case ErrorKind::quadrature: return "quadrature";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// harness can turn it into a structured error payload.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

/// Worker count, capped by ORBIT_BERGMAN_THREADS when set.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ORBIT_BERGMAN_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Runs body(i) for i in [0, count). Each index writes only its own output slot,
/// so callers reduce afterwards in index order and results do not depend on
/// the number of workers.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace orbit_bergman
