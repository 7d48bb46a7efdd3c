#include "cspit/zipf.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "cspit/numeric.hpp"

namespace cspit {

namespace {

constexpr std::uint64_t kDirectLimit = 4'000'000;  // widest range summed term by term
constexpr std::uint64_t kEmFloor = 100'000;        // Euler-Maclaurin never starts below this

double direct_sum(double alpha, std::uint64_t first, std::uint64_t last) {
    CompensatedSum acc;
    for (std::uint64_t i = first; i <= last; ++i) {
        acc.add(std::pow(static_cast<double>(i), -alpha));
    }
    return acc.value();
}

// Euler-Maclaurin for sum_{i=a}^{b} i^-alpha with correction terms through
// the third derivative; the truncation error is O(a^-(alpha+5)) relative to
// the leading integral and is negligible for a >= kEmFloor.
double euler_maclaurin(double alpha, std::uint64_t first, std::uint64_t last) {
    double a = static_cast<double>(first);
    double b = static_cast<double>(last);
    double integral;
    if (std::abs(alpha - 1.0) < 1e-12) {
        integral = std::log(b / a);
    } else {
        integral = (std::pow(b, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) / (1.0 - alpha);
    }
    double fa = std::pow(a, -alpha);
    double fb = std::pow(b, -alpha);
    double d1a = -alpha * std::pow(a, -alpha - 1.0);
    double d1b = -alpha * std::pow(b, -alpha - 1.0);
    double c3 = -alpha * (alpha + 1.0) * (alpha + 2.0);
    double d3a = c3 * std::pow(a, -alpha - 3.0);
    double d3b = c3 * std::pow(b, -alpha - 3.0);
    return integral + 0.5 * (fa + fb) + (d1b - d1a) / 12.0 - (d3b - d3a) / 720.0;
}

// Normalization constants are shared across sweep cells; cache them.
double cached_norm(double alpha, std::uint64_t contents, std::uint64_t exact_prefix) {
    static std::mutex mutex;
    static std::map<std::tuple<double, std::uint64_t, std::uint64_t>, double> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(alpha, contents, exact_prefix);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double value;
    if (contents <= exact_prefix) {
        value = zipf_power_sum(alpha, 1, contents);
    } else {
        value = direct_sum(alpha, 1, exact_prefix) +
                euler_maclaurin(alpha, exact_prefix + 1, contents);
    }
    cache.emplace(key, value);
    return value;
}

}  // namespace

double zipf_power_sum(double alpha, std::uint64_t first, std::uint64_t last) {
    if (first == 0) throw std::out_of_range("zipf_power_sum: indices are 1-based");
    if (last < first) return 0.0;
    if (last - first + 1 <= kDirectLimit) return direct_sum(alpha, first, last);
    if (first >= kEmFloor) return euler_maclaurin(alpha, first, last);
    std::uint64_t split = kEmFloor;
    return direct_sum(alpha, first, split - 1) + euler_maclaurin(alpha, split, last);
}

ZipfCatalog::ZipfCatalog(std::uint64_t contents, double alpha, double total_rate,
                         std::uint64_t exact_prefix)
    : contents_(contents), alpha_(alpha), total_rate_(total_rate) {
    if (contents_ == 0) throw std::domain_error("ZipfCatalog: contents must be >= 1");
    if (!(alpha_ >= 0.0)) throw std::domain_error("ZipfCatalog: alpha must be >= 0");
    if (!(total_rate_ > 0.0)) throw std::domain_error("ZipfCatalog: total rate must be > 0");
    if (exact_prefix == 0) exact_prefix = 1;
    norm_ = cached_norm(alpha_, contents_, exact_prefix);
}

double ZipfCatalog::popularity(std::uint64_t k) const {
    if (k < 1 || k > contents_) throw std::out_of_range("ZipfCatalog::popularity: index out of range");
    return std::pow(static_cast<double>(k), -alpha_) / norm_;
}

double ZipfCatalog::popularity_mass(std::uint64_t first, std::uint64_t last) const {
    if (first < 1 || last > contents_) {
        throw std::out_of_range("ZipfCatalog::popularity_mass: range out of bounds");
    }
    return zipf_power_sum(alpha_, first, last) / norm_;
}

}  // namespace cspit
