#pragma once

#include <cstdint>

namespace cspit {

// Sum of i^-alpha over the integer range [first, last]. Exact summation for
// narrow ranges, Euler-Maclaurin for wide high-index ranges (relative error
// well below 1e-10 for range starts >= 1e5).
double zipf_power_sum(double alpha, std::uint64_t first, std::uint64_t last);

// Zipf content catalogue: popularity p_k = k^-alpha / sum_i i^-alpha and
// per-content request rate lambda_k = lambda_total * p_k. Nothing is
// materialized per content; popularities are evaluated on demand so the
// catalogue scales to billions of contents.
class ZipfCatalog {
public:
    // exact_prefix: the normalization constant is summed exactly up to this
    // index and completed with an Euler-Maclaurin tail beyond it.
    ZipfCatalog(std::uint64_t contents, double alpha, double total_rate,
                std::uint64_t exact_prefix = 10'000'000);
    ZipfCatalog() : ZipfCatalog(1, 0.8, 1.0) {}  // placeholder catalogue

    std::uint64_t contents() const { return contents_; }
    double alpha() const { return alpha_; }
    double total_rate() const { return total_rate_; }
    double normalization() const { return norm_; }

    // p_k for 1 <= k <= contents(); throws std::out_of_range otherwise.
    double popularity(std::uint64_t k) const;
    double rate(std::uint64_t k) const { return total_rate_ * popularity(k); }

    // Sum of p_k over [first, last].
    double popularity_mass(std::uint64_t first, std::uint64_t last) const;

private:
    std::uint64_t contents_;
    double alpha_;
    double total_rate_;
    double norm_;
};

}  // namespace cspit
