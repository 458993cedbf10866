#include "ptcalc/sampling.hpp"

#include "ptcalc/errors.hpp"

namespace ptcalc {

double radical_inverse(unsigned base, unsigned long long i) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

std::vector<std::vector<double>> sample_points(const std::vector<std::array<double, 2>>& box,
                                               int count, unsigned seed) {
    static const unsigned primes[6] = {2, 3, 5, 7, 11, 13};
    const std::size_t n = box.size();
    if (n > 6) throw Error("sample_points: dimension too large");
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    const unsigned long long offset = 1 + static_cast<unsigned long long>(seed) * 997ULL;
    for (int k = 0; k < count; ++k) {
        std::vector<double> p(n);
        for (std::size_t d = 0; d < n; ++d) {
            double h = radical_inverse(primes[d], offset + static_cast<unsigned long long>(k));
            p[d] = box[d][0] + (0.02 + 0.96 * h) * (box[d][1] - box[d][0]);
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace ptcalc
