#include "ptcalc/jet.hpp"

#include "ptcalc/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace ptcalc {

namespace {

void enumerate(int n, int k, std::vector<std::array<std::uint8_t, kJetMaxDim>>& out,
               std::vector<int>& degs) {
    // graded lexicographic: all multi-indices of degree d before degree d+1
    std::array<std::uint8_t, kJetMaxDim> alpha{};
    for (int d = 0; d <= k; ++d) {
        // lexicographic enumeration of compositions of d into n parts
        auto rec = [&](auto&& self, int pos, int rem) -> void {
            if (pos == n - 1) {
                alpha[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(rem);
                out.push_back(alpha);
                degs.push_back(d);
                return;
            }
            for (int v = rem; v >= 0; --v) {
                alpha[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(v);
                self(self, pos + 1, rem - v);
            }
        };
        rec(rec, 0, d);
    }
}

} // namespace

int JetLayout::rank(std::span<const int> alpha) const {
    int code = 0;
    for (int i = 0; i < n; ++i) code = code * (k + 1) + alpha[static_cast<std::size_t>(i)];
    return lookup[static_cast<std::size_t>(code)];
}

const JetLayout& jet_layout(int n, int k) {
    if (n < 1 || n > kJetMaxDim || k < 0 || k > kJetMaxOrder)
        throw Error("jet_layout: unsupported (dim=" + std::to_string(n) +
                    ", order=" + std::to_string(k) + ")");
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[{n, k}];
    if (!slot) {
        auto lay = std::make_unique<JetLayout>();
        lay->n = n;
        lay->k = k;
        enumerate(n, k, lay->mindex, lay->degree);
        lay->count = static_cast<int>(lay->mindex.size());
        int codes = 1;
        for (int i = 0; i < n; ++i) codes *= (k + 1);
        lay->lookup.assign(static_cast<std::size_t>(codes), -1);
        for (int r = 0; r < lay->count; ++r) {
            int code = 0;
            for (int i = 0; i < n; ++i) code = code * (k + 1) + lay->mindex[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
            lay->lookup[static_cast<std::size_t>(code)] = r;
        }
        lay->prod.assign(static_cast<std::size_t>(lay->count) * static_cast<std::size_t>(lay->count), -1);
        for (int a = 0; a < lay->count; ++a) {
            for (int b = 0; b < lay->count; ++b) {
                if (lay->degree[static_cast<std::size_t>(a)] + lay->degree[static_cast<std::size_t>(b)] > k) continue;
                int code = 0;
                for (int i = 0; i < n; ++i) {
                    int s = lay->mindex[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] +
                            lay->mindex[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
                    code = code * (k + 1) + s;
                }
                lay->prod[static_cast<std::size_t>(a) * static_cast<std::size_t>(lay->count) + static_cast<std::size_t>(b)] =
                    lay->lookup[static_cast<std::size_t>(code)];
            }
        }
        slot = std::move(lay);
    }
    return *slot;
}

Jet::Jet(int n, int k) : n_(n), k_(k) {
    c_.assign(static_cast<std::size_t>(jet_layout(n, k).count), 0.0);
}

Jet Jet::constant(int n, int k, double v) {
    Jet j(n, k);
    j.c_[0] = v;
    return j;
}

Jet Jet::variable(int n, int k, int i, double value) {
    Jet j(n, k);
    j.c_[0] = value;
    if (k >= 1) j.c_[static_cast<std::size_t>(1 + i)] = 1.0; // degree-1 block follows the constant, in variable order
    return j;
}

double Jet::deriv(std::span<const int> alpha) const {
    const auto& lay = layout();
    int r = lay.rank(alpha);
    if (r < 0) throw Error("Jet::deriv: multi-index exceeds jet order");
    double fact = 1.0;
    for (int i = 0; i < n_; ++i)
        for (int m = 2; m <= alpha[static_cast<std::size_t>(i)]; ++m) fact *= m;
    return c_[static_cast<std::size_t>(r)] * fact;
}

double Jet::deriv1(int i) const {
    std::vector<int> a(static_cast<std::size_t>(n_), 0);
    a[static_cast<std::size_t>(i)] = 1;
    return deriv(a);
}

double Jet::deriv2(int i, int j) const {
    std::vector<int> a(static_cast<std::size_t>(n_), 0);
    a[static_cast<std::size_t>(i)] += 1;
    a[static_cast<std::size_t>(j)] += 1;
    return deriv(a);
}

Jet Jet::truncated(int k2) const {
    if (k2 >= k_) return *this;
    if (k2 < 0) throw Error("Jet::truncated: negative order");
    Jet out(n_, k2);
    // graded ordering: lower-order coefficients are a prefix
    for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = c_[i];
    return out;
}

Jet Jet::derivative(int i) const {
    if (k_ < 1) throw Error("Jet::derivative: order 0 jet has no derivatives");
    const auto& lay = layout();
    Jet out(n_, k_ - 1);
    const auto& lout = out.layout();
    std::vector<int> alpha(static_cast<std::size_t>(n_));
    for (int r = 0; r < lout.count; ++r) {
        for (int d = 0; d < n_; ++d) alpha[static_cast<std::size_t>(d)] = lout.mindex[static_cast<std::size_t>(r)][static_cast<std::size_t>(d)];
        alpha[static_cast<std::size_t>(i)] += 1;
        int src = lay.rank(alpha);
        out.c_[static_cast<std::size_t>(r)] = c_[static_cast<std::size_t>(src)] * alpha[static_cast<std::size_t>(i)];
    }
    return out;
}

namespace {

void check_same_dim(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim())
        throw Error("jet arithmetic: dimension mismatch (" + std::to_string(a.dim()) +
                    " vs " + std::to_string(b.dim()) + ")");
}

} // namespace

Jet Jet::operator-() const {
    Jet out = *this;
    for (auto& v : out.c_) v = -v;
    return out;
}

Jet& Jet::operator+=(const Jet& o) {
    check_same_dim(*this, o);
    if (o.k_ < k_) *this = truncated(o.k_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    check_same_dim(*this, o);
    if (o.k_ < k_) *this = truncated(o.k_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator+=(double s) { c_[0] += s; return *this; }
Jet& Jet::operator-=(double s) { c_[0] -= s; return *this; }

Jet& Jet::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

Jet& Jet::operator/=(double s) {
    for (auto& v : c_) v /= s;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    check_same_dim(a, b);
    int k = std::min(a.k_, b.k_);
    Jet at = a.truncated(k);
    Jet bt = b.truncated(k);
    const JetLayout& lay = jet_layout(a.n_, k);
    Jet out(a.n_, k);
    const int m = lay.count;
    for (int i = 0; i < m; ++i) {
        double ai = at.c_[static_cast<std::size_t>(i)];
        if (ai == 0.0) continue;
        const std::int32_t* row = lay.prod.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m);
        for (int j = 0; j < m; ++j) {
            std::int32_t r = row[j];
            if (r < 0) continue;
            out.c_[static_cast<std::size_t>(r)] += ai * bt.c_[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

Jet Jet::compose_series(const Jet& x, std::span<const double> d) {
    // r = d[k]; r = r*h + d[j] going down, with h the nonconstant part of x
    Jet h = x;
    h.c_[0] = 0.0;
    Jet r = Jet::constant(x.n_, x.k_, d[d.size() - 1]);
    for (int j = static_cast<int>(d.size()) - 2; j >= 0; --j) {
        r = r * h;
        r.c_[0] += d[static_cast<std::size_t>(j)];
    }
    return r;
}

namespace {

Jet reciprocal(const Jet& x, const char* what) {
    double c = x.value();
    if (c == 0.0) throw DomainError(what, to_string(x));
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    double p = 1.0 / c;
    for (std::size_t j = 0; j < d.size(); ++j) {
        d[j] = (j % 2 == 0) ? p : -p;
        p /= c;
    }
    return Jet::compose_series(x, d);
}

} // namespace

Jet operator/(const Jet& a, const Jet& b) {
    check_same_dim(a, b);
    return a * reciprocal(b.truncated(std::min(a.order(), b.order())), "division by zero");
}

Jet operator/(double s, const Jet& a) {
    return reciprocal(a, "division by zero") *= s;
}

Jet sin(const Jet& x) {
    double c = x.value();
    double s0 = std::sin(c), c0 = std::cos(c);
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    const double cyc[4] = {s0, c0, -s0, -c0};
    double fact = 1.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        d[j] = cyc[j % 4] / fact;
    }
    return Jet::compose_series(x, d);
}

Jet cos(const Jet& x) {
    double c = x.value();
    double s0 = std::sin(c), c0 = std::cos(c);
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    const double cyc[4] = {c0, -s0, -c0, s0};
    double fact = 1.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        d[j] = cyc[j % 4] / fact;
    }
    return Jet::compose_series(x, d);
}

Jet exp(const Jet& x) {
    double e0 = std::exp(x.value());
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    double fact = 1.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        d[j] = e0 / fact;
    }
    return Jet::compose_series(x, d);
}

Jet log(const Jet& x) {
    double c = x.value();
    if (c <= 0.0) throw DomainError("log of a nonpositive value", to_string(x));
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    d[0] = std::log(c);
    double p = 1.0 / c;
    for (std::size_t j = 1; j < d.size(); ++j) {
        d[j] = ((j % 2 == 1) ? 1.0 : -1.0) * p / static_cast<double>(j);
        p /= c;
    }
    return Jet::compose_series(x, d);
}

Jet pow(const Jet& x, double p) {
    double ip;
    if (std::modf(p, &ip) == 0.0 && std::abs(ip) <= 64.0) {
        // integer exponents work for any base value (negative base included)
        long e = static_cast<long>(ip);
        if (e == 0) return Jet::constant(x.dim(), x.order(), 1.0);
        Jet base = (e > 0) ? x : reciprocal(x, "negative power of zero");
        long m = std::labs(e);
        Jet acc = base;
        for (long i = 1; i < m; ++i) acc = acc * base;
        return acc;
    }
    double c = x.value();
    if (c <= 0.0) throw DomainError("non-integer power of a nonpositive value", to_string(x));
    std::vector<double> d(static_cast<std::size_t>(x.order()) + 1);
    double coef = std::pow(c, p);
    double fact = 1.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j > 0) {
            coef *= (p - static_cast<double>(j - 1)) / c;
            fact *= static_cast<double>(j);
        }
        d[j] = coef / (j > 0 ? fact : 1.0);
    }
    // note: coef accumulates p(p-1)...(p-j+1) c^{p-j}; divide by j!
    return Jet::compose_series(x, d);
}

Jet sqrt(const Jet& x) {
    if (x.value() <= 0.0) throw DomainError("sqrt of a nonpositive value", to_string(x));
    return pow(x, 0.5);
}

std::string to_string(const Jet& j) {
    std::ostringstream os;
    os << "jet(n=" << j.dim() << ", k=" << j.order() << ", value=" << j.value() << ")";
    return os.str();
}

} // namespace ptcalc
