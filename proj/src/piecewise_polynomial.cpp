#include "mpde/piecewise_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpde {

namespace {

constexpr double kBreakpointEps = 1e-14;

long double eval_monomials(const PiecewisePolynomial::Coeffs& coeffs, long double tau) {
    long double v = 0.0L;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        v = v * tau + *it;
    }
    return v;
}

// Exact integral of the monomial polynomial over [a, b].
long double integrate_monomials(const PiecewisePolynomial::Coeffs& coeffs, long double a,
                                long double b) {
    long double v = 0.0L;
    long double pa = a;
    long double pb = b;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        v += coeffs[n] * (pb - pa) / static_cast<long double>(n + 1);
        pa *= a;
        pb *= b;
    }
    return v;
}

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end(),
                          [](double x, double y) { return std::abs(x - y) < kBreakpointEps; }),
              out.end());
    return out;
}

}  // namespace

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breakpoints,
                                         std::vector<Coeffs> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (breakpoints_.size() < 2 || segments_.size() != breakpoints_.size() - 1) {
        throw std::invalid_argument("PiecewisePolynomial: segment/breakpoint count mismatch");
    }
    if (std::abs(breakpoints_.front()) > kBreakpointEps ||
        std::abs(breakpoints_.back() - 1.0) > kBreakpointEps) {
        throw std::invalid_argument("PiecewisePolynomial: domain must be [0, 1]");
    }
    breakpoints_.front() = 0.0;
    breakpoints_.back() = 1.0;
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        if (breakpoints_[i + 1] <= breakpoints_[i]) {
            throw std::invalid_argument("PiecewisePolynomial: breakpoints not increasing");
        }
    }
}

PiecewisePolynomial PiecewisePolynomial::constant(double value) {
    return PiecewisePolynomial({0.0, 1.0}, {{value}});
}

PiecewisePolynomial PiecewisePolynomial::pulse(double d, double value_on, double value_off) {
    if (d <= 0.0 || d >= 1.0) {
        throw std::invalid_argument("pulse: breakpoint must lie in (0, 1)");
    }
    return PiecewisePolynomial({0.0, d, 1.0}, {{value_on}, {value_off}});
}

std::size_t PiecewisePolynomial::segment_index(double tau) const {
    if (tau < 0.0 || tau > 1.0) {
        throw std::out_of_range("PiecewisePolynomial: tau outside [0, 1]");
    }
    // First breakpoint strictly greater than tau; segment is the one before it.
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), tau);
    std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
    if (idx == 0) idx = 1;
    if (idx > segments_.size()) idx = segments_.size();
    return idx - 1;
}

double PiecewisePolynomial::operator()(double tau) const {
    return static_cast<double>(eval_monomials(segments_[segment_index(tau)], tau));
}

double PiecewisePolynomial::eval_left(double tau) const {
    std::size_t idx = segment_index(tau);
    // If tau sits on this segment's left breakpoint, use the segment that
    // ends at tau instead.
    if (idx > 0 && std::abs(breakpoints_[idx] - tau) < kBreakpointEps) {
        idx -= 1;
    }
    return static_cast<double>(eval_monomials(segments_[idx], tau));
}

PiecewisePolynomial PiecewisePolynomial::derivative() const {
    std::vector<Coeffs> segs;
    segs.reserve(segments_.size());
    for (const auto& c : segments_) {
        Coeffs d;
        for (std::size_t n = 1; n < c.size(); ++n) {
            d.push_back(c[n] * static_cast<long double>(n));
        }
        if (d.empty()) d.push_back(0.0L);
        segs.push_back(std::move(d));
    }
    return PiecewisePolynomial(breakpoints_, std::move(segs));
}

PiecewisePolynomial PiecewisePolynomial::antiderivative() const {
    std::vector<Coeffs> segs;
    segs.reserve(segments_.size());
    long double running = 0.0L;  // value of the antiderivative at the left breakpoint
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        Coeffs c(segments_[i].size() + 1, 0.0L);
        for (std::size_t n = 0; n < segments_[i].size(); ++n) {
            c[n + 1] = segments_[i][n] / static_cast<long double>(n + 1);
        }
        // Constant term makes the segment continuous with the accumulated value.
        c[0] = running - eval_monomials(c, breakpoints_[i]);
        running = eval_monomials(c, breakpoints_[i + 1]);
        segs.push_back(std::move(c));
    }
    return PiecewisePolynomial(breakpoints_, std::move(segs));
}

double PiecewisePolynomial::integrate() const {
    long double v = 0.0L;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        v += integrate_monomials(segments_[i], breakpoints_[i], breakpoints_[i + 1]);
    }
    return static_cast<double>(v);
}

void PiecewisePolynomial::refine(const std::vector<double>& extra_breakpoints) {
    std::vector<double> merged = merge_breakpoints(breakpoints_, extra_breakpoints);
    if (merged.size() == breakpoints_.size()) return;
    std::vector<Coeffs> segs;
    segs.reserve(merged.size() - 1);
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        double mid = 0.5 * (merged[i] + merged[i + 1]);
        segs.push_back(segments_[segment_index(mid)]);
    }
    breakpoints_ = std::move(merged);
    segments_ = std::move(segs);
}

PiecewisePolynomial& PiecewisePolynomial::operator+=(const PiecewisePolynomial& other) {
    PiecewisePolynomial rhs = other;
    refine(rhs.breakpoints_);
    rhs.refine(breakpoints_);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        auto& a = segments_[i];
        const auto& b = rhs.segments_[i];
        if (a.size() < b.size()) a.resize(b.size(), 0.0L);
        for (std::size_t n = 0; n < b.size(); ++n) a[n] += b[n];
    }
    return *this;
}

PiecewisePolynomial& PiecewisePolynomial::operator-=(const PiecewisePolynomial& other) {
    PiecewisePolynomial neg = other;
    neg *= -1.0;
    return *this += neg;
}

PiecewisePolynomial& PiecewisePolynomial::operator*=(double s) {
    for (auto& seg : segments_) {
        for (auto& c : seg) c *= s;
    }
    return *this;
}

PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    using Coeffs = PiecewisePolynomial::Coeffs;
    PiecewisePolynomial x = a;
    PiecewisePolynomial y = b;
    x.refine(y.breakpoints_);
    y.refine(x.breakpoints_);
    std::vector<Coeffs> segs;
    segs.reserve(x.segments_.size());
    for (std::size_t i = 0; i < x.segments_.size(); ++i) {
        const auto& p = x.segments_[i];
        const auto& q = y.segments_[i];
        Coeffs c(p.size() + q.size() - 1, 0.0L);
        for (std::size_t m = 0; m < p.size(); ++m) {
            for (std::size_t n = 0; n < q.size(); ++n) {
                c[m + n] += p[m] * q[n];
            }
        }
        segs.push_back(std::move(c));
    }
    return PiecewisePolynomial(x.breakpoints_, std::move(segs));
}

int PiecewisePolynomial::degree() const {
    std::size_t deg = 0;
    for (const auto& seg : segments_) {
        std::size_t d = seg.size();
        while (d > 1 && seg[d - 1] == 0.0L) --d;
        deg = std::max(deg, d - 1);
    }
    return static_cast<int>(deg);
}

double PiecewisePolynomial::max_discontinuity() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < breakpoints_.size() + 1 && i < segments_.size() + 1; ++i) {
        if (i >= segments_.size()) break;
        double b = breakpoints_[i];
        double jump = static_cast<double>(
            std::abs(eval_monomials(segments_[i], b) - eval_monomials(segments_[i - 1], b)));
        worst = std::max(worst, jump);
    }
    return worst;
}

namespace {

// Gauss-Legendre rule on [-1, 1] in extended precision (Newton on the
// Legendre recurrence).
void gauss_rule(std::size_t n, std::vector<long double>& x, std::vector<long double>& w) {
    x.resize(n);
    w.resize(n);
    const long double pi = 3.14159265358979323846264338327950288L;
    for (std::size_t i = 0; i < n; ++i) {
        long double xi = std::cos(pi * (static_cast<long double>(i) + 0.75L) /
                                  (static_cast<long double>(n) + 0.5L));
        long double dp = 1.0L;
        for (int it = 0; it < 64; ++it) {
            long double p0 = 1.0L, p1 = xi;
            for (std::size_t k = 2; k <= n; ++k) {
                long double p2 =
                    ((2.0L * k - 1.0L) * xi * p1 - (k - 1.0L) * p0) / static_cast<long double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<long double>(n) * (xi * p1 - p0) / (xi * xi - 1.0L);
            long double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        x[i] = xi;
        w[i] = 2.0L / ((1.0L - xi * xi) * dp * dp);
    }
}

}  // namespace

double inner_product(const PiecewisePolynomial& f, const PiecewisePolynomial& g) {
    // Gauss quadrature of sufficient order per segment. Exact for the
    // polynomial integrand, and far better conditioned than expanding the
    // product in monomial coefficients (which cancels catastrophically at
    // high degree).
    PiecewisePolynomial a = f;
    PiecewisePolynomial b = g;
    a.refine(b.breakpoints());
    b.refine(a.breakpoints());
    std::size_t n = static_cast<std::size_t>(a.degree() + b.degree()) / 2 + 1;
    std::vector<long double> qx, qw;
    gauss_rule(n, qx, qw);
    const auto& bp = a.breakpoints();
    long double v = 0.0L;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        long double h = 0.5L * (static_cast<long double>(bp[i + 1]) - bp[i]);
        long double mid = 0.5L * (static_cast<long double>(bp[i + 1]) + bp[i]);
        const auto& ca = a.segments()[i];
        const auto& cb = b.segments()[i];
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            long double t = mid + h * qx[j];
            s += qw[j] * eval_monomials(ca, t) * eval_monomials(cb, t);
        }
        v += h * s;
    }
    return static_cast<double>(v);
}

}  // namespace mpde
