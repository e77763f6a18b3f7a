#pragma once

#include <vector>

namespace mpde {

/// Piecewise polynomial on [0, 1] stored as monomial coefficients per
/// segment. Breakpoints are strictly increasing with first = 0, last = 1.
/// Coefficients are in the global variable tau (not shifted per segment),
/// so splitting a segment never changes coefficients.
///
/// Continuity across breakpoints is not required by the representation;
/// pulse waveforms are deliberately discontinuous. Evaluation at an interior
/// breakpoint uses the right segment (right-continuous convention).
class PiecewisePolynomial {
public:
    /// Coefficients are stored and combined in extended precision; monomial
    /// bases are poorly conditioned at high degree and small duty cycles,
    /// and the orthonormality budget is 1e-12.
    using Coeffs = std::vector<long double>;

    PiecewisePolynomial(std::vector<double> breakpoints, std::vector<Coeffs> segments);

    static PiecewisePolynomial constant(double value);
    /// value_on when tau in [0, d), value_off on [d, 1).
    static PiecewisePolynomial pulse(double d, double value_on, double value_off = 0.0);

    double operator()(double tau) const;
    /// Evaluate using the segment left of tau (differs from operator()
    /// only at breakpoints of discontinuous functions).
    double eval_left(double tau) const;

    PiecewisePolynomial derivative() const;
    /// Antiderivative anchored to 0 at tau = 0; continuous by construction.
    PiecewisePolynomial antiderivative() const;

    /// Exact integral over [0, 1].
    double integrate() const;

    PiecewisePolynomial& operator+=(const PiecewisePolynomial& other);
    PiecewisePolynomial& operator-=(const PiecewisePolynomial& other);
    PiecewisePolynomial& operator*=(double s);

    friend PiecewisePolynomial operator+(PiecewisePolynomial a, const PiecewisePolynomial& b) {
        a += b;
        return a;
    }
    friend PiecewisePolynomial operator-(PiecewisePolynomial a, const PiecewisePolynomial& b) {
        a -= b;
        return a;
    }
    friend PiecewisePolynomial operator*(double s, PiecewisePolynomial a) {
        a *= s;
        return a;
    }
    friend PiecewisePolynomial operator*(const PiecewisePolynomial& a,
                                         const PiecewisePolynomial& b);

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Coeffs>& segments() const { return segments_; }

    /// Highest monomial degree over all segments.
    int degree() const;
    /// Max jump across interior breakpoints.
    double max_discontinuity() const;

    /// Refine to include every breakpoint of the given grid.
    void refine(const std::vector<double>& extra_breakpoints);

private:
    std::vector<double> breakpoints_;
    std::vector<Coeffs> segments_;

    std::size_t segment_index(double tau) const;
};

/// L2(0,1) inner product via segment-wise Gauss quadrature of sufficient
/// order: exact for the polynomial integrand up to rounding.
double inner_product(const PiecewisePolynomial& f, const PiecewisePolynomial& g);

}  // namespace mpde
