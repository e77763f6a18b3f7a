#include "mpde/pwm_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace mpde {

namespace {

constexpr double kDegenerateNorm = 1e-14;

PiecewisePolynomial first_basis_function(double d) {
    const long double s3 = std::sqrt(3.0L);
    const long double dl = d;
    // sqrt(3) (2 tau - D) / D on [0, D], sqrt(3) (1 + D - 2 tau) / (1 - D) on [D, 1].
    std::vector<PiecewisePolynomial::Coeffs> segs = {
        {-s3, 2.0L * s3 / dl},
        {s3 * (1.0L + dl) / (1.0L - dl), -2.0L * s3 / (1.0L - dl)},
    };
    return PiecewisePolynomial({0.0, d, 1.0}, std::move(segs));
}

// Sign convention: the highest-degree coefficient on the first segment is
// made positive.
void fix_sign(PiecewisePolynomial& p) {
    const auto& seg = p.segments().front();
    std::size_t d = seg.size();
    while (d > 1 && seg[d - 1] == 0.0) --d;
    if (seg[d - 1] < 0.0) p *= -1.0;
}

}  // namespace

double PwmBasis::evaluate(int k, double tau) const {
    if (k < 0 || k > order) throw std::out_of_range("PwmBasis: index out of range");
    return functions[static_cast<std::size_t>(k)](tau);
}

PwmBasis build_basis(double duty, int order) {
    if (!(duty > 0.0 && duty < 1.0)) {
        throw std::invalid_argument("build_basis: duty-cycle parameter must lie in (0, 1)");
    }
    if (order < 0) throw std::invalid_argument("build_basis: order must be nonnegative");

    PwmBasis basis;
    basis.duty = duty;
    basis.order = order;
    basis.functions.push_back(PiecewisePolynomial::constant(1.0));
    if (order >= 1) basis.functions.push_back(first_basis_function(duty));

    for (int k = 2; k <= order; ++k) {
        PiecewisePolynomial q = basis.functions.back().antiderivative();
        // Modified Gram-Schmidt, one reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& p : basis.functions) {
                q -= inner_product(q, p) * p;
            }
        }
        double norm = std::sqrt(inner_product(q, q));
        if (!(norm > kDegenerateNorm)) {
            throw std::invalid_argument("build_basis: basis numerically degenerate at order " +
                                        std::to_string(k));
        }
        q *= 1.0 / norm;
        fix_sign(q);
        basis.functions.push_back(std::move(q));
    }
    return basis;
}

GalerkinMatrices galerkin_matrices(const PwmBasis& basis, double Ts) {
    if (!(Ts > 0.0)) throw std::invalid_argument("galerkin_matrices: period must be positive");
    const int n = basis.count();
    GalerkinMatrices m;
    m.Ts = Ts;
    m.I_mat.resize(n, n);
    m.Q_mat.resize(n, n);
    std::vector<PiecewisePolynomial> derivs;
    derivs.reserve(static_cast<std::size_t>(n));
    for (const auto& p : basis.functions) derivs.push_back(p.derivative());
    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
            m.I_mat(l, k) = Ts * inner_product(basis.functions[static_cast<std::size_t>(l)],
                                               basis.functions[static_cast<std::size_t>(k)]);
            m.Q_mat(l, k) = -inner_product(derivs[static_cast<std::size_t>(l)],
                                           basis.functions[static_cast<std::size_t>(k)]);
        }
    }
    return m;
}

Eigen::VectorXd project_waveform(const PwmBasis& basis, const PiecewisePolynomial& w) {
    Eigen::VectorXd v(basis.count());
    for (int l = 0; l < basis.count(); ++l) {
        v(l) = inner_product(w, basis.functions[static_cast<std::size_t>(l)]);
    }
    return v;
}

}  // namespace mpde
