#include "popbal/hill.hpp"

#include <cmath>
#include <stdexcept>

namespace popbal {

HillParams::HillParams(double lambda_, double x0_, int n_) : lambda(lambda_), x0(x0_), n(n_) {
    if (x0 <= 0) throw std::invalid_argument("HillParams: x0 must be > 0");
    if (n < 1) throw std::invalid_argument("HillParams: n must be >= 1");
    if (lambda < 0) throw std::invalid_argument("HillParams: lambda must be >= 0");
}

namespace {
double pow_int(double x, int n) {
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}
}  // namespace

double shifted_hill(double x, const HillParams& p) {
    if (x < 0) throw std::invalid_argument("shifted_hill: negative input");
    const double ratio = pow_int(x / p.x0, p.n);
    return (1.0 + p.lambda * ratio) / (1.0 + ratio);
}

TranslationValues translation_functions(double mu, const TranslationTables& t) {
    if (mu < 0) throw std::invalid_argument("translation_functions: negative input");
    // Binomial coefficients C(6,i); the tables are fixed at n = 6.
    static constexpr double binom6[7] = {1, 6, 15, 20, 15, 6, 1};
    const double u = mu / t.mu0;
    const double denom = pow_int(1.0 + u, t.n);

    TranslationValues out;
    double u_pow = 1.0;  // u^i
    for (int i = 0; i <= t.n; ++i) {
        const double m = u_pow / denom;  // M_n^i(mu)
        out.L += t.l[i] * binom6[i] * m;
        if (i >= 1) {
            out.Y_mu += i * t.gamma_mu[i - 1] * binom6[i] * m;
            out.Y_m += t.gamma_m[i - 1] * binom6[i] * m;
        }
        u_pow *= u;
    }
    return out;
}

double translation_p(double mu, const TranslationTables& t, double k_mz) {
    const auto v = translation_functions(mu, t);
    return v.L / (v.Y_m + k_mz);
}

double translation_q(double mu, const TranslationTables& t, double k_mz) {
    const auto v = translation_functions(mu, t);
    return v.Y_mu / (v.Y_m + k_mz);
}

}  // namespace popbal
