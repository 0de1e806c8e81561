#pragma once

namespace popbal {

// Shifted Hill regulation term H(x) = (1 + lambda*(x/x0)^n) / (1 + (x/x0)^n).
// lambda < 1 models inhibition, lambda > 1 activation; H(0) = 1, H(inf) = lambda.
struct HillParams {
    double lambda = 1.0;  // fold change, dimensionless
    double x0 = 1.0;      // threshold, molecules
    int n = 1;            // Hill coefficient

    HillParams() = default;
    HillParams(double lambda_, double x0_, int n_);
};

double shifted_hill(double x, const HillParams& p);

// Binomial-weighted translation machinery for the miR-200 / mRNA-ZEB module:
//   M_n^i(mu) = (mu/mu0)^i / (1 + mu/mu0)^n
//   L(mu)    = sum_{i=0..n} l_i   * C(n,i) * M_n^i(mu)
//   Y_mu(mu) = sum_{i=1..n} i*g_mu_i * C(n,i) * M_n^i(mu)
//   Y_m(mu)  = sum_{i=1..n} g_m_i * C(n,i) * M_n^i(mu)
// plus the derived ratios P = L/(Y_m + k_mz) and Q = Y_mu/(Y_m + k_mz).
struct TranslationTables {
    double l[7] = {1.0, 0.6, 0.3, 0.1, 0.05, 0.05, 0.05};
    double gamma_m[6] = {0.04, 0.2, 1.0, 1.0, 1.0, 1.0};   // per hour, index i=1..6
    double gamma_mu[6] = {0.005, 0.05, 0.5, 0.5, 0.5, 0.5};  // per hour, index i=1..6
    double mu0 = 10e3;  // molecules
    int n = 6;
};

struct TranslationValues {
    double L = 0;
    double Y_mu = 0;
    double Y_m = 0;
};

TranslationValues translation_functions(double mu, const TranslationTables& t);

// Ratios entering the core ODE; k_mz is the mRNA-ZEB degradation rate.
double translation_p(double mu, const TranslationTables& t, double k_mz);
double translation_q(double mu, const TranslationTables& t, double k_mz);

}  // namespace popbal
