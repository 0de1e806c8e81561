#include "popbal/entropy_growth.hpp"

#include <cmath>
#include <stdexcept>

namespace popbal {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double weighted_entropy(const double* v, const double* w, int count) {
    double rho = 0;
    for (int i = 0; i < count; ++i) rho += std::max(v[i], 0.0);
    if (rho <= 0) throw std::invalid_argument("entropy: ensemble carries no mass");
    double acc = 0;
    for (int i = 0; i < count; ++i) {
        if (v[i] <= 0 || w[i] <= 0) continue;
        const double p = v[i] / rho;
        acc -= p * std::log(v[i] / (w[i] * rho));
    }
    return acc;
}
}  // namespace

double ensemble_entropy(const ParticleEnsemble& e) {
    return weighted_entropy(e.v.data(), e.w.data(), e.count());
}

double field_entropy(const DensityField& d, bool joint, double log_scale) {
    const int n = d.grid_n;
    if (d.dim == 1 || joint) {
        const int count = static_cast<int>(d.values.size());
        std::vector<double> w(count, 1.0 / count), v(count);
        for (int i = 0; i < count; ++i) v[i] = std::max(d.values[i], 0.0) / count;
        return weighted_entropy(v.data(), w.data(), count) + log_scale;
    }
    // x-marginal of a 2D field: grid is x-major so row i spans all S.
    std::vector<double> v(n, 0.0), w(n, 1.0 / n);
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += std::max(d.values[i * n + j], 0.0);
        v[i] = acc / (n * n);  // marginal density * cell width
    }
    return weighted_entropy(v.data(), w.data(), n) + log_scale;
}

double growth_response(double entropy, GrowthResponseKind kind, double theta, double r0) {
    switch (kind) {
        case GrowthResponseKind::hill: {
            if (entropy < 0) throw std::invalid_argument("growth_response: hill response needs E >= 0");
            const double t6 = std::pow(theta, 6);
            const double e6 = std::pow(entropy, 6);
            return r0 * (t6 + 2 * e6) / (t6 + e6);
        }
        case GrowthResponseKind::linear:
            return r0 + 0.01 * (entropy - 8.0);
    }
    throw std::invalid_argument("growth_response: unknown response kind");
}

GrowthResponseKind parse_response_kind(const std::string& name) {
    if (name == "hill") return GrowthResponseKind::hill;
    if (name == "linear") return GrowthResponseKind::linear;
    throw std::invalid_argument("unknown growth response kind: " + name);
}

std::function<double(const double*)> entropy_initial_density(EntropyInitial kind,
                                                             const ReducedAdvection& ra,
                                                             double total_cells) {
    const double half_width = 2000.0;
    const auto roots = ra.stable_roots(200e3);  // mes, hyb, ep
    std::vector<std::pair<double, double>> bands;
    switch (kind) {
        case EntropyInitial::ep: bands = {{roots[2] - half_width, roots[2] + half_width}}; break;
        case EntropyInitial::hyb: bands = {{roots[1] - half_width, roots[1] + half_width}}; break;
        case EntropyInitial::mes: bands = {{roots[0] - half_width, roots[0] + half_width}}; break;
        case EntropyInitial::ep_mes:
            bands = {{roots[0] - half_width, roots[0] + half_width},
                     {roots[2] - half_width, roots[2] + half_width}};
            break;
        case EntropyInitial::unif: bands = {{0.0, 25e3}}; break;
    }
    double measure = 0;
    for (auto& [lo, hi] : bands) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 25e3);
        measure += hi - lo;
    }
    const double level = total_cells / measure;
    return [bands, level](const double* y) {
        for (const auto& [lo, hi] : bands)
            if (y[0] >= lo && y[0] <= hi) return level;
        return 0.0;
    };
}

EntropyRunResult run_entropy_model(const std::function<double(const double*)>& u0_molecules,
                                   const std::vector<double>& checkpoints,
                                   const EntropyModelParams& params, const ReducedAdvection& ra,
                                   bool keep_fields) {
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("run_entropy_model: checkpoints must be strictly increasing");

    const Rescaling rs;  // x in [0, 25K]
    const double scale = rs.a;
    const double log_scale = std::log(scale);
    const double eta = params.eta_x / scale;
    const double kernel_norm = kInvSqrt2Pi / eta;
    const double snail = params.snail;

    const int n = params.n_grid;
    auto u0_unit = [&](const double* y) {
        const double xm[1] = {rs.x_from_unit(y[0])};
        return scale * u0_molecules(xm);
    };
    ParticleEnsemble e = make_grid_ensemble(n, 1, u0_unit);
    // Normalise the sampled mass to the analytic total of the initial density
    // (narrow supports quantise on the grid otherwise).
    {
        double mass_exact = 0;
        const int q = 4000;
        for (int i = 0; i < q; ++i) {
            const double y[1] = {(i + 0.5) / q};
            mass_exact += u0_unit(y) / q;
        }
        const double mass_grid = e.rho();
        if (mass_grid <= 0) throw std::invalid_argument("run_entropy_model: initial density vanishes on the grid");
        for (auto& vi : e.v) vi *= mass_exact / mass_grid;
    }

    const int count = e.count();
    auto rhs = [&](double, const double* s, double* ds) {
        const double* x = s;
        const double* w = s + count;
        const double* v = s + 2 * count;
        double* dx = ds;
        double* dw = ds + count;
        double* dv = ds + 2 * count;

        double rho = 0;
        for (int i = 0; i < count; ++i) rho += std::max(v[i], 0.0);
        const double ent = weighted_entropy(v, w, count) + log_scale;
        const double r = growth_response(ent, params.response, params.theta, params.r0);
        const double d = r / params.death_scale;

        for (int i = 0; i < count; ++i) {
            const double xm = rs.x_from_unit(x[i]);
            dx[i] = ra.value(xm, snail) / scale;
            dw[i] = ra.divergence(xm, snail) * w[i];
            dv[i] = (r - d * rho) * v[i];
        }
        // Mutation terms; the rate factor r(E) is state-independent here.
        std::vector<double> gain(count, 0.0), leave(count, 0.0);
        for (int i = 0; i < count; ++i) {
            gain[i] += kernel_norm * v[i];
            leave[i] += kernel_norm * w[i];
            for (int j = i + 1; j < count; ++j) {
                const double u = (x[i] - x[j]) / eta;
                const double p = kernel_norm * std::exp(-0.5 * u * u);
                gain[i] += p * v[j];
                gain[j] += p * v[i];
                leave[i] += p * w[j];
                leave[j] += p * w[i];
            }
        }
        for (int i = 0; i < count; ++i) dv[i] += r * (w[i] * gain[i] - v[i] * leave[i]);
    };

    EntropyRunResult out;
    for (double t_k : checkpoints) {
        // Integrate the packed state over the window.
        std::vector<double> y;
        y.reserve(3 * count);
        y.insert(y.end(), e.pos.begin(), e.pos.end());
        y.insert(y.end(), e.w.begin(), e.w.end());
        y.insert(y.end(), e.v.begin(), e.v.end());
        auto clamp_mass = [&](double, std::span<double> s) {
            bool modified = false;
            for (int i = 0; i < count; ++i) {
                double& vi = s[2 * count + i];
                if (vi < 0) {
                    vi = 0;
                    modified = true;
                }
            }
            return modified;
        };
        const auto res = integrate(rhs, std::span<const double>(y), e.t, t_k, params.ode, {}, clamp_mass);
        if (res.status != OdeStatus::ok)
            throw std::runtime_error("run_entropy_model: integrator failed: " + res.message);
        std::copy(res.y.begin(), res.y.begin() + count, e.pos.begin());
        std::copy(res.y.begin() + count, res.y.begin() + 2 * count, e.w.begin());
        std::copy(res.y.begin() + 2 * count, res.y.end(), e.v.begin());
        e.t = t_k;

        const double rho_before = e.rho();
        DensityField field = regularize(e, params.gamma, params.bandwidth);
        e = restart_from_field(field);

        out.t.push_back(t_k);
        out.entropy.push_back(ensemble_entropy(e) + log_scale);
        out.rho.push_back(rho_before);
        out.leakage.push_back(rho_before > 0 ? 1.0 - field.rho / rho_before : 0.0);
        if (keep_fields || t_k == checkpoints.back()) out.fields.push_back(std::move(field));
    }
    return out;
}

}  // namespace popbal
