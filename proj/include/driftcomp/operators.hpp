#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "driftcomp/model.hpp"

// Semi-discrete right-hand side of the competition system in conservative
// flux form. All transport is expressed through total rightward face fluxes
//
//   F[f] = q * c[f-1]  -  d * [(1-k) + k * (g^2 + eps)^((p-2)/2)] * g,
//
// with g = (c[f] - c[f-1]) / dx the centered face gradient and q * c[f-1]
// the first-order upwind advective part (donor cell for rightward drift).
// Cell updates are divergence differences, rhs_i = (F[i] - F[i+1]) / dx plus
// the competition reaction, so interior fluxes telescope and total mass is
// exact up to boundary outflow and roundoff.
//
// Boundary closures:
//   drift enabled : F[0] = 0 (zero total flux upstream, Danckwerts) and
//                   F[n] = q * c[n-1] (zero diffusive flux, advective outflow)
//   drift disabled: F[0] = F[n] = 0 (no-flux on both ends)

namespace driftcomp {

// Total rightward transport through each of the n_cells+1 faces.
struct FaceFluxes {
    std::vector<double> u;
    std::vector<double> v;
};

namespace detail {

enum class PowKind { one, eighth, quarter, half, generic };

inline PowKind pow_kind(double p) {
    const double e = 0.5 * (p - 2.0);
    if (e == 0.0) return PowKind::one;
    if (e == -0.125) return PowKind::eighth;
    if (e == -0.25) return PowKind::quarter;
    if (e == -0.5) return PowKind::half;
    return PowKind::generic;
}

// s^((p-2)/2) for s = g^2 + eps > 0. The sqrt chains are exact-value
// equivalents of pow for the dyadic exponents that dominate the presets and
// vectorize where pow does not.
template <PowKind K>
inline double alpha_of(double s, double e) {
    if constexpr (K == PowKind::one) return 1.0;
    if constexpr (K == PowKind::eighth) return 1.0 / std::sqrt(std::sqrt(std::sqrt(s)));
    if constexpr (K == PowKind::quarter) return 1.0 / std::sqrt(std::sqrt(s));
    if constexpr (K == PowKind::half) return 1.0 / std::sqrt(s);
    return std::pow(s, e);
}

template <PowKind K>
inline void alpha_fill(std::span<const double> grad, double e, double epsilon,
                       std::span<double> out) {
    const std::size_t n = grad.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = grad[i] * grad[i] + epsilon;
        out[i] = alpha_of<K>(s, e);
    }
}

inline void alpha_fill_dispatch(std::span<const double> grad, double p, double epsilon,
                                std::span<double> out) {
    const double e = 0.5 * (p - 2.0);
    switch (pow_kind(p)) {
        case PowKind::one: alpha_fill<PowKind::one>(grad, e, epsilon, out); break;
        case PowKind::eighth: alpha_fill<PowKind::eighth>(grad, e, epsilon, out); break;
        case PowKind::quarter: alpha_fill<PowKind::quarter>(grad, e, epsilon, out); break;
        case PowKind::half: alpha_fill<PowKind::half>(grad, e, epsilon, out); break;
        case PowKind::generic: alpha_fill<PowKind::generic>(grad, e, epsilon, out); break;
    }
}

}  // namespace detail

// Regularized fast-diffusion coefficient (g^2 + epsilon)^((p-2)/2).
// Strictly positive and, for p < 2, decreasing in |g| with ceiling
// epsilon^((p-2)/2) at flat gradient. Exactly 1 when p = 2.
inline double regularized_diffusivity(double g, double p, double epsilon) {
    if (p == 2.0) return 1.0;
    const double s = g * g + epsilon;
    if (s <= 0.0)
        throw SimulationError(SimErrorCode::SINGULAR_COEFFICIENT,
                              "coefficient (g^2+eps)^((p-2)/2) is unbounded at g = eps = 0");
    const double e = 0.5 * (p - 2.0);
    switch (detail::pow_kind(p)) {
        case detail::PowKind::eighth: return detail::alpha_of<detail::PowKind::eighth>(s, e);
        case detail::PowKind::quarter: return detail::alpha_of<detail::PowKind::quarter>(s, e);
        case detail::PowKind::half: return detail::alpha_of<detail::PowKind::half>(s, e);
        default: return detail::alpha_of<detail::PowKind::generic>(s, e);
    }
}

// Centered gradient at interior faces; boundary faces are left at 0 (their
// values come from the boundary closures, not from a stencil).
inline void face_gradient(std::span<const double> field, const Grid& grid,
                          std::span<double> out) {
    const int n = grid.n_cells;
    const double inv_dx = 1.0 / grid.dx();
    out[0] = 0.0;
    out[static_cast<std::size_t>(n)] = 0.0;
    for (int f = 1; f < n; ++f)
        out[static_cast<std::size_t>(f)] =
            (field[static_cast<std::size_t>(f)] - field[static_cast<std::size_t>(f - 1)]) * inv_dx;
}

inline std::vector<double> face_gradient(std::span<const double> field, const Grid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.n_faces()));
    face_gradient(field, grid, out);
    return out;
}

// Diffusive part d * [(1-k) + k*alpha(g)] * g at interior faces, computed
// from precomputed face gradients. k = 0 short-circuits to d * g and never
// evaluates the regularized coefficient.
inline void diffusive_flux_from_gradient(std::span<const double> grad,
                                         const DispersalSpec& spec,
                                         std::span<double> out) {
    const std::size_t nf = grad.size();
    out[0] = 0.0;
    out[nf - 1] = 0.0;
    if (spec.k == 0.0) {
        for (std::size_t f = 1; f + 1 < nf; ++f) out[f] = spec.d * grad[f];
        return;
    }
    if (spec.epsilon <= 0.0 && spec.p < 2.0) {
        // Checked scalar path: a flat face makes the coefficient singular.
        for (std::size_t f = 1; f + 1 < nf; ++f) {
            const double a = regularized_diffusivity(grad[f], spec.p, spec.epsilon);
            out[f] = spec.d * ((1.0 - spec.k) + spec.k * a) * grad[f];
        }
        return;
    }
    // eps > 0 (or p = 2): coefficient finite everywhere, vectorizable.
    detail::alpha_fill_dispatch(grad, spec.p, spec.epsilon, out.subspan(0, nf));
    const double lin = 1.0 - spec.k;
    for (std::size_t f = 1; f + 1 < nf; ++f)
        out[f] = spec.d * (lin + spec.k * out[f]) * grad[f];
    out[0] = 0.0;
    out[nf - 1] = 0.0;
}

inline std::vector<double> assemble_diffusive_flux(std::span<const double> field,
                                                   const DispersalSpec& spec,
                                                   const Grid& grid) {
    std::vector<double> grad = face_gradient(field, grid);
    std::vector<double> out(grad.size());
    diffusive_flux_from_gradient(grad, spec, out);
    return out;
}

// First-order upwind advective part q * (donor cell) at interior faces.
inline void assemble_advective_flux(std::span<const double> field, double drift_q,
                                    const Grid& grid, std::span<double> out) {
    const int n = grid.n_cells;
    out[0] = 0.0;
    out[static_cast<std::size_t>(n)] = 0.0;
    for (int f = 1; f < n; ++f)
        out[static_cast<std::size_t>(f)] = drift_q * field[static_cast<std::size_t>(f - 1)];
}

inline std::vector<double> assemble_advective_flux(std::span<const double> field,
                                                   double drift_q, const Grid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.n_faces()));
    assemble_advective_flux(field, drift_q, grid, out);
    return out;
}

// Boundary closures on composed total fluxes (see file header).
inline void apply_boundary_closures(FaceFluxes& fluxes, const State& state,
                                    const ModelConfig& cfg) {
    const std::size_t last = fluxes.u.size() - 1;
    fluxes.u[0] = 0.0;
    fluxes.v[0] = 0.0;
    if (cfg.drift_enabled) {
        const double q = cfg.drift_q;
        fluxes.u[last] = q * state.u[state.u.size() - 1];
        fluxes.v[last] = q * state.v[state.v.size() - 1];
    } else {
        fluxes.u[last] = 0.0;
        fluxes.v[last] = 0.0;
    }
}

// Lotka-Volterra competition kinetics sharing one resource level.
inline void reaction(double u, double v, double m, double& du, double& dv) {
    const double r = m - u - v;
    du = u * r;
    dv = v * r;
}

// Accumulated per-evaluation quantities needed for mass-budget audits:
// domain integrals of the reaction terms and the net boundary transport
// F[n] - F[0], so that sum_i rhs_i * dx = reaction - boundary_net.
struct RhsStats {
    double reaction_u = 0.0;
    double reaction_v = 0.0;
    double boundary_net_u = 0.0;
    double boundary_net_v = 0.0;
};

// Reusable evaluator: owns the expanded resource vector and all scratch
// buffers so repeated evaluations (four per RK4 step) do not allocate.
class RhsEvaluator {
public:
    explicit RhsEvaluator(const ModelConfig& cfg)
        : cfg_(cfg),
          m_(static_cast<std::size_t>(cfg.grid.n_cells)),
          grad_(static_cast<std::size_t>(cfg.grid.n_faces())),
          flux_u_(static_cast<std::size_t>(cfg.grid.n_faces())),
          flux_v_(static_cast<std::size_t>(cfg.grid.n_faces())) {
        for (int i = 0; i < cfg.grid.n_cells; ++i)
            m_[static_cast<std::size_t>(i)] = cfg.m_at(i);
    }

    const ModelConfig& config() const { return cfg_; }

    // Dropping the reaction term is used by the conservation diagnostics.
    bool include_reaction = true;

    void eval(const State& state, std::span<double> du_dt, std::span<double> dv_dt,
              RhsStats* stats = nullptr, FaceFluxes* fluxes_out = nullptr) {
        const int n = cfg_.grid.n_cells;
        const std::size_t nf = static_cast<std::size_t>(n) + 1;
        const double dx = cfg_.grid.dx();
        const double inv_dx = 1.0 / dx;
        const double q = cfg_.effective_drift();

        fill_species_flux(state.u, cfg_.disp_u, q, flux_u_);
        fill_species_flux(state.v, cfg_.disp_v, q, flux_v_);

        // Closures: zero total flux upstream; with drift, pure advective
        // outflow downstream, otherwise no-flux there as well.
        flux_u_[0] = 0.0;
        flux_v_[0] = 0.0;
        if (cfg_.drift_enabled) {
            flux_u_[nf - 1] = q * state.u[static_cast<std::size_t>(n - 1)];
            flux_v_[nf - 1] = q * state.v[static_cast<std::size_t>(n - 1)];
        } else {
            flux_u_[nf - 1] = 0.0;
            flux_v_[nf - 1] = 0.0;
        }

        double react_u = 0.0, react_v = 0.0;
        if (include_reaction) {
            for (int i = 0; i < n; ++i) {
                const std::size_t si = static_cast<std::size_t>(i);
                const double r = m_[si] - state.u[si] - state.v[si];
                const double ru = state.u[si] * r;
                const double rv = state.v[si] * r;
                du_dt[si] = (flux_u_[si] - flux_u_[si + 1]) * inv_dx + ru;
                dv_dt[si] = (flux_v_[si] - flux_v_[si + 1]) * inv_dx + rv;
                if (stats) {
                    react_u += ru;
                    react_v += rv;
                }
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const std::size_t si = static_cast<std::size_t>(i);
                du_dt[si] = (flux_u_[si] - flux_u_[si + 1]) * inv_dx;
                dv_dt[si] = (flux_v_[si] - flux_v_[si + 1]) * inv_dx;
            }
        }

        if (stats) {
            stats->reaction_u = react_u * dx;
            stats->reaction_v = react_v * dx;
            stats->boundary_net_u = flux_u_[nf - 1] - flux_u_[0];
            stats->boundary_net_v = flux_v_[nf - 1] - flux_v_[0];
        }
        if (fluxes_out) {
            fluxes_out->u.assign(flux_u_.begin(), flux_u_.end());
            fluxes_out->v.assign(flux_v_.begin(), flux_v_.end());
        }
    }

private:
    void fill_species_flux(std::span<const double> c, const DispersalSpec& sp, double q,
                           std::vector<double>& flux) {
        const int n = cfg_.grid.n_cells;
        face_gradient(c, cfg_.grid, grad_);

        if (sp.k == 0.0) {
            for (int f = 1; f < n; ++f) {
                const std::size_t sf = static_cast<std::size_t>(f);
                flux[sf] = q * c[sf - 1] - sp.d * grad_[sf];
            }
            return;
        }
        if (sp.epsilon <= 0.0 && sp.p < 2.0) {
            for (int f = 1; f < n; ++f) {
                const std::size_t sf = static_cast<std::size_t>(f);
                const double a = regularized_diffusivity(grad_[sf], sp.p, sp.epsilon);
                flux[sf] = q * c[sf - 1] - sp.d * ((1.0 - sp.k) + sp.k * a) * grad_[sf];
            }
            return;
        }
        detail::alpha_fill_dispatch(grad_, sp.p, sp.epsilon, flux);
        const double lin = 1.0 - sp.k;
        for (int f = 1; f < n; ++f) {
            const std::size_t sf = static_cast<std::size_t>(f);
            flux[sf] = q * c[sf - 1] - sp.d * (lin + sp.k * flux[sf]) * grad_[sf];
        }
    }

    ModelConfig cfg_;
    std::vector<double> m_;
    std::vector<double> grad_;
    std::vector<double> flux_u_;
    std::vector<double> flux_v_;
};

// One-shot convenience wrapper (allocates; use RhsEvaluator in loops).
inline std::pair<std::vector<double>, std::vector<double>> semidiscrete_rhs(
    const State& state, const ModelConfig& cfg) {
    RhsEvaluator eval(cfg);
    const std::size_t n = static_cast<std::size_t>(cfg.grid.n_cells);
    std::vector<double> du(n), dv(n);
    eval.eval(state, du, dv);
    return {std::move(du), std::move(dv)};
}

}  // namespace driftcomp
