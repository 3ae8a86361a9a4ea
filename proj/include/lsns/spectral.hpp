#pragma once

#include "lsns/field.hpp"
#include "lsns/mollifier.hpp"

namespace lsns {

// --- transforms ------------------------------------------------------------

/// Throws ConfigError if the sample array does not match the grid.
SpectralField forward_transform(const PhysicalVector& samples, const Grid& grid);
ScalarField forward_transform(const PhysicalScalar& samples, const Grid& grid);

PhysicalVector inverse_transform(const SpectralField& field);
PhysicalScalar inverse_transform(const ScalarField& field);

/// Samples on an arbitrary P^3 grid. Modes with |n_i| < min(M, P)/2 are carried over;
/// the Nyquist plane is kept only when P == M.
PhysicalVector sample_on(const SpectralField& field, int points_per_axis);
PhysicalScalar sample_on(const ScalarField& field, int points_per_axis);

/// Transform P^3 samples and keep the modes the target grid can represent (see sample_on).
ScalarField transform_onto(const PhysicalScalar& samples, const Grid& target);
SpectralField transform_onto(const PhysicalVector& samples, const Grid& target);

template <int C>
ModalField<C> truncate(ModalField<C> f) {
    const Grid& g = f.grid();
    for (std::size_t m = 0; m < g.size(); ++m)
        if (!g.retained(g.mode(m)))
            for (int c = 0; c < C; ++c) f.at(c, m) = 0.0;
    return f;
}

/// Same coefficients placed on another grid (modes outside the smaller grid dropped).
template <int C>
ModalField<C> regrid(const ModalField<C>& f, const Grid& target);

// --- differential operators (wavenumber convention 2 pi n) -----------------

ScalarField divergence(const SpectralField& u);
SpectralField gradient(const ScalarField& s);
SpectralField curl(const SpectralField& u);
template <int C>
ModalField<C> laplacian(const ModalField<C>& f);
/// d/dx_axis of every component.
template <int C>
ModalField<C> partial(const ModalField<C>& f, int axis);

/// u_n - n (n.u_n) / |n|^2 for n != 0, mean mode untouched.
SpectralField leray_project(const SpectralField& v);

/// max_n |n . u_n| / max_m |u_m|.
double divergence_residual(const SpectralField& u);

/// Multiply mode n by exp(-4 pi^2 nu |n|^2 dt).
SpectralField heat_factor(const SpectralField& u, double nu, double dt);

template <int C>
ModalField<C> mollify(const ModalField<C>& f, const Mollifier& m);

// --- products ----------------------------------------------------------------

/// Truncated product of two retained-mode scalars evaluated on the M^3 grid
/// (2/3 rule: the quadratic product is alias-free on the retained band).
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

/// div(v (x) u), i.e. component i = d_j (v_j u_i), dealiased and truncated.
SpectralField nonlinear_term(const SpectralField& u, const SpectralField& v);

/// p = (-Laplace)^-1 div div(u (x) u), p_0 = 0.
ScalarField solve_pressure(const SpectralField& u);
/// Pressure for the advection d_j(v_j u_i): p = (-Laplace)^-1 d_i d_j (v_j u_i).
ScalarField solve_pressure(const SpectralField& advecting, const SpectralField& u);

/// Re sum_n a_n conj(b_n) = integral of a.b over the torus.
template <int C>
double l2_inner(const ModalField<C>& a, const ModalField<C>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) s += (a.raw()[i] * std::conj(b.raw()[i])).real();
    return s;
}

/// Sum over components and modes of |2 pi n|^2 |u_n|^2 = ||grad u||^2.
template <int C>
double h1_seminorm_squared(const ModalField<C>& f);

namespace testing_hooks {
/// Mutation used as a negative control: products keep their aliased high band.
void set_skip_product_truncation(bool enabled);
bool skip_product_truncation();
}  // namespace testing_hooks

}  // namespace lsns
