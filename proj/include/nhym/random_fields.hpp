#pragma once

#include <cstdint>
#include <random>

#include "nhym/fields.hpp"

namespace nhym {

/// Smooth band-limited Hermitian field: a random combination of Fourier
/// modes with every wavenumber component in [-max_mode, max_mode], rescaled so
/// that its sup Frobenius norm equals `amplitude`.
EndField random_hermitian_field(const Geometry& geom, int rank, Real amplitude, int max_mode,
                                std::mt19937_64& rng);

/// Smooth complex scalar field built the same way (sup norm = amplitude).
ScalarField random_scalar_field(const Geometry& geom, Real amplitude, int max_mode,
                                std::mt19937_64& rng, bool real_valued = true);

/// exp of a random smooth Hermitian field of the given sup amplitude.
MetricField random_metric(const Geometry& geom, int rank, Real amplitude, std::mt19937_64& rng,
                          int max_mode = 1);

/// Random smooth K-self-adjoint field K^{-1/2} X K^{1/2} (X Hermitian) with
/// sup K-norm equal to `amplitude`.
EndField random_self_adjoint(const MetricField& k, Real amplitude, std::mt19937_64& rng,
                             int max_mode = 1);

}  // namespace nhym
