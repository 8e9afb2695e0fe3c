#pragma once

#include "nhym/connection.hpp"

namespace nhym {

/// Functional values of a metric pair, with quadrature metadata.
struct FunctionalValues {
  Real energy = 0.0;
  Real donaldson = 0.0;
  Real sigma = 0.0;
  int path_steps = 0;          ///< 0 when the closed form was used
  const char* quadrature = "closed";
};

/// E(D, H) = 1/2 integral of |psi_H|^2.
Real energy(const Connection& conn, const MetricField& h);
Real energy(const Decomposition& d);

/// Closed-form Donaldson functional with L = K exp(s):
///   M = integral tr(-Phi(K) s) + integral <Psi(s)(Ds), Ds>_K.
Real donaldson_closed(const Connection& conn, const MetricField& k, const MetricField& l);

/// Composite Simpson rule for the path integral of tr(-Phi(H) H^{-1} dH/dtau)
/// along the geodesic H(tau) = K exp(tau s0), s0 = log(K^{-1} L).
/// `steps` must be even and at least 8.
Real donaldson_path(const Connection& conn, const MetricField& k, const MetricField& l,
                    int steps = 64);

/// Same integral along the broken geodesic K -> J -> L.
Real donaldson_path_via(const Connection& conn, const MetricField& k, const MetricField& j,
                        const MetricField& l, int steps = 64);

/// Pointwise tr(K^{-1}H) + tr(H^{-1}K) - 2r.
ScalarField sigma_field(const MetricField& k, const MetricField& h);
/// Integral of sigma_field.
Real sigma(const MetricField& k, const MetricField& h);

/// Energy of H, M(K, H) in closed form and sigma(K, H).
FunctionalValues evaluate_functionals(const Connection& conn, const MetricField& k,
                                      const MetricField& h);

}  // namespace nhym
