//! Numerical integration against the Jacobi weight `(1-t)^{k-1}(1+t)^k`, the
//! weighted sphere measure `ω_k dσ` and the weighted ball measure `ω_k dy`.

mod adaptive;
mod gauss;
mod kronrod;
mod rules;

pub use adaptive::{integrate_jacobi, Integral, JacobiIntegrator, JacobiNode, DEFAULT_TOL};
pub use gauss::{gauss_jacobi, gauss_legendre, generalized_gegenbauer};
pub use kronrod::integrate_gk;
pub use rules::{
    ball_integrate, ball_integrate_green_origin, ball_rule, jacobi_rule, plain_sphere_rule, radial_rule,
    sphere_integrate_adaptive, sphere_integrate_zonal, sphere_rule, unit_sphere_area, Domain, QuadratureRule,
};
