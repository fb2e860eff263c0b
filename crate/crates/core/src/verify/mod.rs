//! Numerical verification of the hyperbolicity argument: sampled checks,
//! polynomial constants, period-two stability, Lyapunov exponents and
//! parameter sweeps.

pub mod checks;
pub mod lyapunov;
pub mod polynomials;
pub mod report;
pub mod sampling;
pub mod stability;
pub mod sweep;

pub use checks::{
    check_closed_forms, check_cone_field, check_defocusing, check_near_tangency,
    check_reversed_wojtkowski, check_reversibility, check_multiple_bounds, check_subsegment,
    check_period2, check_polynomial_constants, check_tangent_map, check_uv_separation, verify_all,
    SuiteConfig,
};
pub use lyapunov::{lyapunov_exponent, LyapunovEstimate};
pub use polynomials::proof_polynomials;
pub use report::{Assessment, CheckReport};
pub use stability::{period2_stability, Stability};
pub use sweep::{sweep, SweepCell};
