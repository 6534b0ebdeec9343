//! Generic numerical machinery used by the observables.

mod quad;
mod scan;

pub use quad::{
    integrate_1d, integrate_2d_nested, integrate_2d_nested_with_breaks, integrate_with_breaks,
    oscillation_breaks, with_interior_points, Estimate, QuadSpec,
};
pub use scan::{
    extrema_of_samples, maximize_scalar, refine_extrema, scan_extrema, Extremum, ExtremumKind,
    GridSpec,
};
