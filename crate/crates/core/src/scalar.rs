//! Scalar abstraction: the whole numeric core is generic over `Real`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type: f32 or f64.
///
/// `RealField` supplies the elementary functions, `FromPrimitive` the
/// conversions from literal tolerances and integer counts. Integer lattice
/// arithmetic is exact (`i64`) and does not go through this trait.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy + Default {
    /// Lossy conversion from f64, for tolerances and grid constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    /// Conversion from usize (grid sizes, counts).
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize conversion")
    }

    /// Conversion from i64 (lattice coordinates, Fourier indices).
    fn of_i64(x: i64) -> Self {
        Self::from_i64(x).expect("i64 conversion")
    }

    /// Round-trip to f64 for reporting and serialization.
    fn to_double(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
