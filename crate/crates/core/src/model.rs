//! Circuit parameterization and the piecewise-linear vector field.
//!
//! State is `(u1, u2, i)`: the two capacitor voltages and the inductor
//! current. The nonlinear resistor has a five-segment odd characteristic
//! `g(u1)` with inner slope `m0`, middle slope `m1` and outer slope `m2`,
//! switching at `|u1| = bp` and `|u1| = b0`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("non-finite state component")]
    NonFinite,
    #[error("cannot read parameter file: {0}")]
    Io(String),
    #[error("malformed parameter file: {0}")]
    Malformed(String),
}

/// All constants of the circuit equations.
///
/// Serialized with the parameter-file key spelling
/// (`c1,c2,l,G,rho,I,m0,m1,m2,Bp,B0`); omitted keys take the
/// [`DOUBLE_SCROLL`] value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    #[serde(rename = "G")]
    pub g_load: f64,
    pub rho: f64,
    #[serde(rename = "I")]
    pub i_pulse: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    #[serde(rename = "Bp")]
    pub bp: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
}

/// The chaotic double-scroll parameter set, with zero control pulse and
/// zero inductor resistance.
pub const DOUBLE_SCROLL: CircuitParams = CircuitParams {
    c1: 1.0 / 9.0,
    c2: 1.0,
    l: 0.142857,
    g_load: 0.7,
    rho: 0.0,
    i_pulse: 0.0,
    m0: -0.8,
    m1: -0.5,
    m2: 5.0,
    bp: 1.0,
    b0: 14.0,
};

impl Default for CircuitParams {
    fn default() -> Self {
        DOUBLE_SCROLL
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields: [(&'static str, f64); 11] = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("l", self.l),
            ("G", self.g_load),
            ("rho", self.rho),
            ("I", self.i_pulse),
            ("m0", self.m0),
            ("m1", self.m1),
            ("m2", self.m2),
            ("Bp", self.bp),
            ("B0", self.b0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ModelError::InvalidParam { name, reason: format!("{v} is not finite") });
            }
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("l", self.l)] {
            if v <= 0.0 {
                return Err(ModelError::InvalidParam { name, reason: format!("must be > 0, got {v}") });
            }
        }
        if !(0.0 < self.bp && self.bp < self.b0) {
            return Err(ModelError::InvalidParam {
                name: "Bp",
                reason: format!("breakpoints must satisfy 0 < Bp < B0, got Bp={} B0={}", self.bp, self.b0),
            });
        }
        Ok(())
    }

    /// Parses a parameter file body (JSON object).
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: CircuitParams = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }
}

/// One point of state space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub u1: f64,
    pub u2: f64,
    pub i: f64,
}

impl StateVector {
    pub const ORIGIN: StateVector = StateVector { u1: 0.0, u2: 0.0, i: 0.0 };

    pub const fn new(u1: f64, u2: f64, i: f64) -> Self {
        StateVector { u1, u2, i }
    }

    /// Constructs a state, rejecting non-finite components.
    pub fn checked(u1: f64, u2: f64, i: f64) -> Result<Self, ModelError> {
        let s = StateVector { u1, u2, i };
        if s.is_finite() {
            Ok(s)
        } else {
            Err(ModelError::NonFinite)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.i.is_finite()
    }

    pub fn to_array(self) -> Vec3 {
        [self.u1, self.u2, self.i]
    }

    pub fn from_array(a: Vec3) -> Self {
        StateVector { u1: a[0], u2: a[1], i: a[2] }
    }

    pub fn max_abs(&self) -> f64 {
        self.u1.abs().max(self.u2.abs()).max(self.i.abs())
    }

    /// `self + dt * d`
    #[inline]
    pub fn advanced(self, d: Derivative, dt: f64) -> Self {
        StateVector {
            u1: self.u1 + dt * d.du1_dt,
            u2: self.u2 + dt * d.du2_dt,
            i: self.i + dt * d.di_dt,
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?})", self.u1, self.u2, self.i)
    }
}

impl Add for StateVector {
    type Output = StateVector;
    fn add(self, o: StateVector) -> StateVector {
        StateVector::new(self.u1 + o.u1, self.u2 + o.u2, self.i + o.i)
    }
}

impl Sub for StateVector {
    type Output = StateVector;
    fn sub(self, o: StateVector) -> StateVector {
        StateVector::new(self.u1 - o.u1, self.u2 - o.u2, self.i - o.i)
    }
}

impl Neg for StateVector {
    type Output = StateVector;
    fn neg(self) -> StateVector {
        StateVector::new(-self.u1, -self.u2, -self.i)
    }
}

impl Mul<f64> for StateVector {
    type Output = StateVector;
    fn mul(self, s: f64) -> StateVector {
        StateVector::new(self.u1 * s, self.u2 * s, self.i * s)
    }
}

/// Time derivative of a [`StateVector`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Derivative {
    pub du1_dt: f64,
    pub du2_dt: f64,
    pub di_dt: f64,
}

impl Derivative {
    pub fn to_array(self) -> Vec3 {
        [self.du1_dt, self.du2_dt, self.di_dt]
    }

    pub fn is_finite(&self) -> bool {
        self.du1_dt.is_finite() && self.du2_dt.is_finite() && self.di_dt.is_finite()
    }
}

/// Segment of the piecewise-linear characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Region {
    NegOuter,
    NegMid,
    Inner,
    PosMid,
    PosOuter,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::NegOuter, Region::NegMid, Region::Inner, Region::PosMid, Region::PosOuter];

    /// Sign of `u1` inside this region (0 for the inner segment).
    pub fn sign(self) -> f64 {
        match self {
            Region::NegOuter | Region::NegMid => -1.0,
            Region::Inner => 0.0,
            Region::PosMid | Region::PosOuter => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::NegOuter => "NEG_OUTER",
            Region::NegMid => "NEG_MID",
            Region::Inner => "INNER",
            Region::PosMid => "POS_MID",
            Region::PosOuter => "POS_OUTER",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl CircuitParams {
    /// `g(u1)` in the absolute-value form.
    pub fn nonlinearity(&self, u1: f64) -> f64 {
        self.m2 * u1
            + 0.5 * (self.m1 - self.m0) * ((u1 - self.bp).abs() - (u1 + self.bp).abs())
            + 0.5 * (self.m2 - self.m1) * ((u1 - self.b0).abs() - (u1 + self.b0).abs())
    }

    /// Breakpoints belong to the inner of the two adjoining regions.
    pub fn region_of(&self, u1: f64) -> Region {
        let a = u1.abs();
        if a <= self.bp {
            return Region::Inner;
        }
        match (u1 > 0.0, a > self.b0) {
            (true, false) => Region::PosMid,
            (true, true) => Region::PosOuter,
            (false, false) => Region::NegMid,
            (false, true) => Region::NegOuter,
        }
    }

    pub fn region_slope(&self, region: Region) -> f64 {
        match region {
            Region::Inner => self.m0,
            Region::NegMid | Region::PosMid => self.m1,
            Region::NegOuter | Region::PosOuter => self.m2,
        }
    }

    /// Constant term of `g` restricted to `region`: `g(u1) = slope·u1 + offset`.
    pub fn region_offset(&self, region: Region) -> f64 {
        let mid = (self.m0 - self.m1) * self.bp;
        let outer = mid + (self.m1 - self.m2) * self.b0;
        match region {
            Region::Inner => 0.0,
            Region::PosMid => mid,
            Region::NegMid => -mid,
            Region::PosOuter => outer,
            Region::NegOuter => -outer,
        }
    }

    pub fn local_slope(&self, u1: f64) -> f64 {
        self.region_slope(self.region_of(u1))
    }

    /// `g(u1)` through the per-region affine form.
    pub fn nonlinearity_affine(&self, u1: f64) -> f64 {
        let r = self.region_of(u1);
        self.region_slope(r) * u1 + self.region_offset(r)
    }

    pub fn vector_field(&self, x: StateVector) -> Derivative {
        Derivative {
            du1_dt: (self.g_load * (x.u2 - x.u1) - self.nonlinearity(x.u1) - self.i_pulse) / self.c1,
            du2_dt: (self.g_load * (x.u1 - x.u2) + x.i) / self.c2,
            di_dt: (-x.u2 - self.rho * x.i) / self.l,
        }
    }

    /// Jacobian of [`vector_field`](Self::vector_field), using the slope of the
    /// region `x.u1` belongs to.
    pub fn jacobian(&self, x: StateVector) -> Matrix3 {
        self.region_jacobian(self.region_of(x.u1))
    }

    pub fn region_jacobian(&self, region: Region) -> Matrix3 {
        let m = self.region_slope(region);
        let g = self.g_load;
        Matrix3([
            [(-g - m) / self.c1, g / self.c1, 0.0],
            [g / self.c2, -g / self.c2, 1.0 / self.c2],
            [0.0, -1.0 / self.l, -self.rho / self.l],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const P: CircuitParams = DOUBLE_SCROLL;

    #[test]
    fn double_scroll_params_are_valid() {
        P.validate().unwrap();
        assert_eq!(P.l, 0.142857);
        assert_eq!(P.c1, 1.0 / 9.0);
    }

    #[test]
    fn nonlinearity_examples() {
        assert_eq!(P.nonlinearity(0.0), 0.0);
        assert_abs_diff_eq!(P.nonlinearity(2.0), -1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(P.nonlinearity(15.0), -2.3, epsilon = 1e-12);
        assert_abs_diff_eq!(P.nonlinearity(1.0), -0.8, epsilon = 1e-12);
    }

    #[test]
    fn region_examples() {
        assert_eq!(P.region_of(0.5), Region::Inner);
        assert_eq!(P.region_of(1.0), Region::Inner);
        assert_eq!(P.region_of(-1.0), Region::Inner);
        assert_eq!(P.region_of(-5.0), Region::NegMid);
        assert_eq!(P.region_of(14.0), Region::PosMid);
        assert_eq!(P.region_of(14.5), Region::PosOuter);
        assert_eq!(P.region_of(-14.5), Region::NegOuter);
    }

    #[test]
    fn slope_examples() {
        assert_eq!(P.local_slope(0.0), -0.8);
        assert_eq!(P.local_slope(1.5), -0.5);
        assert_eq!(P.local_slope(20.0), 5.0);
    }

    #[test]
    fn vector_field_examples() {
        assert_eq!(P.vector_field(StateVector::ORIGIN), Derivative::default());
        let eq = P.vector_field(StateVector::new(1.5, 0.0, -1.05));
        assert!(eq.to_array().iter().all(|c| c.abs() <= 1e-12), "{eq:?}");
        let d = P.vector_field(StateVector::new(0.0, 1.0, 0.0));
        assert_abs_diff_eq!(d.du1_dt, 6.3, epsilon = 1e-12);
        assert_abs_diff_eq!(d.du2_dt, -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(d.di_dt, -1.0 / 0.142857, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_examples() {
        let j = P.jacobian(StateVector::new(1.5, 0.0, -1.05)).0;
        let expect = [[-1.8, 6.3, 0.0], [0.7, -0.7, 1.0], [0.0, -1.0 / 0.142857, 0.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_abs_diff_eq!(j[r][c], expect[r][c], epsilon = 1e-12);
            }
        }
        let j0 = P.jacobian(StateVector::ORIGIN).0;
        assert_abs_diff_eq!(j0[0][0], 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(j0[0][1], 6.3, epsilon = 1e-12);

        let p = CircuitParams { rho: 1.0, l: 1.0, ..P };
        assert_eq!(p.jacobian(StateVector::new(3.0, -2.0, 7.0)).row(2), [0.0, -1.0, -1.0]);
    }

    #[test]
    fn continuity_at_breakpoints() {
        for b in [P.bp, -P.bp, P.b0, -P.b0] {
            let eps = 1e-13;
            let lo = P.nonlinearity_affine(b - eps);
            let hi = P.nonlinearity_affine(b + eps);
            assert!((lo - hi).abs() <= 1e-11, "jump at {b}: {lo} vs {hi}");
            assert!((P.nonlinearity(b) - P.nonlinearity_affine(b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn validation_errors() {
        let bad = CircuitParams { c1: 0.0, ..P };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidParam { name: "c1", .. })));
        let bad = CircuitParams { bp: 20.0, ..P };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidParam { name: "Bp", .. })));
        let bad = CircuitParams { m0: f64::NAN, ..P };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parameter_file_defaults_and_keys() {
        let p = CircuitParams::from_json(r#"{"G": 0.65, "I": 0.01}"#).unwrap();
        assert_eq!(p.g_load, 0.65);
        assert_eq!(p.i_pulse, 0.01);
        assert_eq!(p.m2, 5.0);
        assert_eq!(CircuitParams::from_json("{}").unwrap(), DOUBLE_SCROLL);
        assert!(matches!(CircuitParams::from_json(r#"{"g": 1}"#), Err(ModelError::Malformed(_))));
        assert!(matches!(CircuitParams::from_json(r#"{"c2": -1}"#), Err(ModelError::InvalidParam { .. })));
        let back = CircuitParams::from_json(&P.to_json()).unwrap();
        assert_eq!(back, P);
    }

    #[test]
    fn checked_state_rejects_nan() {
        assert_eq!(StateVector::checked(f64::NAN, 0.0, 0.0), Err(ModelError::NonFinite));
        assert!(StateVector::checked(1.0, 2.0, 3.0).is_ok());
    }

    fn fd_jacobian(p: &CircuitParams, x: StateVector) -> [[f64; 3]; 3] {
        let h = 1e-6;
        let mut out = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut plus = x.to_array();
            let mut minus = x.to_array();
            plus[c] += h;
            minus[c] -= h;
            let fp = p.vector_field(StateVector::from_array(plus)).to_array();
            let fm = p.vector_field(StateVector::from_array(minus)).to_array();
            for r in 0..3 {
                out[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        out
    }

    proptest! {
        #[test]
        fn nonlinearity_is_odd(u in -100.0f64..100.0) {
            prop_assert_eq!(P.nonlinearity(-u), -P.nonlinearity(u));
        }

        #[test]
        fn forms_agree(u in -42.0f64..42.0) {
            prop_assert!((P.nonlinearity(u) - P.nonlinearity_affine(u)).abs() <= 1e-12);
        }

        #[test]
        fn field_is_odd(u1 in -20.0f64..20.0, u2 in -5.0f64..5.0, i in -10.0f64..10.0) {
            let x = StateVector::new(u1, u2, i);
            prop_assert_eq!(P.vector_field(-x), {
                let d = P.vector_field(x);
                Derivative { du1_dt: -d.du1_dt, du2_dt: -d.du2_dt, di_dt: -d.di_dt }
            });
        }

        #[test]
        fn jacobian_matches_finite_differences(u1 in -20.0f64..20.0, u2 in -5.0f64..5.0, i in -10.0f64..10.0) {
            let a = u1.abs();
            prop_assume!((a - P.bp).abs() > 1e-3 && (a - P.b0).abs() > 1e-3);
            let p = CircuitParams { rho: 0.3, ..P };
            let x = StateVector::new(u1, u2, i);
            let fd = fd_jacobian(&p, x);
            let j = p.jacobian(x).0;
            for r in 0..3 {
                for c in 0..3 {
                    let err = (fd[r][c] - j[r][c]).abs();
                    let tol = 1e-5 * j[r][c].abs().max(1.0);
                    prop_assert!(err <= tol, "entry ({r},{c}): fd {} vs {}", fd[r][c], j[r][c]);
                }
            }
        }
    }
}
