//! Closed-interval arithmetic with outward rounding (one ulp per operation),
//! enough to enclose the partial derivatives of field expressions.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("square root of an interval reaching below zero")]
    NegativeSqrt,
    #[error("enclosure is unbounded")]
    Unbounded,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn widened(lo: f64, hi: f64) -> Self {
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    /// Widens by a relative error of `ulps` machine epsilons on top of one ulp,
    /// for library functions whose results are not correctly rounded.
    fn widened_rel(lo: f64, hi: f64, ulps: f64) -> Self {
        Self::widened(
            lo - lo.abs() * ulps * f64::EPSILON,
            hi + hi.abs() * ulps * f64::EPSILON,
        )
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZero);
        }
        Ok(self * Self::widened(1.0 / rhs.hi, 1.0 / rhs.lo))
    }

    pub fn powi(self, k: i32) -> Result<Self, IntervalError> {
        if k == 0 {
            return Ok(Self::point(1.0));
        }
        if k < 0 {
            return Self::point(1.0).div(self.powi(-k)?);
        }
        let (a, b) = (self.lo.powi(k), self.hi.powi(k));
        let ulps = k as f64 + 1.0;
        Ok(if k % 2 == 1 || self.lo >= 0.0 {
            Self::widened_rel(a, b, ulps)
        } else if self.hi <= 0.0 {
            Self::widened_rel(b, a, ulps)
        } else {
            Self::widened_rel(0.0, a.max(b), ulps).clamp_lo(0.0)
        })
    }

    fn clamp_lo(mut self, v: f64) -> Self {
        self.lo = self.lo.max(v);
        self
    }

    pub fn exp(self) -> Self {
        Self::widened_rel(self.lo.exp(), self.hi.exp(), 4.0).clamp_lo(0.0)
    }

    pub fn sqrt(self) -> Result<Self, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeSqrt);
        }
        Ok(Self::widened(self.lo.sqrt(), self.hi.sqrt()).clamp_lo(0.0))
    }

    pub fn sin(self) -> Self {
        self.trig(0.0, f64::sin)
    }

    pub fn cos(self) -> Self {
        // cos(x) = sin(x + pi/2); extrema of cos at multiples of pi.
        self.trig(FRAC_PI_2, f64::cos)
    }

    /// Range of a shifted sine over the interval: endpoint values plus every
    /// extremum `x + shift = pi/2 + k pi` inside.
    fn trig(self, shift: f64, f: fn(f64) -> f64) -> Self {
        if !self.is_bounded() || self.hi - self.lo >= 2.0 * PI {
            return Self::new(-1.0, 1.0);
        }
        let (a, b) = (f(self.lo), f(self.hi));
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        let k0 = ((self.lo + shift - FRAC_PI_2) / PI).floor() as i64 - 1;
        let k1 = ((self.hi + shift - FRAC_PI_2) / PI).ceil() as i64 + 1;
        for k in k0..=k1 {
            let x = FRAC_PI_2 + k as f64 * PI - shift;
            // Include extrema that are inside or within rounding of the ends.
            if x >= self.lo - 1e-12 && x <= self.hi + 1e-12 {
                if k.rem_euclid(2) == 0 {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Self::widened_rel(lo, hi, 4.0).clamp_to_unit()
    }

    fn clamp_to_unit(self) -> Self {
        Self {
            lo: self.lo.max(-1.0),
            hi: self.hi.min(1.0),
        }
    }
}

impl Add for Interval {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::widened(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::widened(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        // 0 * inf products are NaN; treat them as zero contributions.
        let clean = p.map(|v| if v.is_nan() { 0.0 } else { v });
        let lo = clean.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = clean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi)
    }
}
