//! Continuous radial coefficients on `[0, 1]`.

use std::f64::consts::PI;

use crate::error::Error;

const SIGN_SAMPLES: usize = 10_000;
const CONTINUITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Polynomials in `r` (not in a local variable) on consecutive pieces.
    Piecewise {
        breakpoints: Vec<f64>,
        coeffs: Vec<Vec<f64>>,
    },
    /// `offset + amplitude * cos(frequency * r)`.
    Cosine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
}

/// A continuous coefficient `m(r)` on `[0, 1]`, possibly sign-changing.
///
/// The sign partition `{r : m(r) > 0}`, `{r : m(r) < 0}` is estimated once
/// at construction from 10^4 midpoint samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    shape: Shape,
    positive: Vec<(f64, f64)>,
    negative: Vec<(f64, f64)>,
}

impl Weight {
    /// Piecewise polynomial. `breakpoints` must start at 0, end at 1 and be
    /// strictly increasing; `coeffs[j]` holds the ascending coefficients on
    /// `[breakpoints[j], breakpoints[j + 1]]`.
    pub fn piecewise(breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self, Error> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidWeight("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidWeight("breakpoints must span [0, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWeight(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if coeffs.len() != breakpoints.len() - 1 {
            return Err(Error::InvalidWeight(format!(
                "{} pieces need {} coefficient lists, got {}",
                breakpoints.len() - 1,
                breakpoints.len() - 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidWeight("empty coefficient list".into()));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidWeight("non-finite coefficient".into()));
        }
        for j in 1..coeffs.len() {
            let r = breakpoints[j];
            let left = horner(&coeffs[j - 1], r);
            let right = horner(&coeffs[j], r);
            if (left - right).abs() > CONTINUITY_TOL * left.abs().max(right.abs()).max(1.0) {
                return Err(Error::InvalidWeight(format!(
                    "discontinuous at r = {r}: {left} vs {right}"
                )));
            }
        }
        Ok(Self::from_shape(Shape::Piecewise {
            breakpoints,
            coeffs,
        }))
    }

    /// A single polynomial `c0 + c1 r + c2 r^2 + ...`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self, Error> {
        Self::piecewise(vec![0.0, 1.0], vec![coeffs])
    }

    pub fn constant(c: f64) -> Result<Self, Error> {
        Self::polynomial(vec![c])
    }

    /// `offset + amplitude * cos(frequency * r)`.
    pub fn cosine(offset: f64, amplitude: f64, frequency: f64) -> Result<Self, Error> {
        if !(offset.is_finite() && amplitude.is_finite() && frequency.is_finite()) {
            return Err(Error::InvalidWeight("non-finite cosine parameter".into()));
        }
        Ok(Self::from_shape(Shape::Cosine {
            offset,
            amplitude,
            frequency,
        }))
    }

    /// `cos(k π r)`, the usual oscillating test weight.
    pub fn cos_pi(k: f64) -> Self {
        Self::cosine(0.0, 1.0, k * PI).expect("finite parameters")
    }

    fn from_shape(shape: Shape) -> Self {
        let mut w = Self {
            shape,
            positive: Vec::new(),
            negative: Vec::new(),
        };
        w.positive = w.sample_sign_set(|m| m > 0.0);
        w.negative = w.sample_sign_set(|m| m < 0.0);
        w
    }

    fn sample_sign_set(&self, keep: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
        let h = 1.0 / SIGN_SAMPLES as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for i in 0..SIGN_SAMPLES {
            let r = (i as f64 + 0.5) * h;
            if keep(self.eval(r)) {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                match out.last_mut() {
                    Some(last) if last.1 == a => last.1 = b,
                    _ => out.push((a, b)),
                }
            }
        }
        out
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Piecewise {
                breakpoints,
                coeffs,
            } => {
                let j = if coeffs.len() == 1 {
                    0
                } else {
                    breakpoints[1..breakpoints.len() - 1]
                        .partition_point(|&b| b <= r)
                        .min(coeffs.len() - 1)
                };
                horner(&coeffs[j], r)
            }
            Shape::Cosine {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * r).cos(),
        }
    }

    /// `c * m`. Exact: negation or scaling of coefficients commutes with
    /// evaluation up to the same rounding as scaling the result.
    pub fn scaled(&self, c: f64) -> Self {
        let shape = match &self.shape {
            Shape::Piecewise {
                breakpoints,
                coeffs,
            } => Shape::Piecewise {
                breakpoints: breakpoints.clone(),
                coeffs: coeffs
                    .iter()
                    .map(|cs| cs.iter().map(|x| c * x).collect())
                    .collect(),
            },
            Shape::Cosine {
                offset,
                amplitude,
                frequency,
            } => Shape::Cosine {
                offset: c * offset,
                amplitude: c * amplitude,
                frequency: *frequency,
            },
        };
        Self::from_shape(shape)
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `m + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let shape = match &self.shape {
            Shape::Piecewise {
                breakpoints,
                coeffs,
            } => Shape::Piecewise {
                breakpoints: breakpoints.clone(),
                coeffs: coeffs
                    .iter()
                    .map(|cs| {
                        let mut cs = cs.clone();
                        cs[0] += c;
                        cs
                    })
                    .collect(),
            },
            Shape::Cosine {
                offset,
                amplitude,
                frequency,
            } => Shape::Cosine {
                offset: offset + c,
                amplitude: *amplitude,
                frequency: *frequency,
            },
        };
        Self::from_shape(shape)
    }

    /// Interior points where the representation changes piece.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.shape {
            Shape::Piecewise { breakpoints, .. } => &breakpoints[1..breakpoints.len() - 1],
            Shape::Cosine { .. } => &[],
        }
    }

    /// Sampled `{m > 0}` as disjoint intervals.
    pub fn positive_set(&self) -> &[(f64, f64)] {
        &self.positive
    }

    /// Sampled `{m < 0}` as disjoint intervals.
    pub fn negative_set(&self) -> &[(f64, f64)] {
        &self.negative
    }

    pub fn positive_measure(&self) -> f64 {
        self.positive.iter().map(|(a, b)| b - a).sum()
    }

    pub fn negative_measure(&self) -> f64 {
        self.negative.iter().map(|(a, b)| b - a).sum()
    }

    /// `meas{m > 0} > 0`, the admissibility condition for the positive
    /// eigenvalue sequence.
    pub fn is_admissible(&self) -> bool {
        !self.positive.is_empty()
    }

    /// `m > 0` at every sample in `[a, b]`.
    pub fn is_positive_on(&self, a: f64, b: f64) -> bool {
        let n = ((b - a) * SIGN_SAMPLES as f64).ceil().max(2.0) as usize;
        (0..=n).all(|i| self.eval(a + (b - a) * i as f64 / n as f64) > 0.0)
    }

    /// Largest `|m|` over the sampling grid (endpoints included).
    pub fn sup_norm(&self) -> f64 {
        (0..=SIGN_SAMPLES)
            .map(|i| self.eval(i as f64 / SIGN_SAMPLES as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `self <= other` at every sample, with at least one strict sample.
    pub fn pointwise_le(&self, other: &Weight) -> (bool, bool) {
        let mut le = true;
        let mut strict = false;
        for i in 0..=SIGN_SAMPLES {
            let r = i as f64 / SIGN_SAMPLES as f64;
            let (a, b) = (self.eval(r), other.eval(r));
            if a > b {
                le = false;
            }
            if a < b {
                strict = true;
            }
        }
        (le, strict)
    }

    /// Stable 64-bit fingerprint of the representation (FNV-1a over the
    /// coefficient bits).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        match &self.shape {
            Shape::Piecewise {
                breakpoints,
                coeffs,
            } => {
                feed(1.0);
                breakpoints.iter().for_each(|&b| feed(b));
                for cs in coeffs {
                    feed(cs.len() as f64);
                    cs.iter().for_each(|&c| feed(c));
                }
            }
            Shape::Cosine {
                offset,
                amplitude,
                frequency,
            } => {
                feed(2.0);
                feed(*offset);
                feed(*amplitude);
                feed(*frequency);
            }
        }
        h
    }
}

#[inline]
fn horner(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}
