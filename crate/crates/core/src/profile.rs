//! Rotationally invariant functions on the sphere, as functions of `u = <xi, e_n>`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gegenbauer::{GegenbauerSpectrum, SeriesEvaluator};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    /// Parity of a linear combination of terms with these parities.
    pub fn combine(parities: impl IntoIterator<Item = Parity>) -> Parity {
        let mut it = parities.into_iter();
        let Some(first) = it.next() else {
            return Parity::Even;
        };
        if it.all(|p| p == first) {
            first
        } else {
            Parity::Mixed
        }
    }

    /// Whether a degree-`m` Gegenbauer term can appear with this parity.
    pub fn admits(self, m: usize) -> bool {
        match self {
            Parity::Even => m % 2 == 0,
            Parity::Odd => m % 2 == 1,
            Parity::Mixed => true,
        }
    }
}

#[derive(Clone)]
enum Repr {
    Closed {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
    Series(Arc<SeriesEvaluator>),
    Combination(Vec<(f64, SphereProfile)>),
    Mapped {
        inputs: Vec<SphereProfile>,
        map: MapFn,
    },
}

/// Pointwise map applied to the values of several input profiles.
pub type MapFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function `u -> f(u)` on `[-1, 1]` standing for the rotationally invariant
/// sphere function `xi -> f(<xi, e_n>)` on `S^{n-1}`.
#[derive(Clone)]
pub struct SphereProfile {
    n: usize,
    parity: Parity,
    note: String,
    support_floor: Option<f64>,
    repr: Repr,
}

impl fmt::Debug for SphereProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Closed { derivative, .. } => {
                if derivative.is_some() {
                    "closed+derivative".to_string()
                } else {
                    "closed".to_string()
                }
            }
            Repr::Series(s) => format!("series(degree {})", s.spectrum().max_degree()),
            Repr::Combination(t) => format!("combination({} terms)", t.len()),
            Repr::Mapped { inputs, .. } => format!("mapped({} inputs)", inputs.len()),
        };
        f.debug_struct("SphereProfile")
            .field("n", &self.n)
            .field("parity", &self.parity)
            .field("note", &self.note)
            .field("kind", &kind)
            .finish()
    }
}

impl SphereProfile {
    pub fn closed<F>(n: usize, parity: Parity, note: impl Into<String>, value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SphereProfile {
            n,
            parity,
            note: note.into(),
            support_floor: None,
            repr: Repr::Closed {
                value: Arc::new(value),
                derivative: None,
            },
        }
    }

    /// Attaches an exact derivative `d f / du` to a closed-form profile.
    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Repr::Closed { value, .. } = self.repr {
            self.repr = Repr::Closed {
                value,
                derivative: Some(Arc::new(derivative)),
            };
        }
        self
    }

    /// Declares that the profile vanishes identically for `|u| <= floor`.
    pub fn with_support_floor(mut self, floor: f64) -> Self {
        self.support_floor = Some(floor);
        self
    }

    pub fn from_spectrum(spectrum: GegenbauerSpectrum, note: impl Into<String>) -> Self {
        let n = spectrum.n;
        let parity = spectrum.parity;
        SphereProfile {
            n,
            parity,
            note: note.into(),
            support_floor: None,
            repr: Repr::Series(Arc::new(SeriesEvaluator::new(spectrum))),
        }
    }

    /// `sum_i c_i f_i`; all terms must share the dimension.
    pub fn combination(n: usize, note: impl Into<String>, terms: Vec<(f64, SphereProfile)>) -> Self {
        debug_assert!(terms.iter().all(|(_, p)| p.n == n));
        let parity = Parity::combine(terms.iter().map(|(_, p)| p.parity));
        SphereProfile {
            n,
            parity,
            note: note.into(),
            support_floor: None,
            repr: Repr::Combination(terms),
        }
    }

    /// `u -> map(f_1(u), ..., f_k(u))`; batched evaluation is forwarded to the inputs.
    pub fn mapped<F>(n: usize, parity: Parity, note: impl Into<String>, inputs: Vec<SphereProfile>, map: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        SphereProfile {
            n,
            parity,
            note: note.into(),
            support_floor: None,
            repr: Repr::Mapped {
                inputs,
                map: Arc::new(map),
            },
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        SphereProfile::closed(n, Parity::Even, "constant", move |_| c).with_derivative(|_| 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn support_floor(&self) -> Option<f64> {
        self.support_floor
    }

    pub fn eval(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Closed { value, .. } => value(u),
            Repr::Series(s) => s.eval(u),
            Repr::Combination(terms) => terms.iter().map(|(c, p)| c * p.eval(u)).sum(),
            Repr::Mapped { inputs, map } => {
                let vals: Vec<f64> = inputs.iter().map(|p| p.eval(u)).collect();
                map(&vals)
            }
        }
    }

    /// `out[i] = f(us[i])`; series parts use the batched recurrence.
    pub fn eval_many(&self, us: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Series(s) => s.eval_many(us, out),
            Repr::Closed { value, .. } => {
                for (o, &u) in out.iter_mut().zip(us) {
                    *o = value(u);
                }
            }
            Repr::Combination(terms) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut tmp = vec![0.0; us.len()];
                for (c, p) in terms {
                    p.eval_many(us, &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += c * t;
                    }
                }
            }
            Repr::Mapped { inputs, map } => {
                let cols: Vec<Vec<f64>> = inputs
                    .iter()
                    .map(|p| {
                        let mut v = vec![0.0; us.len()];
                        p.eval_many(us, &mut v);
                        v
                    })
                    .collect();
                let mut row = vec![0.0; inputs.len()];
                for (i, o) in out.iter_mut().enumerate() {
                    for (r, c) in row.iter_mut().zip(&cols) {
                        *r = c[i];
                    }
                    *o = map(&row);
                }
            }
        }
    }

    /// `out[i] = (f(u_i) - f(-u_i)) / 2`, exactly zero for even parts.
    pub fn odd_part_many(&self, us: &[f64], out: &mut [f64]) {
        match (&self.repr, self.parity) {
            (_, Parity::Even) => out.iter_mut().for_each(|o| *o = 0.0),
            (_, Parity::Odd) => self.eval_many(us, out),
            (Repr::Combination(terms), _) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut tmp = vec![0.0; us.len()];
                for (c, p) in terms {
                    p.odd_part_many(us, &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += c * t;
                    }
                }
            }
            _ => {
                let neg: Vec<f64> = us.iter().map(|u| -u).collect();
                let mut tmp = vec![0.0; us.len()];
                self.eval_many(us, out);
                self.eval_many(&neg, &mut tmp);
                for (o, t) in out.iter_mut().zip(&tmp) {
                    *o = 0.5 * (*o - t);
                }
            }
        }
    }

    /// Pointwise product; the support floor is the larger of the two.
    pub fn product(&self, other: &SphereProfile) -> SphereProfile {
        let parity = match (self.parity, other.parity) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        };
        let (a, b) = (self.clone(), other.clone());
        let note = format!("{} * {}", self.note, other.note);
        let mut out = SphereProfile::closed(self.n, parity, note, move |u| a.eval(u) * b.eval(u));
        out.support_floor = match (self.support_floor, other.support_floor) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        out
    }

    /// Exact derivative when the representation carries one.
    pub fn derivative(&self, u: f64) -> Option<f64> {
        match &self.repr {
            Repr::Closed { derivative, .. } => derivative.as_ref().map(|d| d(u)),
            Repr::Series(s) => Some(s.eval_derivative(u)),
            Repr::Combination(terms) => {
                let mut acc = 0.0;
                for (c, p) in terms {
                    acc += c * p.derivative(u)?;
                }
                Some(acc)
            }
            Repr::Mapped { .. } => None,
        }
    }

    pub fn has_derivative(&self) -> bool {
        match &self.repr {
            Repr::Closed { derivative, .. } => derivative.is_some(),
            Repr::Series(_) => true,
            Repr::Combination(terms) => terms.iter().all(|(_, p)| p.has_derivative()),
            Repr::Mapped { .. } => false,
        }
    }

    /// The underlying spectrum when the profile is a single Gegenbauer series.
    pub fn spectrum(&self) -> Option<&GegenbauerSpectrum> {
        match &self.repr {
            Repr::Series(s) => Some(s.spectrum()),
            _ => None,
        }
    }

    pub fn terms(&self) -> Option<&[(f64, SphereProfile)]> {
        match &self.repr {
            Repr::Combination(t) => Some(t),
            _ => None,
        }
    }

    /// Largest polynomial degree carried by series components (0 for closed forms).
    pub fn series_degree(&self) -> usize {
        match &self.repr {
            Repr::Closed { .. } => 0,
            Repr::Series(s) => s.spectrum().max_degree(),
            Repr::Combination(t) => t.iter().map(|(_, p)| p.series_degree()).max().unwrap_or(0),
            Repr::Mapped { inputs, .. } => inputs.iter().map(|p| p.series_degree()).max().unwrap_or(0),
        }
    }

    /// Profile with `u -> -u` applied.
    pub fn reflected(&self) -> SphereProfile {
        let me = self.clone();
        let note = format!("reflect({})", self.note);
        let parity = self.parity;
        let mut out = SphereProfile::closed(self.n, parity, note, move |u| me.eval(-u));
        if self.has_derivative() {
            let me = self.clone();
            out = out.with_derivative(move |u| -me.derivative(-u).unwrap_or(f64::NAN));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_combination() {
        assert_eq!(Parity::combine([Parity::Even, Parity::Even]), Parity::Even);
        assert_eq!(Parity::combine([Parity::Odd, Parity::Even]), Parity::Mixed);
        assert!(Parity::Even.admits(4) && !Parity::Even.admits(3));
        assert!(Parity::Odd.admits(3) && Parity::Mixed.admits(2));
    }

    #[test]
    fn combination_eval_and_derivative() {
        let a = SphereProfile::closed(5, Parity::Even, "u^2", |u| u * u).with_derivative(|u| 2.0 * u);
        let b = SphereProfile::constant(5, 3.0);
        let c = SphereProfile::combination(5, "mix", vec![(2.0, a), (-1.0, b)]);
        assert_eq!(c.parity(), Parity::Even);
        assert!((c.eval(0.5) - (0.5 - 3.0)).abs() < 1e-15);
        assert!((c.derivative(0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn missing_derivative_propagates() {
        let a = SphereProfile::closed(5, Parity::Odd, "u", |u| u);
        let c = SphereProfile::combination(5, "c", vec![(1.0, a)]);
        assert!(!c.has_derivative());
        assert!(c.derivative(0.1).is_none());
    }

    #[test]
    fn mapped_batch_matches_scalar() {
        let s = GegenbauerSpectrum::new(5, Parity::Even, vec![1.0, 0.0, 0.3, 0.0, 0.1]);
        let a = SphereProfile::from_spectrum(s, "s");
        let b = SphereProfile::closed(5, Parity::Even, "u^2", |u| u * u);
        let m = SphereProfile::mapped(5, Parity::Even, "m", vec![a, b], |v| v[0] * v[0] + v[1]);
        let us = [-0.9, -0.4, 0.0, 0.2, 0.5, 0.99];
        let mut out = [0.0; 6];
        m.eval_many(&us, &mut out);
        for (u, v) in us.iter().zip(out) {
            assert!((m.eval(*u) - v).abs() < 1e-15);
        }
        assert!(!m.has_derivative());
    }

    #[test]
    fn reflection() {
        let a = SphereProfile::closed(5, Parity::Mixed, "1+u", |u| 1.0 + u).with_derivative(|_| 1.0);
        let r = a.reflected();
        assert_eq!(r.eval(0.25), 0.75);
        assert_eq!(r.derivative(0.25), Some(-1.0));
    }
}
