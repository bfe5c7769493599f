//! Ion configurations for the Coulomb and Coulomb–Buckingham costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction constants indexed by the charge product `q1 * q2` (`plus` for +1, `minus` for -1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuckinghamParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl BuckinghamParams {
    fn by_sign(&self, product: i8) -> (f64, f64, f64) {
        if product > 0 {
            (self.a_plus, self.b_plus, self.c_plus)
        } else {
            (self.a_minus, self.b_minus, self.c_minus)
        }
    }

    /// Smallest penalty `M` admitted for `k` ions: `2 k^2 (2 + A+ + A- + C+ + C-)`.
    pub fn min_penalty(&self, k: usize) -> f64 {
        2.0 * (k * k) as f64 * (2.0 + self.a_plus + self.a_minus + self.c_plus + self.c_minus)
    }

    /// Pair energy at separation `r > 0`, without the `r = 0` penalty branch.
    pub fn energy(&self, r: f64, q1: i8, q2: i8) -> f64 {
        let product = q1 * q2;
        let (a, b, c) = self.by_sign(product);
        a / (b * r).exp() - c / r.powi(6) + f64::from(product) / r
    }

    fn all_positive(&self) -> bool {
        [self.a_plus, self.a_minus, self.b_plus, self.b_minus, self.c_plus, self.c_minus]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IonVariant {
    Coulomb,
    Buckingham,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonSystem {
    pub positions: Vec<[f64; 3]>,
    pub charges: Vec<i8>,
    pub params: BuckinghamParams,
    pub penalty: f64,
    pub variant: IonVariant,
}

impl IonSystem {
    /// Validates the configuration for `k` selected ions.
    pub fn new(
        positions: Vec<[f64; 3]>,
        charges: Vec<i8>,
        params: BuckinghamParams,
        penalty: f64,
        variant: IonVariant,
        k: usize,
    ) -> Result<Self> {
        if positions.is_empty() || positions.len() != charges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} positions but {} charges",
                positions.len(),
                charges.len()
            )));
        }
        if charges.iter().any(|q| *q != 1 && *q != -1) {
            return Err(Error::InvalidInput("ion charges must be +1 or -1".into()));
        }
        if !(penalty > 0.0) {
            return Err(Error::InvalidInput("penalty M must be positive".into()));
        }
        if variant == IonVariant::Buckingham {
            if !params.all_positive() {
                return Err(Error::InvalidInput("Buckingham constants A±, B±, C± must be positive".into()));
            }
            let floor = params.min_penalty(k);
            if penalty < floor {
                return Err(Error::InvalidInput(format!(
                    "penalty M = {penalty} below the required 2k^2(2 + A+ + A- + C+ + C-) = {floor}"
                )));
            }
        }
        Ok(IonSystem { positions, charges, params, penalty, variant })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.positions[a], self.positions[b]);
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
    }

    /// Smallest distance between two distinct ions; `+inf` for a single ion.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                best = best.min(self.distance(a, b));
            }
        }
        best
    }

    /// Smallest nonzero distance between two ions; `+inf` if there is none.
    pub fn min_positive_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                let d = self.distance(a, b);
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }

    /// `U(r, q1, q2)` with `U(0, ., .) = M`.
    pub fn pair_energy(&self, a: usize, b: usize) -> f64 {
        let r = if a == b { 0.0 } else { self.distance(a, b) };
        if r == 0.0 {
            return self.penalty;
        }
        self.params.energy(r, self.charges[a], self.charges[b])
    }

    pub fn evaluate(&self, tuple: &[usize]) -> f64 {
        match self.variant {
            IonVariant::Coulomb => {
                let mut acc = 0.0;
                for i in 0..tuple.len() {
                    for i2 in i + 1..tuple.len() {
                        let r = if tuple[i] == tuple[i2] { 0.0 } else { self.distance(tuple[i], tuple[i2]) };
                        acc += if r == 0.0 { self.penalty } else { 1.0 / r };
                    }
                }
                acc
            }
            IonVariant::Buckingham => {
                let charge: i32 = tuple.iter().map(|&j| i32::from(self.charges[j])).sum();
                if charge != 0 {
                    return self.penalty;
                }
                let mut acc = 0.0;
                for i in 0..tuple.len() {
                    for i2 in i + 1..tuple.len() {
                        if tuple[i] == tuple[i2] || self.distance(tuple[i], tuple[i2]) == 0.0 {
                            return self.penalty;
                        }
                        acc += self.pair_energy(tuple[i], tuple[i2]);
                    }
                }
                acc
            }
        }
    }

    /// Certified bound on `|C|` for `k` selected ions.
    pub fn upper_bound(&self, k: usize) -> f64 {
        let pairs = (k * k.saturating_sub(1) / 2) as f64;
        let sep = self.min_positive_separation();
        match self.variant {
            IonVariant::Coulomb => {
                let inverse = if sep.is_finite() { 1.0 / sep } else { 0.0 };
                pairs * self.penalty.max(inverse)
            }
            IonVariant::Buckingham => {
                if self.min_separation() >= 1.0 {
                    // every pair energy is at most A + C + 1 in absolute value, and
                    // M >= 2k^2(2 + ...) dominates the pair sum
                    self.penalty
                } else {
                    let p = &self.params;
                    let r = sep;
                    let a = p.a_plus.max(p.a_minus);
                    let c = p.c_plus.max(p.c_minus);
                    let per_pair = a + c / r.powi(6) + 1.0 / r;
                    self.penalty.max(pairs * per_pair)
                }
            }
        }
    }
}
