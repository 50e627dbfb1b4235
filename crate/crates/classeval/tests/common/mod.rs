//! Exact rational arithmetic oracle, independent of the library's float
//! path. Metrics are recomputed from first principles on `BigRational`
//! cells so golden tests can pin values exactly.

#![allow(dead_code)]

use num::rational::BigRational;
use num::{BigInt, FromPrimitive, ToPrimitive, Zero};

pub fn ratio(numerator: i64, denominator: i64) -> BigRational {
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

fn int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

#[derive(Clone)]
pub struct RationalMatrix {
    pub n: usize,
    cells: Vec<BigRational>, // row-major, rows = predictions
}

impl RationalMatrix {
    pub fn from_integers(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        let cells = rows.iter().flatten().map(|&v| int(v)).collect();
        Self { n, cells }
    }

    pub fn get(&self, pred: usize, gold: usize) -> &BigRational {
        &self.cells[pred * self.n + gold]
    }

    pub fn total(&self) -> BigRational {
        self.cells.iter().sum()
    }

    pub fn bias(&self, i: usize) -> BigRational {
        (0..self.n).map(|j| self.get(i, j).clone()).sum()
    }

    pub fn prevalence(&self, j: usize) -> BigRational {
        (0..self.n).map(|i| self.get(i, j).clone()).sum()
    }

    pub fn correct(&self, i: usize) -> BigRational {
        self.get(i, i).clone()
    }

    pub fn accuracy(&self) -> BigRational {
        let correct: BigRational = (0..self.n).map(|i| self.correct(i)).sum();
        correct / self.total()
    }

    pub fn micro_precision(&self) -> BigRational {
        let correct: BigRational = (0..self.n).map(|i| self.correct(i)).sum();
        let bias: BigRational = (0..self.n).map(|i| self.bias(i)).sum();
        correct / bias
    }

    pub fn micro_recall(&self) -> BigRational {
        let correct: BigRational = (0..self.n).map(|i| self.correct(i)).sum();
        let prevalence: BigRational = (0..self.n).map(|j| self.prevalence(j)).sum();
        correct / prevalence
    }

    fn class_precision(&self, i: usize) -> BigRational {
        let bias = self.bias(i);
        if bias.is_zero() {
            BigRational::zero()
        } else {
            self.correct(i) / bias
        }
    }

    fn class_recall(&self, i: usize) -> BigRational {
        let prevalence = self.prevalence(i);
        if prevalence.is_zero() {
            BigRational::zero()
        } else {
            self.correct(i) / prevalence
        }
    }

    fn class_f1(&self, i: usize) -> BigRational {
        let denom = self.bias(i) + self.prevalence(i);
        if denom.is_zero() {
            BigRational::zero()
        } else {
            int(2) * self.correct(i) / denom
        }
    }

    pub fn macro_precision(&self) -> BigRational {
        let sum: BigRational = (0..self.n).map(|i| self.class_precision(i)).sum();
        sum / int(self.n as i64)
    }

    pub fn macro_recall(&self) -> BigRational {
        let sum: BigRational = (0..self.n).map(|i| self.class_recall(i)).sum();
        sum / int(self.n as i64)
    }

    pub fn macro_f1(&self) -> BigRational {
        let sum: BigRational = (0..self.n).map(|i| self.class_f1(i)).sum();
        sum / int(self.n as i64)
    }

    pub fn macro_f1_prime(&self) -> BigRational {
        let r = self.macro_recall();
        let p = self.macro_precision();
        let denom = r.clone() + p.clone();
        if denom.is_zero() {
            BigRational::zero()
        } else {
            int(2) * r * p / denom
        }
    }

    pub fn weighted_f1(&self) -> BigRational {
        let sum: BigRational = (0..self.n)
            .map(|i| self.prevalence(i) * self.class_f1(i))
            .sum();
        sum / self.total()
    }

    /// `(r*s - p.b) / (s^2 - p.b)` on raw masses.
    pub fn kappa(&self) -> BigRational {
        let s = self.total();
        let r: BigRational = (0..self.n).map(|i| self.correct(i)).sum();
        let chance: BigRational = (0..self.n)
            .map(|i| self.prevalence(i) * self.bias(i))
            .sum();
        (r * s.clone() - chance.clone()) / (s.clone() * s - chance)
    }

    /// The MCC numerator `r*s - p.b`; zero here pins MCC to zero exactly.
    pub fn mcc_numerator(&self) -> BigRational {
        let s = self.total();
        let r: BigRational = (0..self.n).map(|i| self.correct(i)).sum();
        let chance: BigRational = (0..self.n)
            .map(|i| self.prevalence(i) * self.bias(i))
            .sum();
        r * s - chance
    }

    pub fn bookmaker_win(&self) -> BigRational {
        let recall_sum: BigRational = (0..self.n).map(|i| self.class_recall(i)).sum();
        self.total() * (recall_sum - int(1))
    }

    pub fn scale_columns(&self, factors: &[BigRational]) -> Self {
        assert_eq!(factors.len(), self.n);
        let mut cells = self.cells.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                cells[i * self.n + j] *= factors[j].clone();
            }
        }
        Self { n: self.n, cells }
    }

    /// Factors that equalize all prevalences at `total / n`.
    pub fn calibration(&self) -> Vec<BigRational> {
        let total = self.total();
        (0..self.n)
            .map(|j| total.clone() / (int(self.n as i64) * self.prevalence(j)))
            .collect()
    }
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().expect("rational fits in f64")
}

pub fn approx_rational(value: f64) -> BigRational {
    BigRational::from_f64(value).expect("finite float")
}
