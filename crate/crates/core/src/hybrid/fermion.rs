use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::pauli::{Pauli, PauliOperator, PauliString, TermParser, COEFF_TOL};
use super::HybridError;

/// One ladder operator: `(mode, dagger)`.
pub type Ladder = (usize, bool);

/// Sum of products of creation/annihilation operators. Products keep their given order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: f64) -> Self {
        Self::term(Complex64::new(coeff, 0.0), Vec::new())
    }

    pub fn term(coeff: Complex64, ladders: Vec<Ladder>) -> Self {
        let mut op = Self::zero();
        op.add_term(coeff, ladders);
        op
    }

    /// Creation operator a†(mode).
    pub fn adag(mode: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![(mode, true)])
    }

    /// Annihilation operator a(mode).
    pub fn a(mode: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![(mode, false)])
    }

    pub fn add_term(&mut self, coeff: Complex64, ladders: Vec<Ladder>) {
        let entry = self.terms.entry(ladders.clone()).or_default();
        *entry += coeff;
        if entry.norm() < COEFF_TOL {
            self.terms.remove(&ladders);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Ladder>, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero();
        for (t, c) in &self.terms {
            out.add_term(c * factor, t.clone());
        }
        out
    }

    /// Parses terms like `0.5 1^ 0 + 0.5 0^ 1`; `k^` is a†(k), bare `k` is a(k). Coefficients
    /// must be written with a decimal point (or as `(re,im)`) to tell them apart from modes.
    pub fn parse(text: &str) -> Result<Self, HybridError> {
        let mut p = TermParser::with_integer_factors(text);
        let mut op = Self::zero();
        let terms = p.terms(|p| {
            let Some(mode) = p.unsigned() else { return Ok(None) };
            Ok(Some((mode, p.eat('^'))))
        })?;
        for (coeff, ladders) in terms {
            op.add_term(coeff, ladders);
        }
        Ok(op)
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let mut s = if c.im.abs() < COEFF_TOL { format!("{}", c.re) } else { format!("({},{})", c.re, c.im) };
                for (m, d) in t {
                    s.push_str(&format!(" {m}{}", if *d { "^" } else { "" }));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Add for FermionOperator {
    type Output = FermionOperator;

    fn add(mut self, rhs: FermionOperator) -> FermionOperator {
        for (t, c) in rhs.terms {
            self.add_term(c, t);
        }
        self
    }
}

impl Sub for FermionOperator {
    type Output = FermionOperator;

    fn sub(self, rhs: FermionOperator) -> FermionOperator {
        self + rhs.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for FermionOperator {
    type Output = FermionOperator;

    fn mul(self, rhs: FermionOperator) -> FermionOperator {
        let mut out = FermionOperator::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &rhs.terms {
                let mut t = ta.clone();
                t.extend_from_slice(tb);
                out.add_term(ca * cb, t);
            }
        }
        out
    }
}

impl Mul<FermionOperator> for f64 {
    type Output = FermionOperator;

    fn mul(self, rhs: FermionOperator) -> FermionOperator {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

/// Maps fermionic modes to qubits: `a_j = (X_j + iY_j)/2 · Z_{j-1}…Z_0`.
pub fn jordan_wigner(op: &FermionOperator) -> PauliOperator {
    let mut out = PauliOperator::zero();
    for (ladders, coeff) in op.terms() {
        let mut product = PauliOperator::identity(1.0);
        for &(mode, dagger) in ladders {
            product = &product * &ladder_to_pauli(mode, dagger);
        }
        out += &product.scale(*coeff);
    }
    out
}

fn ladder_to_pauli(mode: usize, dagger: bool) -> PauliOperator {
    let string = |last| {
        let factors = (0..mode).map(|q| (q, Pauli::Z)).chain(std::iter::once((mode, last)));
        PauliString::from_factors(factors).1
    };
    let half = Complex64::new(0.5, 0.0);
    let y_coeff = Complex64::new(0.0, if dagger { -0.5 } else { 0.5 });
    let mut op = PauliOperator::term(half, string(Pauli::X));
    op.add_term(y_coeff, string(Pauli::Y));
    op
}
