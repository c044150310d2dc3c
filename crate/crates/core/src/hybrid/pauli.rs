use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use super::HybridError;
use crate::ir::Matrix;

/// Coefficients below this modulus are dropped.
pub const COEFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * other = phase * result` (result `None` is the identity).
    fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (a, b) if a == b => (Complex64::new(1.0, 0.0), None),
            (X, Y) => (i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (Y, X) => (-i, Some(Z)),
            (Z, Y) => (-i, Some(X)),
            (X, Z) => (-i, Some(Y)),
            _ => unreachable!(),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, sorted by qubit; empty is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString(Vec<(usize, Pauli)>);

impl PauliString {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Self {
        Self(vec![(qubit, pauli)])
    }

    /// Builds a string from factors; later factors on the same qubit multiply in.
    pub fn from_factors(factors: impl IntoIterator<Item = (usize, Pauli)>) -> (Complex64, Self) {
        factors.into_iter().fold((Complex64::new(1.0, 0.0), Self::identity()), |(ph, s), f| {
            let (p2, s2) = s.mul(&Self::single(f.0, f.1));
            (ph * p2, s2)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|(q, _)| *q)
    }

    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(&(qa, pa)), Some(&(qb, pb))) if qa == qb => {
                    let (ph, p) = pa.mul(pb);
                    phase *= ph;
                    if let Some(p) = p {
                        out.push((qa, p));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&a), Some(&b)) if a.0 < b.0 => {
                    out.push(a);
                    i += 1;
                }
                (Some(_), Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (Some(&a), None) => {
                    out.push(a);
                    i += 1;
                }
                (None, Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        (phase, PauliString(out))
    }

    /// Dense matrix on `n` qubits (little-endian basis).
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let dim = 1usize << n;
        let mut m = Matrix::zeros(dim);
        for col in 0..dim {
            let mut row = col;
            let mut amp = Complex64::new(1.0, 0.0);
            for &(q, p) in &self.0 {
                let bit = (col >> q) & 1;
                match p {
                    Pauli::X => row ^= 1 << q,
                    Pauli::Y => {
                        row ^= 1 << q;
                        amp *= if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                }
            }
            m[(row, col)] = amp;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self.0.iter().map(|(q, p)| format!("{}{q}", p.letter())).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Complex-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliOperator {
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: f64) -> Self {
        Self::term(Complex64::new(coeff, 0.0), PauliString::identity())
    }

    pub fn term(coeff: Complex64, string: PauliString) -> Self {
        let mut op = Self::zero();
        op.add_term(coeff, string);
        op
    }

    pub fn x(qubit: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), PauliString::single(qubit, Pauli::X))
    }

    pub fn y(qubit: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), PauliString::single(qubit, Pauli::Y))
    }

    pub fn z(qubit: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), PauliString::single(qubit, Pauli::Z))
    }

    pub fn add_term(&mut self, coeff: Complex64, string: PauliString) {
        let entry = self.terms.entry(string.clone()).or_default();
        *entry += coeff;
        if entry.norm() < COEFF_TOL {
            self.terms.remove(&string);
        }
    }

    /// Terms in deterministic (sorted) order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    /// One past the largest qubit index in any term.
    pub fn num_qubits(&self) -> usize {
        self.terms.keys().flat_map(|s| s.qubits()).map(|q| q + 1).max().unwrap_or(0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() < tol)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero();
        for (s, c) in &self.terms {
            out.add_term(c * factor, s.clone());
        }
        out
    }

    pub fn to_matrix(&self, n: usize) -> Matrix {
        let dim = 1usize << n;
        let mut m = Matrix::zeros(dim);
        for (s, c) in &self.terms {
            let p = s.to_matrix(n);
            for r in 0..dim {
                for col in 0..dim {
                    m[(r, col)] += c * p[(r, col)];
                }
            }
        }
        m
    }

    /// Parses `coeff? P<q> P<q>... (± term)*`, e.g. `2.2 X0 X1 + 3.3 Y0 Y1`.
    pub fn parse(text: &str) -> Result<Self, HybridError> {
        let mut p = TermParser::new(text);
        let mut op = Self::zero();
        for (coeff, factors) in p.terms(|p| p.pauli_factor())? {
            let (phase, string) = PauliString::from_factors(factors);
            op.add_term(coeff * phase, string);
        }
        Ok(op)
    }
}

impl FromStr for PauliOperator {
    type Err = HybridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.im.abs() < COEFF_TOL {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({},{})", c.re, c.im)?;
            }
            if !s.is_identity() {
                write!(f, " {s}")?;
            }
        }
        Ok(())
    }
}

/// Shorthand constructors matching the usual operator-building notation.
#[allow(non_snake_case)]
pub fn X(qubit: usize) -> PauliOperator {
    PauliOperator::x(qubit)
}

#[allow(non_snake_case)]
pub fn Y(qubit: usize) -> PauliOperator {
    PauliOperator::y(qubit)
}

#[allow(non_snake_case)]
pub fn Z(qubit: usize) -> PauliOperator {
    PauliOperator::z(qubit)
}

impl Add<&PauliOperator> for &PauliOperator {
    type Output = PauliOperator;

    fn add(self, rhs: &PauliOperator) -> PauliOperator {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&PauliOperator> for PauliOperator {
    fn add_assign(&mut self, rhs: &PauliOperator) {
        for (s, c) in &rhs.terms {
            self.add_term(*c, s.clone());
        }
    }
}

impl Mul<&PauliOperator> for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::zero();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &rhs.terms {
                let (phase, s) = sa.mul(sb);
                out.add_term(ca * cb * phase, s);
            }
        }
        out
    }
}

impl Neg for &PauliOperator {
    type Output = PauliOperator;

    fn neg(self) -> PauliOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub<&PauliOperator> for &PauliOperator {
    type Output = PauliOperator;

    fn sub(self, rhs: &PauliOperator) -> PauliOperator {
        self + &(-rhs)
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<PauliOperator> for PauliOperator {
            type Output = PauliOperator;
            fn $method(self, rhs: PauliOperator) -> PauliOperator {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PauliOperator> for PauliOperator {
            type Output = PauliOperator;
            fn $method(self, rhs: &PauliOperator) -> PauliOperator {
                (&self).$method(rhs)
            }
        }
        impl $trait<PauliOperator> for &PauliOperator {
            type Output = PauliOperator;
            fn $method(self, rhs: PauliOperator) -> PauliOperator {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for PauliOperator {
            type Output = PauliOperator;
            fn $method(self, rhs: f64) -> PauliOperator {
                (&self).$method(&PauliOperator::identity(rhs))
            }
        }
        impl $trait<PauliOperator> for f64 {
            type Output = PauliOperator;
            fn $method(self, rhs: PauliOperator) -> PauliOperator {
                (&PauliOperator::identity(self)).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for PauliOperator {
    type Output = PauliOperator;

    fn neg(self) -> PauliOperator {
        -&self
    }
}

impl Mul<Complex64> for PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: Complex64) -> PauliOperator {
        self.scale(rhs)
    }
}

/// Shared scanner for the `coeff? factor* (± term)*` operator string grammar.
pub(crate) struct TermParser<'a> {
    text: &'a str,
    pos: usize,
    /// Bare integers are factors (fermion modes), so only decimals count as coefficients.
    integer_is_factor: bool,
}

impl<'a> TermParser<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { text, pos: 0, integer_is_factor: false }
    }

    pub(crate) fn with_integer_factors(text: &'a str) -> Self {
        Self { text, pos: 0, integer_is_factor: true }
    }

    fn error(&self, message: impl Into<String>) -> HybridError {
        HybridError::OperatorParse { position: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn number(&mut self) -> Option<f64> {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        let bytes = rest.as_bytes();
        let mut seen_digit = false;
        while end < bytes.len() {
            let b = bytes[end];
            let ok = b.is_ascii_digit()
                || b == b'.'
                || ((b == b'e' || b == b'E') && seen_digit)
                || ((b == b'+' || b == b'-') && end > 0 && matches!(bytes[end - 1], b'e' | b'E'));
            if !ok {
                break;
            }
            seen_digit |= b.is_ascii_digit();
            end += 1;
        }
        if !seen_digit {
            return None;
        }
        let value = rest[..end].parse().ok()?;
        self.pos += end;
        Some(value)
    }

    pub(crate) fn unsigned(&mut self) -> Option<usize> {
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return None;
        }
        let v = self.rest()[..digits].parse().ok()?;
        self.pos += digits;
        Some(v)
    }

    fn coefficient(&mut self) -> Result<Option<Complex64>, HybridError> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let re = self.signed_number().ok_or_else(|| self.error("expected real part"))?;
            if !self.eat(',') {
                return Err(self.error("expected ','"));
            }
            let im = self.signed_number().ok_or_else(|| self.error("expected imaginary part"))?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Some(Complex64::new(re, im)));
        }
        if self.integer_is_factor {
            let rest = self.rest().as_bytes();
            let digits = rest.iter().take_while(|b| b.is_ascii_digit()).count();
            if digits > 0 && !matches!(rest.get(digits), Some(b'.' | b'e' | b'E')) {
                return Ok(None);
            }
        }
        Ok(self.number().map(|x| Complex64::new(x, 0.0)))
    }

    fn signed_number(&mut self) -> Option<f64> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        self.number().map(|x| if neg { -x } else { x })
    }

    fn pauli_factor(&mut self) -> Result<Option<(usize, Pauli)>, HybridError> {
        self.skip_ws();
        let pauli = match self.peek() {
            Some('X') => Pauli::X,
            Some('Y') => Pauli::Y,
            Some('Z') => Pauli::Z,
            Some('I') => {
                self.pos += 1;
                // Identity factors carry no qubit content; an index is optional.
                self.unsigned();
                return self.pauli_factor();
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        let q = self.unsigned().ok_or_else(|| self.error("expected qubit index after Pauli"))?;
        Ok(Some((q, pauli)))
    }

    /// Parses the whole input as signed terms of `factor` items.
    pub(crate) fn terms<F, T>(&mut self, mut factor: F) -> Result<Vec<(Complex64, Vec<T>)>, HybridError>
    where
        F: FnMut(&mut Self) -> Result<Option<T>, HybridError>,
    {
        let mut out = Vec::new();
        self.skip_ws();
        if self.rest().is_empty() {
            return Ok(out);
        }
        let mut sign = 1.0;
        if self.eat('-') {
            sign = -1.0;
        } else {
            self.eat('+');
        }
        loop {
            let coeff = self.coefficient()?;
            self.eat('*');
            let mut factors = Vec::new();
            while let Some(f) = factor(self)? {
                factors.push(f);
                self.eat('*');
            }
            if coeff.is_none() && factors.is_empty() {
                return Err(self.error("expected coefficient or operator factor"));
            }
            out.push((coeff.unwrap_or(Complex64::new(1.0, 0.0)) * sign, factors));
            self.skip_ws();
            if self.rest().is_empty() {
                return Ok(out);
            }
            sign = if self.eat('+') {
                1.0
            } else if self.eat('-') {
                -1.0
            } else {
                return Err(self.error("expected '+' or '-' between terms"));
            };
        }
    }
}
