use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Matrix;

/// The closed set of primitive instructions understood by every backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    U1,
    U3,
    CX,
    CY,
    CZ,
    CH,
    CPhase,
    CRz,
    Swap,
    Measure,
    Reset,
}

impl GateKind {
    pub const ALL: [GateKind; 22] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U1,
        GateKind::U3,
        GateKind::CX,
        GateKind::CY,
        GateKind::CZ,
        GateKind::CH,
        GateKind::CPhase,
        GateKind::CRz,
        GateKind::Swap,
        GateKind::Measure,
        GateKind::Reset,
    ];

    /// Number of qubits the gate acts on.
    pub fn arity(self) -> usize {
        use GateKind::*;
        match self {
            CX | CY | CZ | CH | CPhase | CRz | Swap => 2,
            _ => 1,
        }
    }

    /// Number of real angle parameters.
    pub fn param_count(self) -> usize {
        use GateKind::*;
        match self {
            Rx | Ry | Rz | U1 | CPhase | CRz => 1,
            U3 => 3,
            _ => 0,
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset)
    }

    /// Gates whose matrix is diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        use GateKind::*;
        matches!(self, Z | S | Sdg | T | Tdg | Rz | U1 | CZ | CPhase | CRz)
    }

    /// Name used by the textual circuit listing.
    pub fn name(self) -> &'static str {
        use GateKind::*;
        match self {
            H => "H",
            X => "X",
            Y => "Y",
            Z => "Z",
            S => "S",
            Sdg => "Sdg",
            T => "T",
            Tdg => "Tdg",
            Rx => "Rx",
            Ry => "Ry",
            Rz => "Rz",
            U1 => "U1",
            U3 => "U3",
            CX => "CNOT",
            CY => "CY",
            CZ => "CZ",
            CH => "CH",
            CPhase => "CPhase",
            CRz => "CRz",
            Swap => "Swap",
            Measure => "Measure",
            Reset => "Reset",
        }
    }

    /// Resolves a gate name as spelled in XASM kernels (case-sensitive, with common aliases).
    pub fn from_xasm(name: &str) -> Option<Self> {
        use GateKind::*;
        Some(match name {
            "H" => H,
            "X" => X,
            "Y" => Y,
            "Z" => Z,
            "S" => S,
            "Sdg" => Sdg,
            "T" => T,
            "Tdg" => Tdg,
            "Rx" => Rx,
            "Ry" => Ry,
            "Rz" => Rz,
            "U1" => U1,
            "U" | "U3" => U3,
            "CX" | "CNOT" => CX,
            "CY" => CY,
            "CZ" => CZ,
            "CH" => CH,
            "CPhase" => CPhase,
            "CRz" | "CRZ" => CRz,
            "Swap" | "SWAP" => Swap,
            "Measure" => Measure,
            "Reset" => Reset,
            _ => return None,
        })
    }

    /// Unitary matrix of the gate on its own qubits. Two-qubit matrices use local index
    /// `b0 + 2*b1`, where `b0` is the state of the first listed qubit.
    ///
    /// Returns `None` for Measure and Reset.
    pub fn matrix(self, params: &[f64]) -> Option<Matrix> {
        use GateKind::*;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let m = match self {
            H => Matrix::from_real_rows(&[[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]),
            X => Matrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]),
            Y => Matrix::from_rows(&[[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
            Z => Matrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]),
            S => Matrix::diagonal(&[one, c(0.0, 1.0)]),
            Sdg => Matrix::diagonal(&[one, c(0.0, -1.0)]),
            T => Matrix::diagonal(&[one, Complex64::from_polar(1.0, FRAC_PI_4)]),
            Tdg => Matrix::diagonal(&[one, Complex64::from_polar(1.0, -FRAC_PI_4)]),
            Rx => {
                let (s, co) = (params[0] / 2.0).sin_cos();
                Matrix::from_rows(&[[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
            }
            Ry => {
                let (s, co) = (params[0] / 2.0).sin_cos();
                Matrix::from_real_rows(&[[co, -s], [s, co]])
            }
            Rz => Matrix::diagonal(&[
                Complex64::from_polar(1.0, -params[0] / 2.0),
                Complex64::from_polar(1.0, params[0] / 2.0),
            ]),
            U1 => Matrix::diagonal(&[one, Complex64::from_polar(1.0, params[0])]),
            U3 => u3_matrix(params[0], params[1], params[2]),
            CX => controlled_matrix(&X.matrix(&[])?),
            CY => controlled_matrix(&Y.matrix(&[])?),
            CZ => controlled_matrix(&Z.matrix(&[])?),
            CH => controlled_matrix(&H.matrix(&[])?),
            CPhase => controlled_matrix(&U1.matrix(params)?),
            CRz => controlled_matrix(&Rz.matrix(params)?),
            Swap => {
                let mut m = Matrix::identity(4);
                m[(1, 1)] = z;
                m[(2, 2)] = z;
                m[(1, 2)] = one;
                m[(2, 1)] = one;
                m
            }
            Measure | Reset => return None,
        };
        Some(m)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix::from_rows(&[
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ])
}

/// Embeds a 2x2 unitary as the target block of a singly-controlled gate, control first.
fn controlled_matrix(u: &Matrix) -> Matrix {
    let mut m = Matrix::identity(4);
    m[(1, 1)] = u[(0, 0)];
    m[(1, 3)] = u[(0, 1)];
    m[(3, 1)] = u[(1, 0)];
    m[(3, 3)] = u[(1, 1)];
    m
}
