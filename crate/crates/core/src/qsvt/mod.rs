//! Quantum singular value transformation: exact SVD oracle and the
//! alternating phase-modulation circuit.

mod circuit;
mod solver;

pub use circuit::{
    alternating_sequence, apply_exact, apply_sequence, exact_block, pi_phi, pi_phi_gadget, run_with_flags,
    sequence_block, FlagOutcome, QsvtRun,
};
pub use solver::{chebyshev_phases, realized_polynomial, reflection_response, solve_phases};

use crate::svtfun::OddPolynomial;
use crate::{Error, Result};

/// Reflection-convention phases `φ_1 … φ_d`, leftmost (output side) first.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    phases: Vec<f64>,
    realized: OddPolynomial,
    residual: f64,
}

impl PhaseSequence {
    /// `residual` is whatever certification the caller performed against its target.
    pub fn new(phases: Vec<f64>, residual: f64) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("non-finite phase".into()));
        }
        let realized = realized_polynomial(&phases)?;
        Ok(Self { phases, realized, residual })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn degree(&self) -> usize {
        self.phases.len()
    }

    /// `Re P̃` as an odd Chebyshev series.
    pub fn realized_polynomial(&self) -> &OddPolynomial {
        &self.realized
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The sequence realizing the complex-conjugate polynomial.
    pub fn negated(&self) -> Self {
        Self { phases: self.phases.iter().map(|p| -p).collect(), ..self.clone() }
    }

    /// Degree, residual, then one phase per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{:.17e}\n", self.degree(), self.residual);
        for p in &self.phases {
            s.push_str(&format!("{p:.17e}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<(usize, f64)> {
            let (line, l) = rows.next().ok_or(Error::Parse { line: 0, msg: format!("missing {what}") })?;
            l.parse::<f64>().map(|v| (line, v)).map_err(|e| Error::Parse { line, msg: format!("{what}: {e}") })
        };
        let (line, d) = next("degree")?;
        if d < 1.0 || d.fract() != 0.0 || (d as usize).is_multiple_of(2) {
            return Err(Error::Parse { line, msg: format!("degree {d} is not a positive odd integer") });
        }
        let (_, residual) = next("residual")?;
        let phases = (0..d as usize).map(|_| next("phase").map(|(_, v)| v)).collect::<Result<Vec<_>>>()?;
        Self::new(phases, residual)
    }
}
