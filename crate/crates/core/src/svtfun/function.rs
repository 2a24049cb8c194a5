use super::OddPolynomial;
use crate::error::{Error, Result};

/// A target singular-value transformation. All variants are odd in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum SvtFunction {
    /// Ideal sign function, the limit of the fixed-point polynomials.
    Sign,
    /// `x/√p*` clamped to `[-1, 1]`.
    LinearAmp {
        p_star: f64,
    },
    /// `x/√p*` below `√p*`, `√p*/x` above.
    TruncInverse {
        p_star: f64,
    },
    /// `x/√p*` below `√p*`, zero above.
    LinearAmpCutoff {
        p_star: f64,
    },
    /// `√p*/x` from `√p*` on, zero below.
    InverseCutoff {
        p_star: f64,
    },
    Polynomial(OddPolynomial),
}

impl SvtFunction {
    pub fn linear_amp(p_star: f64) -> Result<Self> {
        check_p_star(p_star)?;
        Ok(Self::LinearAmp { p_star })
    }

    pub fn trunc_inverse(p_star: f64) -> Result<Self> {
        check_p_star(p_star)?;
        Ok(Self::TruncInverse { p_star })
    }

    pub fn linear_amp_cutoff(p_star: f64) -> Result<Self> {
        check_p_star(p_star)?;
        Ok(Self::LinearAmpCutoff { p_star })
    }

    pub fn inverse_cutoff(p_star: f64) -> Result<Self> {
        check_p_star(p_star)?;
        Ok(Self::InverseCutoff { p_star })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&x) {
            return Err(Error::Domain(format!("SVT argument {x} outside [-1, 1]")));
        }
        Ok(self.eval_unchecked(x.clamp(-1.0, 1.0)))
    }

    /// Evaluation without the domain check, for hot loops over known-valid inputs.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        let a = x.abs();
        let s = x.signum();
        let mag = match self {
            Self::Sign => return if x == 0.0 { 0.0 } else { s },
            Self::Polynomial(p) => return p.eval(x),
            Self::LinearAmp { p_star } => (a / p_star.sqrt()).min(1.0),
            Self::TruncInverse { p_star } => {
                let r = p_star.sqrt();
                if a > r {
                    r / a
                } else {
                    a / r
                }
            }
            Self::LinearAmpCutoff { p_star } => {
                let r = p_star.sqrt();
                if a <= r {
                    a / r
                } else {
                    0.0
                }
            }
            Self::InverseCutoff { p_star } => {
                let r = p_star.sqrt();
                if a >= r && a > 0.0 {
                    r / a
                } else {
                    0.0
                }
            }
        };
        if x == 0.0 {
            0.0
        } else {
            s * mag
        }
    }

    pub fn p_star(&self) -> Option<f64> {
        match self {
            Self::LinearAmp { p_star }
            | Self::TruncInverse { p_star }
            | Self::LinearAmpCutoff { p_star }
            | Self::InverseCutoff { p_star } => Some(*p_star),
            _ => None,
        }
    }
}

fn check_p_star(p_star: f64) -> Result<()> {
    if p_star > 0.0 && p_star <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p* = {p_star} outside (0, 1]")))
    }
}
