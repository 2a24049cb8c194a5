use crate::linalg::{apply_local_cols, c, identity, unitarity_defect, Mat, Rng};
use crate::{tol, Error, Result};

/// A unitary on one or two named qubits (listed in the gate's own index order).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub qubits: Vec<usize>,
    pub matrix: Mat,
}

/// A forced projective measurement taken after the first `time` gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub time: usize,
    pub qubit: usize,
    pub outcome: u8,
}

/// Qubit circuit with mid-circuit measurements whose outcomes are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measurements: Vec<Measurement>,
}

pub(crate) enum Step<'a> {
    Gate(&'a Gate),
    /// Index of the measurement and the measurement itself.
    Measure(usize, &'a Measurement),
}

impl HybridCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), measurements: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Measurements in time order.
    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn n_meas(&self) -> usize {
        self.measurements.len()
    }

    pub fn push_gate(&mut self, qubits: &[usize], matrix: Mat) -> Result<()> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(Error::Dimension(format!("gate on {} qubits", qubits.len())));
        }
        if qubits.iter().any(|&q| q >= self.n_qubits) || (qubits.len() == 2 && qubits[0] == qubits[1]) {
            return Err(Error::Dimension(format!("bad gate qubits {qubits:?}")));
        }
        let d = 1 << qubits.len();
        if matrix.shape() != (d, d) {
            return Err(Error::Dimension(format!("gate matrix {:?} for {} qubits", matrix.shape(), qubits.len())));
        }
        if unitarity_defect(&matrix) > tol::STRUCTURAL {
            return Err(Error::Domain("gate is not unitary".into()));
        }
        self.gates.push(Gate { qubits: qubits.to_vec(), matrix });
        Ok(())
    }

    /// Adds a measurement after the gates pushed so far.
    pub fn measure(&mut self, qubit: usize, outcome: u8) -> Result<()> {
        self.insert_measurement(Measurement { time: self.gates.len(), qubit, outcome })
    }

    fn insert_measurement(&mut self, m: Measurement) -> Result<()> {
        if m.qubit >= self.n_qubits || m.outcome > 1 {
            return Err(Error::Domain(format!("bad measurement {m:?}")));
        }
        let pos = self.measurements.partition_point(|x| x.time <= m.time);
        self.measurements.insert(pos, m);
        Ok(())
    }

    pub(crate) fn steps(&self) -> impl Iterator<Item = Step<'_>> {
        let mut out = Vec::with_capacity(self.gates.len() + self.measurements.len());
        let mut mi = 0;
        for t in 0..=self.gates.len() {
            while mi < self.measurements.len() && self.measurements[mi].time == t {
                out.push(Step::Measure(mi, &self.measurements[mi]));
                mi += 1;
            }
            if t < self.gates.len() {
                out.push(Step::Gate(&self.gates[t]));
            }
        }
        out.into_iter()
    }

    /// The unnormalized post-selected map `P_N G … P_1 G …` on the system.
    pub fn kraus_operator(&self) -> Result<Mat> {
        if self.n_qubits > 12 {
            return Err(Error::Resource(format!("{} qubits", self.n_qubits)));
        }
        let dims = vec![2; self.n_qubits];
        let mut k = identity(1 << self.n_qubits);
        for step in self.steps() {
            match step {
                Step::Gate(g) => apply_local_cols(&mut k, &g.matrix, &g.qubits, &dims),
                Step::Measure(_, m) => {
                    let shift = self.n_qubits - 1 - m.qubit;
                    for i in 0..k.nrows() {
                        if ((i >> shift) & 1) as u8 != m.outcome {
                            k.row_mut(i).fill(crate::linalg::ZERO);
                        }
                    }
                }
            }
        }
        Ok(k)
    }

    /// Brickwork of Haar two-qubit gates with `n_meas` forced measurements
    /// spread over the layers at random qubits and outcomes.
    pub fn random_brickwork(n_qubits: usize, layers: usize, n_meas: usize, rng: &mut Rng) -> Result<Self> {
        use rand::Rng as _;
        if n_qubits < 2 {
            return Err(Error::Dimension("brickwork needs at least two qubits".into()));
        }
        let mut circ = Self::new(n_qubits);
        let mut placed = 0;
        for layer in 0..layers.max(1) {
            let mut q = layer % 2;
            while q + 1 < n_qubits {
                circ.push_gate(&[q, q + 1], crate::linalg::haar_unitary(4, rng))?;
                q += 2;
            }
            let due = (n_meas * (layer + 1)) / layers.max(1);
            while placed < due {
                circ.measure(rng.gen_range(0..n_qubits), rng.gen_range(0..2))?;
                placed += 1;
            }
        }
        Ok(circ)
    }

    /// Line format:
    ///
    /// ```text
    /// QUBITS n
    /// GATE q_i q_j <16 entries>     (or GATE q <4 entries>)
    /// MEAS t q m
    /// ```
    ///
    /// Matrix entries are `re,im` tokens in row-major order. `MEAS t` fires
    /// after the first `t` gates. `#` starts a comment line.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.n_qubits);
        for step in self.steps() {
            match step {
                Step::Gate(g) => {
                    out.push_str("GATE");
                    for q in &g.qubits {
                        out.push_str(&format!(" {q}"));
                    }
                    for r in 0..g.matrix.nrows() {
                        for col in 0..g.matrix.ncols() {
                            let z = g.matrix[(r, col)];
                            out.push_str(&format!(" {:e},{:e}", z.re, z.im));
                        }
                    }
                    out.push('\n');
                }
                Step::Measure(_, m) => out.push_str(&format!("MEAS {} {} {}\n", m.time, m.qubit, m.outcome)),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut circ: Option<Self> = None;
        let mut pending = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let perr = |msg: String| Error::Parse { line, msg };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|e| perr(format!("{s}: {e}")));
            match toks[0] {
                "QUBITS" if circ.is_none() && toks.len() == 2 => circ = Some(Self::new(int(toks[1])?)),
                "GATE" => {
                    let c0 = circ.as_mut().ok_or_else(|| perr("GATE before QUBITS".into()))?;
                    let (nq, d) = match toks.len() {
                        6 => (1, 2),
                        19 => (2, 4),
                        n => return Err(perr(format!("GATE line has {n} tokens"))),
                    };
                    let qubits = toks[1..=nq].iter().map(|t| int(t)).collect::<Result<Vec<_>>>()?;
                    let mut m = Mat::zeros(d, d);
                    for (k, t) in toks[1 + nq..].iter().enumerate() {
                        let (re, im) = t.split_once(',').ok_or_else(|| perr(format!("entry {t}")))?;
                        let re: f64 = re.parse().map_err(|e| perr(format!("{re}: {e}")))?;
                        let im: f64 = im.parse().map_err(|e| perr(format!("{im}: {e}")))?;
                        m[(k / d, k % d)] = c(re, im);
                    }
                    c0.push_gate(&qubits, m).map_err(|e| perr(e.to_string()))?;
                }
                "MEAS" if toks.len() == 4 => {
                    if circ.is_none() {
                        return Err(perr("MEAS before QUBITS".into()));
                    }
                    let outcome = int(toks[3])?;
                    if outcome > 1 {
                        return Err(perr(format!("outcome {outcome}")));
                    }
                    pending.push((
                        line,
                        Measurement { time: int(toks[1])?, qubit: int(toks[2])?, outcome: outcome as u8 },
                    ));
                }
                _ => return Err(perr(format!("unrecognized line `{l}`"))),
            }
        }
        let mut circ = circ.ok_or(Error::Parse { line: 0, msg: "missing QUBITS header".into() })?;
        for (line, m) in pending {
            if m.time > circ.gates.len() {
                return Err(Error::Parse { line, msg: format!("time {} after last gate", m.time) });
            }
            circ.insert_measurement(m).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        }
        Ok(circ)
    }
}
