//! Gate-level circuits and their statevector kernels.
//!
//! Every gate may carry any number of control qubits, so a CNOT is an `X`
//! with one control and a controlled phase is a `Phase` with one control.
//! Each gate also records which compilation pass emitted it and its role in
//! that pass (see [`Role`]).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::numfmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz(f64),
    /// `exp(-iθY/2)`
    Ry(f64),
    /// `diag(1, e^{iθ})`
    Phase(f64),
    Swap,
    /// Dense unitary on the gate's targets (target 0 is the low-order bit).
    Unitary(Arc<CMatrix>),
}

impl GateKind {
    pub fn base_name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Rz(_) => "rz",
            GateKind::Ry(_) => "ry",
            GateKind::Phase(_) => "p",
            GateKind::Swap => "swap",
            GateKind::Unitary(_) => "unitary",
        }
    }

    fn n_targets(&self) -> Option<usize> {
        match self {
            GateKind::Swap => Some(2),
            GateKind::Unitary(_) => None,
            _ => Some(1),
        }
    }

    /// 2x2 matrix of a single-qubit kind, row-major.
    fn matrix2(&self) -> Option<[Complex64; 4]> {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Some(match *self {
            GateKind::H => [o * r, o * r, o * r, -o * r],
            GateKind::X => [z, o, o, z],
            GateKind::Y => [z, -i, i, z],
            GateKind::Z => [o, z, z, -o],
            GateKind::S => [o, z, z, i],
            GateKind::Sdg => [o, z, z, -i],
            GateKind::Rz(t) => [
                Complex64::from_polar(1.0, -t / 2.0),
                z,
                z,
                Complex64::from_polar(1.0, t / 2.0),
            ],
            GateKind::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [o * c, -o * s, o * s, o * c]
            }
            GateKind::Phase(t) => [o, z, z, Complex64::from_polar(1.0, t)],
            GateKind::Swap | GateKind::Unitary(_) => return None,
        })
    }

    fn inverse(&self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Unitary(m) => GateKind::Unitary(Arc::new(m.adjoint())),
            k => k.clone(),
        }
    }
}

/// Compilation pass that emitted a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    User,
    Trotter,
    ExactUnitary,
    QpeAncilla,
    InverseQft,
    Initialize,
    Ansatz,
}

impl Pass {
    pub fn name(self) -> &'static str {
        match self {
            Pass::User => "user",
            Pass::Trotter => "trotter",
            Pass::ExactUnitary => "exact",
            Pass::QpeAncilla => "qpe-ancilla",
            Pass::InverseQft => "iqft",
            Pass::Initialize => "initialize",
            Pass::Ansatz => "ansatz",
        }
    }
}

/// Role of a gate inside its pass.
///
/// `Frame` gates are basis changes and parity ladders that appear in
/// mirrored compute/uncompute pairs around a `Core` rotation. Controlling
/// the core alone controls the whole block, which is what
/// [`crate::evolution::controlled`] relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Plain,
    Frame,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub pass: Pass,
    pub role: Role,
}

impl Provenance {
    pub const USER: Provenance = Provenance {
        pass: Pass::User,
        role: Role::Plain,
    };

    pub fn new(pass: Pass, role: Role) -> Self {
        Provenance { pass, role }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::Plain => "",
            Role::Frame => ":frame",
            Role::Core => ":core",
        };
        write!(f, "{}{}", self.pass.name(), role)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
    pub provenance: Provenance,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Gate {
            kind,
            targets,
            controls: Vec::new(),
            provenance: Provenance::USER,
        }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, vec![q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::single(GateKind::X, target).with_controls(vec![control])
    }

    pub fn with_controls(mut self, controls: Vec<usize>) -> Self {
        self.controls = controls;
        self
    }

    pub fn tagged(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Census name: one `c` per control followed by the base name
    /// (`cx` is a CNOT, `ccx` a Toffoli).
    pub fn name(&self) -> String {
        let mut s = "c".repeat(self.controls.len());
        s.push_str(self.kind.base_name());
        s
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            provenance: self.provenance,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Some(k) = self.kind.n_targets() {
            if self.targets.len() != k {
                return Err(Error::invalid(format!(
                    "{} expects {k} targets, got {}",
                    self.name(),
                    self.targets.len()
                )));
            }
        }
        if let GateKind::Unitary(m) = &self.kind {
            let dim = 1usize << self.targets.len();
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::invalid("unitary dimension does not match targets"));
            }
        }
        let mut seen = 0u64;
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::invalid(format!(
                    "gate {} uses qubit {q} on a {n_qubits}-qubit register",
                    self.name()
                )));
            }
            if seen >> q & 1 == 1 {
                return Err(Error::invalid(format!(
                    "gate {} uses qubit {q} twice",
                    self.name()
                )));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    /// Applies the gate in place to a `2^n` amplitude vector.
    pub(crate) fn apply_to(&self, amps: &mut [Complex64]) {
        let cmask: usize = self.controls.iter().map(|&c| 1usize << c).sum();
        match &self.kind {
            GateKind::Swap => {
                let (a, b) = (1usize << self.targets[0], 1usize << self.targets[1]);
                for i in 0..amps.len() {
                    if i & cmask == cmask && i & a != 0 && i & b == 0 {
                        amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            GateKind::Unitary(m) => apply_dense(amps, m, &self.targets, cmask),
            kind => {
                let m = kind.matrix2().expect("single-qubit gate");
                let t = 1usize << self.targets[0];
                for i in 0..amps.len() {
                    if i & t == 0 && i & cmask == cmask {
                        let (a0, a1) = (amps[i], amps[i | t]);
                        amps[i] = m[0] * a0 + m[1] * a1;
                        amps[i | t] = m[2] * a0 + m[3] * a1;
                    }
                }
            }
        }
    }
}

fn apply_dense(amps: &mut [Complex64], m: &CMatrix, targets: &[usize], cmask: usize) {
    let k = targets.len();
    let dim = 1usize << k;
    let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            (0..k)
                .filter(|&j| local >> j & 1 == 1)
                .map(|j| 1usize << targets[j])
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cmask {
            continue;
        }
        for (slot, off) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base | off];
        }
        for r in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in buf.iter().enumerate() {
                acc += m[(r, c)] * v;
            }
            amps[base | offsets[r]] = acc;
        }
    }
}

/// An ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Same gates on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        if n_qubits < self.n_qubits {
            return Err(Error::invalid("cannot narrow a circuit"));
        }
        Ok(Circuit {
            n_qubits,
            gates: self.gates.clone(),
        })
    }

    /// Qubit `q` of `self` becomes qubit `map[q]` of a register of size `n_qubits`.
    pub fn remapped(&self, map: &[usize], n_qubits: usize) -> Result<Circuit> {
        if map.len() < self.n_qubits {
            return Err(Error::invalid("qubit map shorter than register"));
        }
        let mut out = Circuit::new(n_qubits);
        for g in &self.gates {
            let mut g2 = g.clone();
            g2.targets = g.targets.iter().map(|&q| map[q]).collect();
            g2.controls = g.controls.iter().map(|&q| map[q]).collect();
            out.push(g2)?;
        }
        Ok(out)
    }

    /// The adjoint circuit.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.push(Gate::single(GateKind::H, q))
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.push(Gate::single(GateKind::X, q))
    }

    pub fn y(&mut self, q: usize) -> Result<()> {
        self.push(Gate::single(GateKind::Y, q))
    }

    pub fn z(&mut self, q: usize) -> Result<()> {
        self.push(Gate::single(GateKind::Z, q))
    }

    pub fn rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.push(Gate::single(GateKind::Rz(theta), q))
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.push(Gate::single(GateKind::Ry(theta), q))
    }

    pub fn phase(&mut self, q: usize, theta: f64) -> Result<()> {
        self.push(Gate::single(GateKind::Phase(theta), q))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::invalid("control equals target"));
        }
        self.push(Gate::cnot(control, target))
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.push(Gate::new(GateKind::Swap, vec![a, b]))
    }

    /// Dense unitary matrix of the whole circuit (column `j` is the image of
    /// basis state `j`).
    pub fn to_matrix(&self, cap: usize) -> Result<CMatrix> {
        if self.n_qubits > cap {
            return Err(Error::SizeCap {
                what: "circuit matrix",
                requested: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            for g in &self.gates {
                g.apply_to(&mut col);
            }
            for (i, a) in col.iter().enumerate() {
                m[(i, j)] = *a;
            }
        }
        Ok(m)
    }

    /// Line-oriented dump: `name qubits [params] // provenance`, controls
    /// listed before targets.
    pub fn dump(&self) -> String {
        let mut out = format!("# fragprep circuit v1, {} qubits\n", self.n_qubits);
        for g in &self.gates {
            let qubits: Vec<String> = g.qubits().map(|q| q.to_string()).collect();
            let param = match &g.kind {
                GateKind::Rz(t) | GateKind::Ry(t) | GateKind::Phase(t) => {
                    format!(" {}", numfmt::sig(*t))
                }
                GateKind::Unitary(m) => format!(" [{}x{}]", m.nrows(), m.ncols()),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{} {}{} // {}\n",
                g.name(),
                qubits.join(","),
                param,
                g.provenance
            ));
        }
        out
    }
}
