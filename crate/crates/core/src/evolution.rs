//! Time evolution `exp(iHb)`: the exact oracle, first-order Trotter
//! compilation into elementary gates, controlled promotion and gate census.
//!
//! Each term `c P` of a step becomes a block
//!
//! ```text
//! basis change -> CNOT ladder up to the pivot -> Rz(-2 c b / n) -> mirror
//! ```
//!
//! where X is rotated by H, Y by S† then H, and the pivot is the highest
//! qubit in the term's support.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::circuit::{Circuit, Gate, GateKind, Pass, Provenance, Role};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{Pauli, PauliString, PauliSum, DEFAULT_ORACLE_CAP};
use crate::statevector::Statevector;
use num_complex::Complex64;

/// `exp(i b H)` by eigendecomposition. The identity offset is a global
/// phase and is left out.
pub fn exact_unitary(h: &PauliSum, b: f64, cap: usize) -> Result<CMatrix> {
    h.ensure_hermitian()?;
    let m = h.to_dense_matrix(cap)?;
    Ok(linalg::expm_i_hermitian(&m, b))
}

/// First-order product formula for `exp(i b H)` with `n_steps` slices.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    hamiltonian: PauliSum,
    b: f64,
    n_steps: usize,
    term_order: Vec<usize>,
}

impl TrotterPlan {
    /// Plan with the default order: descending |coefficient|, ties broken by
    /// the axes label.
    pub fn new(hamiltonian: &PauliSum, b: f64, n_steps: usize) -> Result<Self> {
        let h = hamiltonian.combine();
        let n = h.n_qubits();
        let mut order: Vec<usize> = (0..h.len()).collect();
        order.sort_by(|&i, &j| {
            let (pi, ci) = h.terms()[i];
            let (pj, cj) = h.terms()[j];
            cj.norm()
                .total_cmp(&ci.norm())
                .then_with(|| pi.cmp_label(&pj, n))
        });
        TrotterPlan::with_order(h, b, n_steps, order)
    }

    /// Plan with an explicit ordering of `hamiltonian.terms()`.
    pub fn with_order(
        hamiltonian: PauliSum,
        b: f64,
        n_steps: usize,
        term_order: Vec<usize>,
    ) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("Trotter plan needs at least one step"));
        }
        if !b.is_finite() {
            return Err(Error::invalid("scale factor must be finite"));
        }
        let mut seen = vec![false; hamiltonian.len()];
        if term_order.len() != hamiltonian.len() {
            return Err(Error::invalid("term order is not a permutation of the terms"));
        }
        for &i in &term_order {
            if i >= seen.len() || seen[i] {
                return Err(Error::invalid("term order is not a permutation of the terms"));
            }
            seen[i] = true;
        }
        Ok(TrotterPlan {
            hamiltonian,
            b,
            n_steps,
            term_order,
        })
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn term_order(&self) -> &[usize] {
        &self.term_order
    }

    /// Same plan with the scale factor multiplied by `factor` (used for the
    /// rescaled-angle `U^(2^k)` fast path).
    pub fn rescaled(&self, factor: f64) -> TrotterPlan {
        TrotterPlan {
            b: self.b * factor,
            ..self.clone()
        }
    }
}

/// Gates for `exp(i theta P)`, tagged with `pass`. Empty for the identity.
pub fn pauli_rotation(p: &PauliString, theta: f64, pass: Pass) -> Vec<Gate> {
    let support = p.support();
    let Some(&pivot) = support.last() else {
        return Vec::new();
    };
    let frame = Provenance::new(pass, Role::Frame);
    let mut basis_in = Vec::new();
    for &q in &support {
        match p.get(q) {
            Pauli::X => basis_in.push(Gate::single(GateKind::H, q).tagged(frame)),
            Pauli::Y => {
                basis_in.push(Gate::single(GateKind::Sdg, q).tagged(frame));
                basis_in.push(Gate::single(GateKind::H, q).tagged(frame));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support
        .windows(2)
        .map(|w| Gate::cnot(w[0], w[1]).tagged(frame))
        .collect();

    let mut gates = basis_in.clone();
    gates.extend(ladder.iter().cloned());
    gates.push(
        Gate::single(GateKind::Rz(-2.0 * theta), pivot).tagged(Provenance::new(pass, Role::Core)),
    );
    gates.extend(ladder.iter().rev().cloned());
    gates.extend(basis_in.iter().rev().map(Gate::inverse));
    gates
}

/// CNOTs in one uncontrolled rotation block for a term of weight `w`.
pub fn ladder_cnots(weight: usize) -> usize {
    2 * weight.saturating_sub(1)
}

/// Compiles the plan into a circuit on the Hamiltonian's register.
pub fn compile_trotter(plan: &TrotterPlan) -> Result<Circuit> {
    compile_trotter_tagged(plan, Pass::Trotter)
}

pub(crate) fn compile_trotter_tagged(plan: &TrotterPlan, pass: Pass) -> Result<Circuit> {
    let h = &plan.hamiltonian;
    h.ensure_hermitian()?;
    if h.terms().iter().any(|(p, _)| p.is_identity()) {
        return Err(Error::invalid(
            "identity term present; subtract it before compiling",
        ));
    }
    let mut circuit = Circuit::new(h.n_qubits());
    let dt = plan.b / plan.n_steps as f64;
    for _ in 0..plan.n_steps {
        for &i in &plan.term_order {
            let (p, c) = h.terms()[i];
            for g in pauli_rotation(&p, c.re * dt, pass) {
                circuit.push(g)?;
            }
        }
    }
    Ok(circuit)
}

/// Dense matrix of the compiled Trotter circuit.
pub fn trotter_unitary(plan: &TrotterPlan, cap: usize) -> Result<CMatrix> {
    compile_trotter(plan)?.to_matrix(cap)
}

/// Promotes every gate of `circuit` to its version controlled by `control`.
///
/// Frame gates (see [`Role::Frame`]) are left alone because they cancel in
/// pairs when the control is off; every other gate gains the control. The
/// output register is wide enough to hold `control`.
pub fn controlled(circuit: &Circuit, control: usize) -> Result<Circuit> {
    if circuit.gates().iter().any(|g| g.qubits().any(|q| q == control)) {
        return Err(Error::invalid(format!(
            "control qubit {control} is used by the circuit"
        )));
    }
    let mut out = Circuit::new(circuit.n_qubits().max(control + 1));
    for g in circuit.gates() {
        let mut g2 = g.clone();
        if g.provenance.role != Role::Frame {
            g2.controls.push(control);
        }
        out.push(g2)?;
    }
    Ok(out)
}

/// Gate census keyed by [`Gate::name`] (`cx` is a CNOT).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateCensus {
    pub counts: BTreeMap<String, usize>,
}

impl GateCensus {
    pub fn get(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// CNOT count after lowering controlled gates with the standard
    /// decompositions, or `None` if the circuit holds gates with no fixed
    /// lowering (dense unitaries, more than two controls).
    pub fn cnot_equivalent(&self) -> Option<u64> {
        let mut total = 0u64;
        for (name, &n) in &self.counts {
            total += cnot_cost(name)? * n as u64;
        }
        Some(total)
    }
}

fn cnot_cost(name: &str) -> Option<u64> {
    Some(match name {
        "h" | "x" | "y" | "z" | "s" | "sdg" | "rz" | "ry" | "p" => 0,
        "cx" | "cy" | "cz" | "ch" => 1,
        "crz" | "cry" | "cp" | "cs" | "csdg" => 2,
        "swap" => 3,
        "ccx" | "ccz" => 6,
        "cswap" => 8,
        _ => return None,
    })
}

pub fn count_gates(circuit: &Circuit) -> GateCensus {
    let mut counts = BTreeMap::new();
    for g in circuit.gates() {
        *counts.entry(g.name()).or_insert(0) += 1;
    }
    GateCensus { counts }
}

/// Predicted CNOTs of `compile_trotter` for `plan`: `n_steps` times the sum
/// of per-term ladder costs.
pub fn predicted_trotter_cnots(plan: &TrotterPlan) -> usize {
    let per_step: usize = plan
        .hamiltonian
        .terms()
        .iter()
        .map(|(p, _)| ladder_cnots(p.weight()))
        .sum();
    plan.n_steps * per_step
}

/// CNOT-equivalent cost of one controlled Trotter step of `h` (the `n_U`
/// of the QPE cost law).
pub fn controlled_step_cnots(h: &PauliSum) -> Result<u64> {
    let plan = TrotterPlan::new(h, 1.0, 1)?;
    let step = compile_trotter(&plan)?;
    let c = controlled(&step, h.n_qubits())?;
    count_gates(&c)
        .cnot_equivalent()
        .ok_or_else(|| Error::Numeric("controlled step has unlowerable gates".into()))
}

/// Wraps a dense unitary as a gate on `targets` (target 0 low-order).
pub fn unitary_gate(m: CMatrix, targets: Vec<usize>, pass: Pass) -> Gate {
    Gate::new(GateKind::Unitary(Arc::new(m)), targets).tagged(Provenance::new(pass, Role::Plain))
}

/// `|⟨e^{iHb} ψ0 | U_trot(n) ψ0⟩|` with the default term order.
pub fn trotter_fidelity(h: &PauliSum, b: f64, n_steps: usize, psi0: &Statevector) -> Result<f64> {
    let hs = h.subtract_identity();
    let plan = TrotterPlan::new(&hs, b, n_steps)?;
    let mut trot = psi0.clone();
    trot.apply(&compile_trotter(&plan)?)?;
    let u = exact_unitary(&hs, b, DEFAULT_ORACLE_CAP)?;
    let v = u * crate::linalg::CVector::from_column_slice(psi0.amplitudes());
    let ov: Complex64 = v.iter().zip(trot.amplitudes()).map(|(a, b)| a.conj() * b).sum();
    Ok(ov.norm())
}
