//! Coupled-fragment VQE: a UCC-style ansatz over the whole active space on
//! top of a fragment-product reference prepared by QPE, by direct
//! initialization, or as a Hartree-Fock determinant.
//!
//! Each generator `G = T - T†` (single `T = a†_a a_i` or double
//! `T = a†_a a†_b a_j a_i`) maps under Jordan-Wigner to `i Σ_k c_k P_k` with
//! real `c_k` and mutually commuting strings, so `exp(θ G)` is an exact
//! product of Pauli rotations `exp(i θ c_k P_k)`.
//!
//! The optimizer is an adaptive Nelder-Mead simplex. Every energy
//! evaluation calls the preparation closure afresh, so QPE preparation
//! re-samples its ancilla readout per evaluation unless caching is enabled.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Pass};
use crate::direct_init::compile_initializer;
use crate::error::{Error, Result};
use crate::evolution::pauli_rotation;
use crate::fermion::{
    build_effective_hamiltonian, ground_state_in_sector, jordan_wigner, parse_fcidump,
    FermionIntegrals, FermionTerm, FragmentSpec, LadderOp,
};
use crate::numfmt::sig;
use crate::pauli::{PauliString, PauliSum};
use crate::qpe::{
    ground_state_target, prepare_from, simulate_qpe, InitialState, QpeConfig, QpeState,
    UnitaryMode,
};
use crate::rng::{derive_seed, seeded};
use crate::statevector::Statevector;
use crate::toys::{embed_fragments, h2_dimer_fragments, h2_dimer_integrals};

/// Creation and annihilation indices of one excitation `a†.. a..`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Excitation {
    /// `[a]` or `[a, b]` with `a < b`.
    pub to: Vec<usize>,
    /// `[i]` or `[i, j]` with `i < j`.
    pub from: Vec<usize>,
}

impl Excitation {
    /// `T = a†_a a†_b a_j a_i` (or `a†_a a_i`).
    fn operator(&self) -> FermionTerm {
        let mut ops: Vec<LadderOp> = self.to.iter().map(|&p| LadderOp::create(p)).collect();
        ops.extend(self.from.iter().rev().map(|&p| LadderOp::annihilate(p)));
        FermionTerm::new(1.0, ops)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub excitations: Vec<Excitation>,
    /// JW image of each `T - T†`; coefficients purely imaginary.
    pub generators: Vec<PauliSum>,
    /// Set when the excitation set is empty.
    pub warning: Option<String>,
}

impl AnsatzSpec {
    pub fn n_parameters(&self) -> usize {
        self.generators.len()
    }

    pub fn n_singles(&self) -> usize {
        self.excitations.iter().filter(|e| e.to.len() == 1).count()
    }

    pub fn n_doubles(&self) -> usize {
        self.excitations.iter().filter(|e| e.to.len() == 2).count()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.generators.len() {
            return Err(Error::SizeMismatch {
                expected: self.generators.len(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// Appends `exp(θ_k G_k)` for every generator to `state`, in order.
    pub fn apply(&self, state: &mut Statevector, theta: &[f64]) -> Result<()> {
        self.check_theta(theta)?;
        for (g, &t) in self.generators.iter().zip(theta) {
            if t == 0.0 {
                continue;
            }
            for (p, c) in g.terms() {
                state.apply_pauli_rotation(p, t * c.im)?;
            }
        }
        Ok(())
    }
}

/// Options for [`build_ucc_ansatz_with`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnsatzOptions {
    /// All spin-conserving index pairs instead of occupied→virtual only.
    pub generalized: bool,
    /// Spin label of each qubit; defaults to `q % 2`.
    pub spins: Option<Vec<u8>>,
}

/// Occupied→virtual spin-conserving singles and doubles.
pub fn build_ucc_ansatz(n_spin_orbitals: usize, reference_occupation: u64) -> Result<AnsatzSpec> {
    build_ucc_ansatz_with(n_spin_orbitals, reference_occupation, &AnsatzOptions::default())
}

/// Ordering: singles before doubles, each lexicographic in `(from, to)`.
/// In generalized mode every pair `p > q` gives a single and every pair of
/// pairs `(a,b) > (i,j)` gives a double, irrespective of occupation.
pub fn build_ucc_ansatz_with(
    n_spin_orbitals: usize,
    reference_occupation: u64,
    opts: &AnsatzOptions,
) -> Result<AnsatzSpec> {
    let n = n_spin_orbitals;
    if n == 0 || n > 64 {
        return Err(Error::invalid(format!("{n} spin orbitals is outside 1..=64")));
    }
    if n < 64 && reference_occupation >> n != 0 {
        return Err(Error::invalid(format!(
            "occupation {reference_occupation:#b} does not fit in {n} spin orbitals"
        )));
    }
    let spins: Vec<u8> = match &opts.spins {
        Some(s) if s.len() != n => {
            return Err(Error::SizeMismatch {
                expected: n,
                found: s.len(),
            })
        }
        Some(s) => s.clone(),
        None => (0..n).map(|q| (q % 2) as u8).collect(),
    };
    let occ: Vec<usize> = (0..n).filter(|&q| reference_occupation >> q & 1 == 1).collect();
    let virt: Vec<usize> = (0..n).filter(|&q| reference_occupation >> q & 1 == 0).collect();
    let all: Vec<usize> = (0..n).collect();

    let mut excitations = Vec::new();
    if opts.generalized {
        for &i in &all {
            for &a in &all {
                if a > i && spins[a] == spins[i] {
                    excitations.push(Excitation { to: vec![a], from: vec![i] });
                }
            }
        }
    } else {
        for &i in &occ {
            for &a in &virt {
                if spins[a] == spins[i] {
                    excitations.push(Excitation { to: vec![a], from: vec![i] });
                }
            }
        }
    }
    let pairs = |set: &[usize]| -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (x, &p) in set.iter().enumerate() {
            for &q in &set[x + 1..] {
                v.push((p, q));
            }
        }
        v
    };
    let spin_match = |(i, j): (usize, usize), (a, b): (usize, usize)| {
        let mut s1 = [spins[i], spins[j]];
        let mut s2 = [spins[a], spins[b]];
        s1.sort_unstable();
        s2.sort_unstable();
        s1 == s2
    };
    let (from_pairs, to_pairs) = if opts.generalized {
        (pairs(&all), pairs(&all))
    } else {
        (pairs(&occ), pairs(&virt))
    };
    for &ij in &from_pairs {
        for &ab in &to_pairs {
            if opts.generalized && ab <= ij {
                continue;
            }
            if spin_match(ij, ab) {
                excitations.push(Excitation {
                    to: vec![ab.0, ab.1],
                    from: vec![ij.0, ij.1],
                });
            }
        }
    }

    let mut generators = Vec::with_capacity(excitations.len());
    for e in &excitations {
        let t = e.operator();
        let mut td = t.adjoint();
        td.coeff = -td.coeff;
        generators.push(jordan_wigner(&[t, td], n)?);
    }
    let warning = excitations.is_empty().then(|| {
        "reference has no allowed excitations; the ansatz is the identity".to_string()
    });
    Ok(AnsatzSpec {
        n_qubits: n,
        excitations,
        generators,
        warning,
    })
}

/// `∏_k exp(θ_k G_k)` as gates, each generator split into `n_trotter`
/// identical slices (exact for any slice count since its strings commute).
pub fn ansatz_circuit(spec: &AnsatzSpec, theta: &[f64], n_trotter: usize) -> Result<Circuit> {
    spec.check_theta(theta)?;
    let slices = n_trotter.max(1);
    let mut c = Circuit::new(spec.n_qubits);
    for (g, &t) in spec.generators.iter().zip(theta) {
        for _ in 0..slices {
            for (p, coeff) in g.terms() {
                for gate in pauli_rotation(p, t * coeff.im / slices as f64, Pass::Ansatz) {
                    c.push(gate)?;
                }
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    /// Converged when the simplex energy spread drops below this (Hartree).
    pub tol: f64,
    /// Initial simplex edge length (radians).
    pub initial_step: f64,
    /// Restarts allowed when the simplex collapses before converging.
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evals: 5000,
            tol: 1e-8,
            initial_step: 0.1,
            max_restarts: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Qpe,
    Di,
    Hf,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Qpe => "qpe",
            Scheme::Di => "di",
            Scheme::Hf => "hf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VqeRun {
    pub scheme: Option<Scheme>,
    /// `(evaluation index, energy)` for every evaluation, starting at 0.
    pub trace: Vec<(usize, f64)>,
    pub final_energy: f64,
    pub n_function_evals: usize,
    pub theta_final: Vec<f64>,
    pub converged: bool,
    pub restarts: usize,
    /// Energy at θ = 0 (first evaluation).
    pub zeroth_energy: f64,
}

impl VqeRun {
    pub fn trace_csv(&self) -> String {
        let mut out = format!(
            "# fragprep vqe-trace v1 scheme={}\neval,energy\n",
            self.scheme.map(Scheme::name).unwrap_or("custom")
        );
        for (k, e) in &self.trace {
            out.push_str(&format!("{k},{}\n", sig(*e)));
        }
        out
    }
}

/// Adaptive Nelder-Mead (dimension-dependent coefficients) minimizing `f`
/// from `x0`. Every call of `f` is one function evaluation.
struct NelderMead<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> Result<f64>,
    cfg: OptimizerConfig,
    evals: usize,
    best: (f64, Vec<f64>),
}

impl NelderMead<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x)?;
        self.evals += 1;
        if v < self.best.0 {
            self.best = (v, x.to_vec());
        }
        Ok(v)
    }

    fn budget_left(&self) -> bool {
        self.evals < self.cfg.max_evals
    }

    /// Returns `(converged, collapsed)`.
    fn run_simplex(&mut self, x0: &[f64], f0: Option<f64>, rng: &mut crate::rng::Rng) -> Result<(bool, bool)> {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
        let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
        let f0 = match f0 {
            Some(v) => v,
            None => self.eval(x0)?,
        };
        simplex.push((f0, x0.to_vec()));
        for i in 0..n {
            if !self.budget_left() {
                return Ok((false, false));
            }
            let mut x = x0.to_vec();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            x[i] += sign * self.cfg.initial_step * (0.75 + 0.5 * rng.random::<f64>());
            let v = self.eval(&x)?;
            simplex.push((v, x));
        }
        loop {
            simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
            let spread = simplex[n].0 - simplex[0].0;
            if spread < self.cfg.tol {
                return Ok((true, false));
            }
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(_, x)| x.iter().zip(&simplex[0].1).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter < 1e-12 {
                return Ok((false, true));
            }
            if !self.budget_left() {
                return Ok((false, false));
            }
            let mut c = vec![0.0; n];
            for (_, x) in &simplex[..n] {
                for (ci, xi) in c.iter_mut().zip(x) {
                    *ci += xi / nf;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                c.iter().zip(&worst.1).map(|(ci, wi)| ci + t * (ci - wi)).collect()
            };
            let xr = along(alpha);
            let fr = self.eval(&xr)?;
            if fr < simplex[0].0 {
                if !self.budget_left() {
                    simplex[n] = (fr, xr);
                    continue;
                }
                let xe = along(alpha * beta);
                let fe = self.eval(&xe)?;
                simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
                continue;
            }
            if fr < simplex[n - 1].0 {
                simplex[n] = (fr, xr);
                continue;
            }
            if !self.budget_left() {
                continue;
            }
            let (xc, fc, accept) = if fr < worst.0 {
                let xc = along(alpha * gamma);
                let fc = self.eval(&xc)?;
                (xc, fc, fc <= fr)
            } else {
                let xc = along(-gamma);
                let fc = self.eval(&xc)?;
                (xc, fc, fc < worst.0)
            };
            if accept {
                simplex[n] = (fc, xc);
                continue;
            }
            let x_best = simplex[0].1.clone();
            for v in simplex.iter_mut().skip(1) {
                if !self.budget_left() {
                    break;
                }
                let x: Vec<f64> = x_best.iter().zip(&v.1).map(|(b, xi)| b + delta * (xi - b)).collect();
                let fv = self.eval(&x)?;
                *v = (fv, x);
            }
        }
    }
}

/// Minimizes `E(θ) = <prep(k)| U(θ)† H U(θ) |prep(k)>` from `θ = 0`, where
/// `k` is the evaluation index.
pub fn run_vqe(
    h: &PauliSum,
    prep: &mut dyn FnMut(usize) -> Result<Statevector>,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
) -> Result<VqeRun> {
    if h.n_qubits() != spec.n_qubits {
        return Err(Error::SizeMismatch {
            expected: spec.n_qubits,
            found: h.n_qubits(),
        });
    }
    if cfg.max_evals == 0 {
        return Err(Error::invalid("optimizer needs at least one evaluation"));
    }
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut energy = |theta: &[f64]| -> Result<f64> {
        let k = trace.len();
        let mut psi = prep(k)?;
        spec.apply(&mut psi, theta)?;
        let e = psi.expectation(h)?;
        trace.push((k, e));
        Ok(e)
    };
    let n = spec.n_parameters();
    let theta0 = vec![0.0; n];
    let mut rng = seeded(derive_seed(cfg.seed, 0x5eed));
    let (converged, restarts, theta_final) = {
        let mut nm = NelderMead {
            f: &mut energy,
            cfg: *cfg,
            evals: 0,
            best: (f64::INFINITY, theta0.clone()),
        };
        if n == 0 {
            nm.eval(&theta0)?;
            (true, 0, theta0)
        } else {
            let (mut conv, mut collapsed) = nm.run_simplex(&theta0, None, &mut rng)?;
            let mut restarts = 0;
            while collapsed && restarts < cfg.max_restarts && nm.budget_left() {
                restarts += 1;
                let (fb, xb) = nm.best.clone();
                (conv, collapsed) = nm.run_simplex(&xb, Some(fb), &mut rng)?;
            }
            (conv, restarts, nm.best.1.clone())
        }
    };
    let final_energy = trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    Ok(VqeRun {
        scheme: None,
        zeroth_energy: trace[0].1,
        n_function_evals: trace.len(),
        trace,
        final_energy,
        theta_final,
        converged,
        restarts,
    })
}

/// `E(θ = 0) - reference_energy` for one preparation.
pub fn zeroth_iteration_error(h: &PauliSum, prepared: &Statevector, reference_energy: f64) -> Result<f64> {
    Ok(prepared.expectation(h)? - reference_energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QpePrepConfig {
    pub n_ancilla: usize,
    pub n_trotter: usize,
    pub b_multiplier: f64,
    pub mode: UnitaryMode,
    /// Reuse the first collapsed state for every evaluation.
    pub cache_collapsed_state: bool,
    pub max_attempts: Option<usize>,
}

impl Default for QpePrepConfig {
    fn default() -> Self {
        QpePrepConfig {
            n_ancilla: 6,
            n_trotter: 4,
            b_multiplier: 1.0,
            mode: UnitaryMode::Trotter,
            cache_collapsed_state: false,
            max_attempts: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingConfig {
    /// Iterate fragment γ blocks to self-consistency; otherwise use the
    /// blocks given in the fragment file.
    pub self_consistent: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            self_consistent: true,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

/// Fragment Hamiltonians, their exact ground states and the coupled
/// effective Hamiltonian (constant included in its identity offset).
#[derive(Debug, Clone)]
pub struct LasProblem {
    pub spec: FragmentSpec,
    pub electrons: Vec<usize>,
    pub fragment_hamiltonians: Vec<PauliSum>,
    pub fragment_ground_states: Vec<Statevector>,
    pub fragment_ground_energies: Vec<f64>,
    pub h_eff: PauliSum,
}

impl LasProblem {
    pub fn new(
        ints: &FermionIntegrals,
        spec: &FragmentSpec,
        electrons: &[usize],
        embedding: &EmbeddingConfig,
    ) -> Result<Self> {
        spec.validate(ints.n_spin_orbitals())?;
        let (spec, hams, states, energies) = if embedding.self_consistent {
            let e = embed_fragments(ints, spec, electrons, embedding.tol, embedding.max_iter)?;
            (e.spec, e.hamiltonians, e.ground_states, e.ground_energies)
        } else {
            if electrons.len() != spec.n_fragments() {
                return Err(Error::invalid("one electron count per fragment is required"));
            }
            let (mut hams, mut states, mut energies) = (Vec::new(), Vec::new(), Vec::new());
            for (k, &ne) in electrons.iter().enumerate() {
                let hk = crate::fermion::build_fragment_hamiltonian(ints, spec, k)?;
                let (e, psi) = ground_state_in_sector(&hk, ne)?;
                hams.push(hk);
                states.push(psi);
                energies.push(e);
            }
            (spec.clone(), hams, states, energies)
        };
        let mut h_eff = build_effective_hamiltonian(ints, &spec)?;
        h_eff.add_identity_offset(ints.core_energy(&spec.inactive_orbitals));
        Ok(LasProblem {
            spec,
            electrons: electrons.to_vec(),
            fragment_hamiltonians: hams,
            fragment_ground_states: states,
            fragment_ground_energies: energies,
            h_eff,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.h_eff.n_qubits()
    }

    /// Lowest determinant of each fragment, concatenated.
    pub fn reference_occupation(&self) -> u64 {
        let mut occ = 0u64;
        for (k, &ne) in self.electrons.iter().enumerate() {
            occ |= ((1u64 << ne) - 1) << self.spec.fragment_offset(k);
        }
        occ
    }

    /// Product of the exact fragment ground states (fragment 0 lowest).
    pub fn exact_product_state(&self) -> Result<Statevector> {
        product_low_first(&self.fragment_ground_states)
    }

    /// Energy of [`Self::exact_product_state`] under `h_eff`.
    pub fn las_energy(&self) -> Result<f64> {
        self.exact_product_state()?.expectation(&self.h_eff)
    }

    /// Exact ground energy of `h_eff` in the total electron sector.
    pub fn exact_ground_energy(&self) -> Result<f64> {
        Ok(ground_state_in_sector(&self.h_eff, self.electrons.iter().sum())?.0)
    }

    pub fn ansatz(&self, generalized: bool) -> Result<AnsatzSpec> {
        let spins = self
            .spec
            .active_orbitals()
            .iter()
            .map(|&p| (p % 2) as u8)
            .collect();
        build_ucc_ansatz_with(
            self.n_qubits(),
            self.reference_occupation(),
            &AnsatzOptions {
                generalized,
                spins: Some(spins),
            },
        )
    }

    pub fn preparer(&self, scheme: Scheme, qpe: &QpePrepConfig, seed: u64) -> Result<Preparer> {
        let kind = match scheme {
            Scheme::Hf => PrepKind::Fixed(Statevector::basis(self.n_qubits(), self.reference_occupation())),
            Scheme::Di => {
                let mut circuit = Circuit::new(self.n_qubits());
                for (k, psi) in self.fragment_ground_states.iter().enumerate() {
                    let local = compile_initializer(psi)?;
                    let off = self.spec.fragment_offset(k);
                    let map: Vec<usize> = (0..psi.n_qubits()).map(|q| q + off).collect();
                    circuit.append(&local.remapped(&map, self.n_qubits())?)?;
                }
                let mut state = Statevector::zero(self.n_qubits());
                state.apply(&circuit)?;
                PrepKind::Direct { circuit, state }
            }
            Scheme::Qpe => {
                let mut frags = Vec::new();
                for (hk, &ne) in self.fragment_hamiltonians.iter().zip(&self.electrons) {
                    let cfg = QpeConfig::new(hk, qpe.n_ancilla, qpe.n_trotter)?
                        .with_mode(qpe.mode)
                        .with_multiplier(qpe.b_multiplier)
                        .with_initial_state(InitialState::Basis((1u64 << ne) - 1));
                    cfg.validate()?;
                    let target = ground_state_target(hk, &cfg)?;
                    frags.push(QpeFragment {
                        hamiltonian: hk.clone(),
                        cfg,
                        target,
                        sim: None,
                    });
                }
                PrepKind::Qpe {
                    frags,
                    cfg: *qpe,
                    cached: None,
                }
            }
        };
        Ok(Preparer {
            scheme,
            seed,
            kind,
            attempts: 0,
            calls: 0,
        })
    }
}

fn product_low_first(parts: &[Statevector]) -> Result<Statevector> {
    let mut it = parts.iter();
    let mut acc = it
        .next()
        .ok_or_else(|| Error::invalid("no fragment states"))?
        .clone();
    for p in it {
        acc = Statevector::tensor(p, &acc);
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
struct QpeFragment {
    hamiltonian: PauliSum,
    cfg: QpeConfig,
    target: crate::statevector::Outcome,
    sim: Option<QpeState>,
}

#[derive(Debug, Clone)]
enum PrepKind {
    Fixed(Statevector),
    Direct { circuit: Circuit, state: Statevector },
    Qpe {
        frags: Vec<QpeFragment>,
        cfg: QpePrepConfig,
        cached: Option<Statevector>,
    },
}

/// Stateful reference-state source for one VQE run.
#[derive(Debug, Clone)]
pub struct Preparer {
    pub scheme: Scheme,
    seed: u64,
    kind: PrepKind,
    /// Total QPE readout attempts so far.
    pub attempts: usize,
    pub calls: usize,
}

impl Preparer {
    /// Reference state for evaluation `k`.
    pub fn prepare(&mut self, k: usize) -> Result<Statevector> {
        self.calls += 1;
        match &mut self.kind {
            PrepKind::Fixed(s) => Ok(s.clone()),
            PrepKind::Direct { state, .. } => Ok(state.clone()),
            PrepKind::Qpe { frags, cfg, cached } => {
                if cfg.cache_collapsed_state {
                    if let Some(s) = cached {
                        return Ok(s.clone());
                    }
                }
                let n_frag = frags.len() as u64;
                let mut parts = Vec::with_capacity(frags.len());
                for (i, f) in frags.iter_mut().enumerate() {
                    // Without caching the QPE circuit is rerun every evaluation.
                    let sim = if cfg.cache_collapsed_state {
                        if f.sim.is_none() {
                            f.sim = Some(simulate_qpe(&f.hamiltonian, &f.cfg)?);
                        }
                        f.sim.clone().expect("simulated above")
                    } else {
                        simulate_qpe(&f.hamiltonian, &f.cfg)?
                    };
                    let seed = derive_seed(self.seed, k as u64 * n_frag + i as u64);
                    let p = prepare_from(&sim, f.target, seed, cfg.max_attempts).map_err(|e| {
                        Error::Numeric(format!("QPE preparation of fragment {i} at evaluation {k}: {e}"))
                    })?;
                    self.attempts += p.attempts;
                    parts.push(p.state);
                }
                let s = product_low_first(&parts)?;
                if cfg.cache_collapsed_state {
                    *cached = Some(s.clone());
                }
                Ok(s)
            }
        }
    }

    /// Direct-initialization circuit, when this is the DI scheme.
    pub fn circuit(&self) -> Option<&Circuit> {
        match &self.kind {
            PrepKind::Direct { circuit, .. } => Some(circuit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub generalized: bool,
}

/// VQE run config (TOML). Either `fcidump` + `fragments` (paths relative
/// to the config file) or `builtin = "h2_dimer"` with optional `coupling`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeConfig {
    pub fcidump: Option<PathBuf>,
    pub fragments: Option<PathBuf>,
    pub builtin: Option<String>,
    pub coupling: Option<f64>,
    pub electrons: Vec<usize>,
    pub scheme: Scheme,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub qpe: QpePrepConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
}

impl VqeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads integrals and fragments and builds the problem.
    pub fn problem(&self, base_dir: Option<&Path>) -> Result<LasProblem> {
        let resolve = |p: &Path| match base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        };
        let (ints, spec) = match (&self.builtin, &self.fcidump, &self.fragments) {
            (Some(name), None, None) if name == "h2_dimer" => (
                h2_dimer_integrals(self.coupling.unwrap_or(1.0))?,
                h2_dimer_fragments(),
            ),
            (Some(name), None, None) => {
                return Err(Error::Config(format!("unknown builtin system `{name}`")))
            }
            (None, Some(f), Some(g)) => {
                if self.coupling.is_some() {
                    return Err(Error::Config("`coupling` only applies to builtin systems".into()));
                }
                let fpath = resolve(f);
                let gpath = resolve(g);
                let ints = parse_fcidump(&crate::error::read_text(&fpath)?)?;
                let spec = FragmentSpec::from_toml(
                    &crate::error::read_text(&gpath)?,
                    gpath.parent(),
                )?;
                (ints, spec)
            }
            _ => {
                return Err(Error::Config(
                    "give either `builtin` or both `fcidump` and `fragments`".into(),
                ))
            }
        };
        LasProblem::new(&ints, &spec, &self.electrons, &self.embedding)
    }
}

/// A finished run with the reference energies needed for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct VqeReport {
    pub run: VqeRun,
    pub n_parameters: usize,
    pub las_energy: f64,
    pub exact_energy: f64,
    pub zeroth_iteration_error: f64,
    pub qpe_attempts: usize,
    pub di_cnots: Option<u64>,
}

impl VqeReport {
    pub fn summary_json(&self) -> String {
        let v = serde_json::json!({
            "format": "fragprep vqe-summary v1",
            "scheme": self.run.scheme.map(Scheme::name),
            "n_parameters": self.n_parameters,
            "n_function_evals": self.run.n_function_evals,
            "converged": self.run.converged,
            "restarts": self.run.restarts,
            "final_energy": sig(self.run.final_energy),
            "zeroth_energy": sig(self.run.zeroth_energy),
            "las_energy": sig(self.las_energy),
            "exact_energy": sig(self.exact_energy),
            "final_error": sig(self.run.final_energy - self.exact_energy),
            "zeroth_iteration_error": sig(self.zeroth_iteration_error),
            "qpe_attempts": self.qpe_attempts,
            "di_cnots": self.di_cnots,
            "theta_final": self.run.theta_final.iter().map(|t| sig(*t)).collect::<Vec<_>>(),
        });
        serde_json::to_string_pretty(&v).expect("summary serializes")
    }
}

/// Runs one scheme on a prepared problem. The zeroth-iteration error is
/// measured against the exact fragment-product energy.
pub fn run_scheme(
    problem: &LasProblem,
    scheme: Scheme,
    ansatz: &AnsatzSpec,
    qpe: &QpePrepConfig,
    optimizer: &OptimizerConfig,
) -> Result<VqeReport> {
    let mut prep = problem.preparer(scheme, qpe, optimizer.seed)?;
    let di_cnots = prep
        .circuit()
        .map(|c| crate::evolution::count_gates(c).cnot_equivalent().unwrap_or(0));
    let mut run = run_vqe(&problem.h_eff, &mut |k| prep.prepare(k), ansatz, optimizer)?;
    run.scheme = Some(scheme);
    let las = problem.las_energy()?;
    Ok(VqeReport {
        n_parameters: ansatz.n_parameters(),
        las_energy: las,
        exact_energy: problem.exact_ground_energy()?,
        zeroth_iteration_error: run.zeroth_energy - las,
        qpe_attempts: prep.attempts,
        di_cnots,
        run,
    })
}

impl VqeConfig {
    pub fn run(&self, base_dir: Option<&Path>) -> Result<VqeReport> {
        let problem = self.problem(base_dir)?;
        let ansatz = problem.ansatz(self.ansatz.generalized)?;
        let opt = OptimizerConfig {
            seed: self.seed,
            ..self.optimizer
        };
        run_scheme(&problem, self.scheme, &ansatz, &self.qpe, &opt)
    }
}

/// Dense matrix of a generator (test and oracle helper).
pub fn generator_matrix(g: &PauliSum) -> Result<DMatrix<num_complex::Complex64>> {
    g.to_dense_matrix(crate::pauli::DEFAULT_ORACLE_CAP)
}

/// Strings of a generator, for inspecting commutation.
pub fn generator_strings(g: &PauliSum) -> Vec<PauliString> {
    g.terms().iter().map(|(p, _)| *p).collect()
}
