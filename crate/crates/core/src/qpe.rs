//! Quantum phase estimation on a fragment Hamiltonian.
//!
//! Register layout: system qubits `0..n`, ancilla `k` is qubit `n + k`.
//! Ancilla `k` controls `U^{2^k}` with `U = e^{iHb}`, so ancilla 0 carries
//! the least significant phase bit. An outcome `m` decodes to
//! `φ = m / 2^t`, shifted by `-1` when above `1/2`, giving `φ ∈ (-1/2, 1/2]`
//! and `E = 2πφ / b + identity_offset`.
//!
//! Two simulation routes produce the same final state:
//!
//! * literal: the gate list of [`build_qpe_circuit`], where `U^{2^k}` is the
//!   controlled Trotter circuit repeated `2^k` times;
//! * fused (default): each controlled `U^{2^k}` is one controlled dense gate
//!   holding the `2^k`-th power of the compiled circuit's matrix.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, Pass, Provenance, Role};
use crate::error::{Error, Result};
use crate::evolution::{controlled, compile_trotter, exact_unitary, unitary_gate, TrotterPlan};
use crate::linalg::{eigh, CMatrix};
use crate::numfmt::sig;
use crate::pauli::{PauliSum, DEFAULT_ORACLE_CAP};
use crate::rng::{derive_seed, seeded};
use crate::statevector::{sample_index, Outcome, Statevector};

/// Largest total register (system + ancillas) the simulator accepts.
pub const SIM_CAP: usize = 24;
/// Largest gate list [`build_qpe_circuit`] will materialize.
pub const MAX_LITERAL_GATES: usize = 5_000_000;
/// Default frequency threshold for a histogram peak to count in scans.
pub const DEFAULT_MIN_PEAK_WEIGHT: f64 = 0.1;

/// Conservative scale factor `π / (2 ‖H‖₁)`, so every eigenphase satisfies
/// `|φ| ≤ 1/4`.
pub fn default_scale_factor(h: &PauliSum) -> Result<f64> {
    let norm = h.one_norm();
    if norm == 0.0 {
        return Err(Error::invalid("Hamiltonian has zero one-norm"));
    }
    Ok(PI / (2.0 * norm))
}

/// Phase in `(-1/2, 1/2]` of ancilla outcome `value` on `n_ancilla` bits.
pub fn decode_phase(value: u64, n_ancilla: usize) -> f64 {
    let phi = value as f64 / (1u64 << n_ancilla) as f64;
    if phi > 0.5 {
        phi - 1.0
    } else {
        phi
    }
}

/// Energy grid spacing `2π / (b 2^t)`.
pub fn resolution(b: f64, n_ancilla: usize) -> f64 {
    2.0 * PI / (b * (1u64 << n_ancilla) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Computational basis state (bit `q` is qubit `q`).
    Basis(u64),
    State(Statevector),
}

impl InitialState {
    pub fn resolve(&self, n_qubits: usize) -> Result<Statevector> {
        match self {
            InitialState::Basis(b) => {
                if n_qubits < 64 && *b >> n_qubits != 0 {
                    return Err(Error::invalid(format!(
                        "basis state {b} does not fit in {n_qubits} qubits"
                    )));
                }
                Ok(Statevector::basis(n_qubits, *b))
            }
            InitialState::State(s) => {
                if s.n_qubits() != n_qubits {
                    return Err(Error::SizeMismatch {
                        expected: n_qubits,
                        found: s.n_qubits(),
                    });
                }
                Ok(s.clone())
            }
        }
    }
}

/// How the controlled powers of `U` are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryMode {
    /// `U^{2^k}` as `2^k` repetitions of the Trotter circuit.
    Trotter,
    /// `e^{iHb 2^k}` from the exact-unitary oracle.
    Exact,
    /// One Trotter circuit at scale `b 2^k` (same step count); oracle use only.
    RescaledTrotter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpeConfig {
    pub n_ancilla: usize,
    pub n_trotter: usize,
    /// Base scale factor; the effective one is `b * b_multiplier`.
    pub b: f64,
    pub b_multiplier: f64,
    pub initial_state: InitialState,
    pub shots: usize,
    pub seed: u64,
    pub mode: UnitaryMode,
    /// Simulate the gate-level circuit instead of fused controlled powers.
    pub literal: bool,
}

impl QpeConfig {
    /// Trotter mode at the default scale factor, system in `|0…0⟩`.
    pub fn new(h: &PauliSum, n_ancilla: usize, n_trotter: usize) -> Result<Self> {
        Ok(QpeConfig {
            n_ancilla,
            n_trotter,
            b: default_scale_factor(h)?,
            b_multiplier: 1.0,
            initial_state: InitialState::Basis(0),
            shots: 1000,
            seed: 0,
            mode: UnitaryMode::Trotter,
            literal: false,
        })
    }

    pub fn with_mode(mut self, mode: UnitaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_initial_state(mut self, s: InitialState) -> Self {
        self.initial_state = s;
        self
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_multiplier(mut self, m: f64) -> Self {
        self.b_multiplier = m;
        self
    }

    pub fn effective_b(&self) -> f64 {
        self.b * self.b_multiplier
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ancilla == 0 || self.n_ancilla >= 63 {
            return Err(Error::invalid("n_ancilla must be in 1..63"));
        }
        if self.n_trotter == 0 {
            return Err(Error::invalid("n_trotter must be at least 1"));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::invalid(format!("scale factor b = {} must be positive", self.b)));
        }
        if !(self.b_multiplier.is_finite() && self.b_multiplier >= 1.0) {
            return Err(Error::invalid(format!(
                "b multiplier {} must be at least 1",
                self.b_multiplier
            )));
        }
        if self.shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        Ok(())
    }
}

fn check_problem(h: &PauliSum, cfg: &QpeConfig) -> Result<()> {
    cfg.validate()?;
    h.ensure_hermitian()?;
    if h.terms().iter().all(|(p, _)| p.is_identity()) {
        return Err(Error::invalid(
            "Hamiltonian has no non-identity terms; U would be trivial",
        ));
    }
    let total = h.n_qubits() + cfg.n_ancilla;
    if total > SIM_CAP {
        return Err(Error::SizeCap {
            what: "QPE register",
            requested: total,
            cap: SIM_CAP,
        });
    }
    Ok(())
}

/// Quantum Fourier transform on `qubits` (entry 0 least significant):
/// `|x⟩ ↦ 2^{-t/2} Σ_y e^{2πi xy/2^t} |y⟩`.
pub fn qft(qubits: &[usize], n_total: usize) -> Result<Circuit> {
    let t = qubits.len();
    let prov = Provenance::new(Pass::InverseQft, Role::Plain);
    let mut c = Circuit::new(n_total);
    for j in (0..t).rev() {
        c.push(Gate::single(GateKind::H, qubits[j]).tagged(prov))?;
        for m in (0..j).rev() {
            let angle = PI / (1u64 << (j - m)) as f64;
            c.push(
                Gate::single(GateKind::Phase(angle), qubits[j])
                    .with_controls(vec![qubits[m]])
                    .tagged(prov),
            )?;
        }
    }
    for i in 0..t / 2 {
        c.push(Gate::new(GateKind::Swap, vec![qubits[i], qubits[t - 1 - i]]).tagged(prov))?;
    }
    Ok(c)
}

pub fn inverse_qft(qubits: &[usize], n_total: usize) -> Result<Circuit> {
    Ok(qft(qubits, n_total)?.inverse())
}

fn ancilla_qubits(n_sys: usize, n_ancilla: usize) -> Vec<usize> {
    (n_sys..n_sys + n_ancilla).collect()
}

fn trotter_plan(h: &PauliSum, cfg: &QpeConfig) -> Result<TrotterPlan> {
    TrotterPlan::new(&h.subtract_identity(), cfg.effective_b(), cfg.n_trotter)
}

/// Gate-level QPE circuit (ancilla Hadamards, controlled powers, inverse
/// QFT). System-state preparation is not included; the circuit acts on
/// `|ψ⟩ ⊗ |0…0⟩_ancilla`.
pub fn build_qpe_circuit(h: &PauliSum, cfg: &QpeConfig) -> Result<Circuit> {
    check_problem(h, cfg)?;
    let n_sys = h.n_qubits();
    let n_total = n_sys + cfg.n_ancilla;
    let anc = ancilla_qubits(n_sys, cfg.n_ancilla);
    let mut c = Circuit::new(n_total);
    let prov = Provenance::new(Pass::QpeAncilla, Role::Plain);
    for &a in &anc {
        c.push(Gate::single(GateKind::H, a).tagged(prov))?;
    }
    let plan = trotter_plan(h, cfg)?;
    match cfg.mode {
        UnitaryMode::Trotter => {
            let step = compile_trotter(&plan)?;
            let repeats = (1u64 << cfg.n_ancilla) - 1;
            let projected = repeats.saturating_mul(step.len() as u64);
            if projected > MAX_LITERAL_GATES as u64 {
                return Err(Error::invalid(format!(
                    "literal circuit would hold {projected} gates (limit {MAX_LITERAL_GATES})"
                )));
            }
            for (k, &a) in anc.iter().enumerate() {
                let cu = controlled(&step, a)?.widened(n_total)?;
                for _ in 0..1u64 << k {
                    c.append(&cu)?;
                }
            }
        }
        UnitaryMode::RescaledTrotter => {
            for (k, &a) in anc.iter().enumerate() {
                let step = compile_trotter(&plan.rescaled((1u64 << k) as f64))?;
                c.append(&controlled(&step, a)?.widened(n_total)?)?;
            }
        }
        UnitaryMode::Exact => {
            let hs = h.subtract_identity();
            for (k, &a) in anc.iter().enumerate() {
                let u = exact_unitary(&hs, cfg.effective_b() * (1u64 << k) as f64, DEFAULT_ORACLE_CAP)?;
                c.push(unitary_gate(u, (0..n_sys).collect(), Pass::ExactUnitary).with_controls(vec![a]))?;
            }
        }
    }
    c.append(&inverse_qft(&anc, n_total)?)?;
    Ok(c)
}

/// Dense `U^{2^k}` for `k = 0..t`, per the configured mode.
fn unitary_powers(h: &PauliSum, cfg: &QpeConfig) -> Result<Vec<CMatrix>> {
    let b = cfg.effective_b();
    let plan = trotter_plan(h, cfg)?;
    let mut out = Vec::with_capacity(cfg.n_ancilla);
    match cfg.mode {
        UnitaryMode::Trotter => {
            let mut u = compile_trotter(&plan)?.to_matrix(DEFAULT_ORACLE_CAP)?;
            for _ in 0..cfg.n_ancilla {
                let next = &u * &u;
                out.push(u);
                u = next;
            }
        }
        UnitaryMode::RescaledTrotter => {
            for k in 0..cfg.n_ancilla {
                let scaled = plan.rescaled((1u64 << k) as f64);
                out.push(compile_trotter(&scaled)?.to_matrix(DEFAULT_ORACLE_CAP)?);
            }
        }
        UnitaryMode::Exact => {
            // The identity offset only adds a global phase per power; drop it
            // so phases match the identity-subtracted spectrum.
            let hs = h.subtract_identity();
            for k in 0..cfg.n_ancilla {
                out.push(exact_unitary(&hs, b * (1u64 << k) as f64, DEFAULT_ORACLE_CAP)?);
            }
        }
    }
    Ok(out)
}

/// Joint system + ancilla state just before the ancilla readout.
#[derive(Debug, Clone)]
pub struct QpeState {
    pub state: Statevector,
    pub n_system: usize,
    pub n_ancilla: usize,
    /// Effective scale factor.
    pub b: f64,
    pub identity_offset: f64,
}

impl QpeState {
    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.n_system).collect()
    }

    pub fn ancilla_qubits(&self) -> Vec<usize> {
        ancilla_qubits(self.n_system, self.n_ancilla)
    }

    /// Exact outcome distribution of the ancilla register.
    pub fn distribution(&self) -> Vec<f64> {
        self.state
            .marginal(&self.ancilla_qubits())
            .expect("ancilla indices are valid")
    }

    /// Renormalized system register after reading `outcome`.
    pub fn collapsed(&self, outcome: u64) -> Result<Statevector> {
        self.state
            .extract(&self.system_qubits(), &self.ancilla_qubits(), outcome)
    }

    pub fn energy_of(&self, outcome: u64) -> f64 {
        2.0 * PI * decode_phase(outcome, self.n_ancilla) / self.b + self.identity_offset
    }
}

/// Runs the QPE circuit once on the configured initial state.
pub fn simulate_qpe(h: &PauliSum, cfg: &QpeConfig) -> Result<QpeState> {
    check_problem(h, cfg)?;
    let n_sys = h.n_qubits();
    let n_total = n_sys + cfg.n_ancilla;
    let psi = cfg.initial_state.resolve(n_sys)?;
    let mut state = Statevector::tensor(&Statevector::zero(cfg.n_ancilla), &psi);
    if cfg.literal {
        state.apply(&build_qpe_circuit(h, cfg)?)?;
    } else {
        let anc = ancilla_qubits(n_sys, cfg.n_ancilla);
        let mut c = Circuit::new(n_total);
        let prov = Provenance::new(Pass::QpeAncilla, Role::Plain);
        for &a in &anc {
            c.push(Gate::single(GateKind::H, a).tagged(prov))?;
        }
        for (u, &a) in unitary_powers(h, cfg)?.into_iter().zip(&anc) {
            c.push(unitary_gate(u, (0..n_sys).collect(), Pass::Trotter).with_controls(vec![a]))?;
        }
        c.append(&inverse_qft(&anc, n_total)?)?;
        state.apply(&c)?;
    }
    Ok(QpeState {
        state,
        n_system: n_sys,
        n_ancilla: cfg.n_ancilla,
        b: cfg.effective_b(),
        identity_offset: h.identity_offset() + h.identity_coefficient().re,
    })
}

/// One histogram bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEstimate {
    pub bitstring: String,
    pub outcome: u64,
    pub phi: f64,
    pub energy: f64,
    pub count: usize,
    pub probability: f64,
}

/// Result of `shots` seeded ancilla readouts.
#[derive(Debug, Clone)]
pub struct QpeRun {
    /// Bins in ascending outcome order.
    pub histogram: Vec<PhaseEstimate>,
    /// Outcome of each shot.
    pub shot_outcomes: Vec<u64>,
    collapsed: BTreeMap<u64, Statevector>,
    pub b: f64,
    pub n_ancilla: usize,
}

impl QpeRun {
    /// Collapsed system register of shot `i`.
    pub fn collapsed_state(&self, shot: usize) -> Option<&Statevector> {
        self.collapsed.get(self.shot_outcomes.get(shot)?)
    }

    pub fn collapsed_for(&self, outcome: u64) -> Option<&Statevector> {
        self.collapsed.get(&outcome)
    }

    /// Most frequent bin (lowest outcome wins ties).
    pub fn peak(&self) -> Option<&PhaseEstimate> {
        self.histogram
            .iter()
            .max_by(|a, b| a.count.cmp(&b.count).then(b.outcome.cmp(&a.outcome)))
    }

    /// Lowest-energy bin with frequency at least `min_weight`.
    pub fn lowest_significant(&self, min_weight: f64) -> Option<&PhaseEstimate> {
        self.histogram
            .iter()
            .filter(|e| e.probability >= min_weight)
            .min_by(|a, b| a.energy.total_cmp(&b.energy))
    }

    /// CSV `bitstring,phi,energy_hartree,count,frequency` behind a versioned
    /// comment line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# fragprep qpe-histogram v1\nbitstring,phi,energy_hartree,count,frequency\n");
        for e in &self.histogram {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.bitstring,
                sig(e.phi),
                sig(e.energy),
                e.count,
                sig(e.probability)
            ));
        }
        out
    }
}

/// Samples `cfg.shots` readouts of the simulated QPE state. Shot `i` uses
/// seed `derive_seed(cfg.seed, i)`.
pub fn run_qpe(h: &PauliSum, cfg: &QpeConfig) -> Result<QpeRun> {
    let sim = simulate_qpe(h, cfg)?;
    Ok(sample_run(&sim, cfg.shots, cfg.seed))
}

pub fn sample_run(sim: &QpeState, shots: usize, seed: u64) -> QpeRun {
    let probs = sim.distribution();
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    let mut shot_outcomes = Vec::with_capacity(shots);
    for i in 0..shots {
        let m = sample_index(&probs, &mut seeded(derive_seed(seed, i as u64))) as u64;
        *counts.entry(m).or_insert(0) += 1;
        shot_outcomes.push(m);
    }
    let mut collapsed = BTreeMap::new();
    let histogram = counts
        .iter()
        .map(|(&m, &count)| {
            collapsed.insert(m, sim.collapsed(m).expect("sampled outcome has weight"));
            PhaseEstimate {
                bitstring: Outcome {
                    value: m,
                    width: sim.n_ancilla,
                }
                .bitstring(),
                outcome: m,
                phi: decode_phase(m, sim.n_ancilla),
                energy: sim.energy_of(m),
                count,
                probability: count as f64 / shots as f64,
            }
        })
        .collect();
    QpeRun {
        histogram,
        shot_outcomes,
        collapsed,
        b: sim.b,
        n_ancilla: sim.n_ancilla,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPeak {
    pub energy: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub multiplier: f64,
    pub b: f64,
    pub resolution: f64,
    /// Significant peaks, ascending in energy.
    pub peaks: Vec<ScanPeak>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedEnergy {
    pub multiplier: f64,
    pub energy: f64,
    pub frequency: f64,
    /// Multipliers at which no matching energy was found.
    pub missing_at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliasingReport {
    pub format: &'static str,
    pub min_peak_weight: f64,
    pub entries: Vec<ScanEntry>,
    pub flagged: Vec<FlaggedEnergy>,
    /// Energies of the first scan entry that are stable across the scan.
    pub trusted: Vec<f64>,
}

impl AliasingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Reruns QPE at `b * m` for each multiplier and flags every significant
/// energy that has no counterpart (within the sum of both grid resolutions)
/// in some other run. A counterpart is any histogram mass of at least
/// `min_peak_weight / 4` inside that window, so peaks split across two bins
/// still match.
pub fn aliasing_scan(
    h: &PauliSum,
    cfg: &QpeConfig,
    multipliers: &[f64],
    min_peak_weight: f64,
) -> Result<AliasingReport> {
    if multipliers.is_empty() {
        return Err(Error::invalid("aliasing scan needs at least one multiplier"));
    }
    let mut runs = Vec::new();
    for (i, &m) in multipliers.iter().enumerate() {
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::invalid(format!("multiplier {m} must be at least 1")));
        }
        let c = cfg
            .clone()
            .with_multiplier(cfg.b_multiplier * m)
            .with_seed(derive_seed(cfg.seed, i as u64));
        runs.push((m, run_qpe(h, &c)?));
    }
    let entries: Vec<ScanEntry> = runs
        .iter()
        .map(|(m, r)| {
            let mut peaks: Vec<ScanPeak> = r
                .histogram
                .iter()
                .filter(|e| e.probability >= min_peak_weight)
                .map(|e| ScanPeak {
                    energy: e.energy,
                    frequency: e.probability,
                })
                .collect();
            peaks.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            ScanEntry {
                multiplier: *m,
                b: r.b,
                resolution: resolution(r.b, r.n_ancilla),
                peaks,
            }
        })
        .collect();

    let mut flagged = Vec::new();
    let mut trusted = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        for peak in &entry.peaks {
            let mut missing_at = Vec::new();
            for (j, (m2, run2)) in runs.iter().enumerate() {
                if i == j {
                    continue;
                }
                let window = entry.resolution + entries[j].resolution;
                let mass: f64 = run2
                    .histogram
                    .iter()
                    .filter(|e| (e.energy - peak.energy).abs() <= window * (1.0 + 1e-9))
                    .map(|e| e.probability)
                    .sum();
                if mass < min_peak_weight / 4.0 {
                    missing_at.push(*m2);
                }
            }
            if missing_at.is_empty() {
                if i == 0 {
                    trusted.push(peak.energy);
                }
            } else {
                flagged.push(FlaggedEnergy {
                    multiplier: entry.multiplier,
                    energy: peak.energy,
                    frequency: peak.frequency,
                    missing_at,
                });
            }
        }
    }
    Ok(AliasingReport {
        format: "fragprep aliasing-scan v1",
        min_peak_weight,
        entries,
        flagged,
        trusted,
    })
}

/// Outcome of a repeat-until-success preparation.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub state: Statevector,
    pub attempts: usize,
    /// Exact probability of the target readout per attempt.
    pub target_probability: f64,
}

/// Default attempt budget `max(100, ceil(20 / p))`.
pub fn default_max_attempts(p: f64) -> usize {
    if p <= 0.0 {
        return 100;
    }
    ((20.0 / p).ceil() as usize).max(100)
}

/// Repeats seeded QPE readouts (attempt `i` uses `derive_seed(cfg.seed, i)`)
/// until the ancillas show `target`, then returns the collapsed system
/// register.
pub fn prepare_ground_state(
    h: &PauliSum,
    cfg: &QpeConfig,
    target: Outcome,
    max_attempts: Option<usize>,
) -> Result<Prepared> {
    let sim = simulate_qpe(h, cfg)?;
    prepare_from(&sim, target, cfg.seed, max_attempts)
}

/// [`prepare_ground_state`] on an already simulated QPE state.
pub fn prepare_from(
    sim: &QpeState,
    target: Outcome,
    seed: u64,
    max_attempts: Option<usize>,
) -> Result<Prepared> {
    if target.width != sim.n_ancilla {
        return Err(Error::SizeMismatch {
            expected: sim.n_ancilla,
            found: target.width,
        });
    }
    let probs = sim.distribution();
    let p = probs[target.value as usize];
    let budget = max_attempts.unwrap_or_else(|| default_max_attempts(p));
    for attempt in 0..budget {
        let m = sample_index(&probs, &mut seeded(derive_seed(seed, attempt as u64))) as u64;
        if m == target.value {
            return Ok(Prepared {
                state: sim.collapsed(m)?,
                attempts: attempt + 1,
                target_probability: p,
            });
        }
    }
    Err(Error::PreparationFailed {
        attempts: budget,
        hit_rate: 0.0,
        target_probability: p,
    })
}

/// Readout whose energy is closest to the exact ground energy of `h`
/// (oracle helper for sweeps).
pub fn ground_state_target(h: &PauliSum, cfg: &QpeConfig) -> Result<Outcome> {
    let (vals, _) = eigh(&h.subtract_identity().to_dense_matrix(DEFAULT_ORACLE_CAP)?);
    let t = cfg.n_ancilla;
    let phi = vals[0] * cfg.effective_b() / (2.0 * PI);
    let n = (1u64 << t) as f64;
    let value = ((phi * n).round().rem_euclid(n)) as u64;
    Ok(Outcome { value, width: t })
}

/// Weight of `state` in the eigenspace of `h` with eigenvalues within `tol`
/// of `energy` (offset included). Used to report preparation quality when
/// the target is degenerate.
pub fn eigenspace_weight(state: &Statevector, h: &PauliSum, energy: f64, tol: f64) -> Result<f64> {
    let offset = h.identity_offset();
    let (vals, vecs) = eigh(&h.to_dense_matrix(DEFAULT_ORACLE_CAP)?);
    let amps = state.amplitudes();
    let mut w = 0.0;
    for (k, &e) in vals.iter().enumerate() {
        if (e + offset - energy).abs() <= tol {
            let ov: Complex64 = vecs
                .column(k)
                .iter()
                .zip(amps)
                .map(|(v, a)| v.conj() * a)
                .sum();
            w += ov.norm_sqr();
        }
    }
    Ok(w)
}
