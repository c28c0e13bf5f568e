//! Acceptance report: one PASS/FAIL line per criterion with the measured
//! values, tolerances and wall time against its budget. The process exits
//! nonzero if any criterion fails.
//!
//! Reference values come from oracles built here (Kronecker-product
//! Hamiltonians, Fock-space ladder matrices, per-gate basis action,
//! closed-form spectra) rather than from the library routines under test.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fragprep::circuit::{Circuit, Gate, GateKind};
use fragprep::direct_init::di_cnot_count;
use fragprep::evolution::{compile_trotter, exact_unitary, trotter_fidelity, TrotterPlan};
use fragprep::fermion::{
    build_effective_hamiltonian, jordan_wigner, FermionIntegrals, FermionTerm, FragmentSpec,
    LadderOp,
};
use fragprep::prony::{generate_series, prony_fit, AutocorrelationSeries};
use fragprep::qpe::{
    aliasing_scan, default_scale_factor, run_qpe, InitialState, QpeConfig,
    UnitaryMode, DEFAULT_MIN_PEAK_WEIGHT,
};
use fragprep::resources::qpe_cnots;
use fragprep::toys::{
    h2_dimer_fragments, h2_dimer_integrals, h2_dimer_spatial, random_pauli_sum,
    random_spatial_integrals, trotter_toys,
};
use fragprep::vqe::{
    run_scheme, EmbeddingConfig, LasProblem, OptimizerConfig, QpePrepConfig, Scheme,
};
use fragprep::{PauliSum, Statevector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type AnyResult<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;
type CMat = DMatrix<Complex64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> AnyResult<Outcome> {
    Ok(Outcome { pass, detail })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------- oracles

fn pauli_matrix(ch: char) -> CMat {
    let (o, z, i) = (c(1., 0.), c(0., 0.), c(0., 1.));
    match ch {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!("not a Pauli axis: {ch}"),
    }
}

/// Dense Hamiltonian from Kronecker products of the printed labels
/// (leftmost character is the highest qubit), offset included.
fn kron_dense(h: &PauliSum) -> CMat {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut m = CMat::identity(dim, dim) * c(h.identity_offset(), 0.0);
    for (p, coef) in h.terms() {
        let mut k = CMat::identity(1, 1);
        for ch in p.label(n).chars() {
            k = k.kronecker(&pauli_matrix(ch));
        }
        m += k * *coef;
    }
    m
}

/// Ascending eigenpairs of a Hermitian matrix.
fn eigenpairs(m: &CMat) -> (Vec<f64>, CMat) {
    let e = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// `exp(i t M)` for Hermitian `M` by eigendecomposition.
fn expm_i(m: &CMat, t: f64) -> CMat {
    let (vals, v) = eigenpairs(m);
    let d = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| Complex64::from_polar(1.0, e * t)),
    ));
    &v * d * v.adjoint()
}

fn state_of(v: &DVector<Complex64>) -> Statevector {
    Statevector::from_amplitudes(v.iter().copied().collect()).expect("normalized column")
}

fn column(v: &CMat, k: usize) -> DVector<Complex64> {
    v.column(k).into_owned()
}

fn amplitudes(s: &Statevector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix of one ladder-operator product on `n` modes by direct action on
/// occupation-number states (sign = parity of occupied modes below).
fn fock_matrix(coeff: Complex64, ops: &[LadderOp], n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut x = col;
        let mut amp = coeff;
        let mut alive = true;
        for op in ops.iter().rev() {
            let bit = 1usize << op.orbital;
            let occupied = x & bit != 0;
            if occupied == op.dagger {
                alive = false;
                break;
            }
            if (x & (bit - 1)).count_ones() % 2 == 1 {
                amp = -amp;
            }
            x ^= bit;
        }
        if alive {
            m[(x, col)] += amp;
        }
    }
    m
}

/// Second-quantized molecular Hamiltonian in the Fock basis:
/// `Σ h_ij a†_i a_j + 1/4 Σ g_ij^kl a†_k a†_l a_j a_i`.
fn fock_hamiltonian(ints: &FermionIntegrals) -> CMat {
    let n = ints.n_spin_orbitals();
    let (cr, an) = (LadderOp::create, LadderOp::annihilate);
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let h = ints.h(i, j);
            if h != 0.0 {
                m += fock_matrix(c(h, 0.0), &[cr(i), an(j)], n);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let g = ints.g(i, j, k, l);
                    if g != 0.0 {
                        m += fock_matrix(c(0.25 * g, 0.0), &[cr(k), cr(l), an(j), an(i)], n);
                    }
                }
            }
        }
    }
    m
}

/// Full matrix of one gate from its textbook single-qubit matrix, applied
/// basis state by basis state.
fn gate_oracle(kind: &GateKind, targets: &[usize], controls: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let (o, z, i) = (c(1., 0.), c(0., 0.), c(0., 1.));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let local: CMat = match kind {
        GateKind::H => DMatrix::from_row_slice(2, 2, &[o * r, o * r, o * r, -o * r]),
        GateKind::X => pauli_matrix('X'),
        GateKind::Y => pauli_matrix('Y'),
        GateKind::Z => pauli_matrix('Z'),
        GateKind::S => DMatrix::from_row_slice(2, 2, &[o, z, z, i]),
        GateKind::Sdg => DMatrix::from_row_slice(2, 2, &[o, z, z, -i]),
        GateKind::Rz(t) => DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::from_polar(1.0, -t / 2.0), z, z, Complex64::from_polar(1.0, t / 2.0)],
        ),
        GateKind::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            DMatrix::from_row_slice(2, 2, &[o * co, -o * s, o * s, o * co])
        }
        GateKind::Phase(t) => DMatrix::from_row_slice(2, 2, &[o, z, z, Complex64::from_polar(1.0, *t)]),
        GateKind::Swap => DMatrix::from_row_slice(
            4,
            4,
            &[o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o],
        ),
        GateKind::Unitary(u) => (**u).clone(),
    };
    let mut m = CMat::zeros(dim, dim);
    for col in 0..dim {
        if controls.iter().any(|&q| col >> q & 1 == 0) {
            m[(col, col)] = o;
            continue;
        }
        let sub: usize = targets.iter().enumerate().map(|(k, &q)| (col >> q & 1) << k).sum();
        let base = targets.iter().fold(col, |acc, &q| acc & !(1 << q));
        for row_sub in 0..local.nrows() {
            let row = targets
                .iter()
                .enumerate()
                .fold(base, |acc, (k, &q)| acc | ((row_sub >> k & 1) << q));
            m[(row, col)] += local[(row_sub, sub)];
        }
    }
    m
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    expm_i(&(&a + a.adjoint()), 0.7)
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

// -------------------------------------------------------------- criteria

fn gate_counts() -> AnyResult<Outcome> {
    let got = [
        di_cnot_count(4)?,
        di_cnot_count(8)?,
        qpe_cnots(84, 7, 4)?,
        qpe_cnots(84, 9, 4)?,
    ];
    let want = [232, 65152, 8820, 11340];
    outcome(
        got == want,
        format!(
            "DI(4)={} DI(8)={} QPE(84,7,4)={} QPE(84,9,4)={} (want {:?})",
            got[0], got[1], got[2], got[3], want
        ),
    )
}

fn qpe_precision() -> AnyResult<Outcome> {
    let mut worst_ratio: f64 = 0.0;
    let mut cases = 0;
    let mut failures = Vec::new();
    for n in 2..=4 {
        for seed in 0..3u64 {
            let h = random_pauli_sum(n, 6, 500 + 10 * seed + n as u64);
            let (vals, vecs) = eigenpairs(&kron_dense(&h));
            let picks = [0, vals.len() / 2, vals.len() - 1];
            for &k in &picks {
                let psi = state_of(&column(&vecs, k));
                for t in 2..=9 {
                    let cfg = QpeConfig::new(&h, t, 1)?
                        .with_mode(UnitaryMode::Exact)
                        .with_initial_state(InitialState::State(psi.clone()))
                        .with_seed(seed * 100 + t as u64);
                    let run = run_qpe(&h, &cfg)?;
                    let peak = run.peak().ok_or("empty histogram")?;
                    let err = (peak.energy - vals[k]).abs();
                    let bound = 2.0 * PI / (run.b * (1u64 << t) as f64);
                    cases += 1;
                    worst_ratio = worst_ratio.max(err / bound);
                    if err > bound + 1e-12 {
                        failures.push(format!("n={n} seed={seed} k={k} t={t}: {err:.3e} > {bound:.3e}"));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{cases} eigenstate runs, n_anc 2..9, max error/(2π/(b·2^t)) = {worst_ratio:.3}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn trotter_convergence() -> AnyResult<Outcome> {
    let steps = [1usize, 2, 4, 6, 8];
    let mut pass = true;
    let mut parts = Vec::new();
    for toy in trotter_toys()? {
        let h = &toy.hamiltonian;
        let b = default_scale_factor(h)?;
        let psi0 = toy.reference.clone();
        let exact = expm_i(&kron_dense(h), b) * amplitudes(&psi0);
        let mut fids = Vec::new();
        for &s in &steps {
            let plan = TrotterPlan::new(&h.subtract_identity(), b, s)?;
            let mut trot = psi0.clone();
            trot.apply(&compile_trotter(&plan)?)?;
            let f = exact.dotc(&amplitudes(&trot)).norm();
            let lib = trotter_fidelity(h, b, s, &psi0)?;
            if (f - lib).abs() > 1e-10 {
                pass = false;
                parts.push(format!("{}: route mismatch at n={s} ({f} vs {lib})", toy.name));
            }
            fids.push(f);
        }
        let monotone = fids.windows(2).all(|w| w[1] >= w[0] - 1e-6);
        let last = *fids.last().unwrap();
        pass &= monotone && last > 0.999;
        parts.push(format!(
            "{} [{}]{}",
            toy.name,
            fids.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>().join(" "),
            if monotone { "" } else { " NOT MONOTONE" }
        ));
    }

    // Zeroth-iteration error: one H2 fragment versus two identical,
    // uncoupled copies, both prepared by Trotterized QPE.
    let (hd, eri_d, e_core_d) = h2_dimer_spatial(0.0);
    let m = 2;
    let h1 = DMatrix::from_fn(m, m, |p, q| hd[(p, q)]);
    let mut eri1 = vec![0.0; m.pow(4)];
    for (p, q, r, s) in index_quads(m) {
        eri1[((p * m + q) * m + r) * m + s] = eri_d[((p * 4 + q) * 4 + r) * 4 + s];
    }
    let single_ints = FermionIntegrals::from_spatial(&h1, &eri1, 0.5 * e_core_d)?.with_n_electrons(2);
    let single = LasProblem::new(
        &single_ints,
        &FragmentSpec::new(vec![(0..4).collect()], vec![]),
        &[2],
        &EmbeddingConfig::default(),
    )?;
    let dimer = LasProblem::new(
        &h2_dimer_integrals(0.0)?,
        &h2_dimer_fragments(),
        &[2, 2],
        &EmbeddingConfig::default(),
    )?;
    let zeroth = |p: &LasProblem, n_trotter: usize| -> AnyResult<f64> {
        let cfg = QpePrepConfig {
            n_ancilla: 8,
            n_trotter,
            ..QpePrepConfig::default()
        };
        let psi = p.preparer(Scheme::Qpe, &cfg, 11)?.prepare(0)?;
        Ok(psi.expectation(&p.h_eff)? - p.las_energy()?)
    };
    for n_tr in [1usize, 2, 4] {
        let (e1, e2) = (zeroth(&single, n_tr)?, zeroth(&dimer, n_tr)?);
        let ratio = e2 / e1;
        pass &= (ratio - 2.0).abs() <= 0.2;
        parts.push(format!("n_tr={n_tr}: err2/err1 = {e2:.3e}/{e1:.3e} = {ratio:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn index_quads(m: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..m.pow(4)).map(move |x| (x / (m * m * m), x / (m * m) % m, x / m % m, x % m))
}

fn prony_round_trip() -> AnyResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 100;
    let (mut worst_e, mut worst_h, mut worst_sum) = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = 0;
    for _ in 0..trials {
        let weights: Vec<f64> = {
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|w| w / s).collect()
        };
        let thetas = loop {
            let t: Vec<f64> = (0..4).map(|_| rng.random_range(-PI + 0.05..PI - 0.05)).collect();
            let mut gap = f64::INFINITY;
            for a in 0..4 {
                for b in 0..a {
                    let d = (t[a] - t[b]).rem_euclid(2.0 * PI);
                    gap = gap.min(d.min(2.0 * PI - d));
                }
            }
            if gap >= 0.05 {
                break t;
            }
        };
        let (tau, b) = (1.0, 0.8);
        let energies: Vec<f64> = thetas.iter().map(|t| t / (b * tau)).collect();
        let series = AutocorrelationSeries::synthetic(&weights, &energies, tau, b, 20);
        let fit = prony_fit(&series, 8)?;
        worst_sum = worst_sum.max((fit.weight_sum() - c(1.0, 0.0)).norm());
        if fit.components.len() != 4 {
            bad += 1;
            continue;
        }
        for (w, e) in weights.iter().zip(&energies) {
            let best = fit
                .components
                .iter()
                .min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs()))
                .unwrap();
            worst_e = worst_e.max((best.energy - e).abs());
            worst_h = worst_h.max((best.weight() - c(*w, 0.0)).norm());
        }
    }
    let mut pass = bad == 0 && worst_e <= 1e-4 && worst_h <= 1e-4 && worst_sum <= 1e-6;

    // A reference that is not an eigenstate and overlaps mostly with an
    // excited state: the dominant fitted component must be that state.
    let h = PauliSum::from_labels(&[(-1.0, "IZ"), (-0.6, "ZI"), (0.25, "XX"), (0.1, "IX")])?;
    let psi0 = Statevector::basis(2, 0b11);
    let (vals, vecs) = eigenpairs(&kron_dense(&h));
    let weights: Vec<f64> = (0..4).map(|k| vecs[(0b11, k)].norm_sqr()).collect();
    let k_max = (0..4).max_by(|&a, &b| weights[a].total_cmp(&weights[b])).unwrap();
    let b = default_scale_factor(&h)?;
    let fit = prony_fit(&generate_series(&h, &psi0, 1.0, b, 20)?, 8)?;
    let dominant = &fit.components[0];
    let ok_dominant = k_max != 0
        && (dominant.energy - vals[k_max]).abs() <= 1e-4
        && (dominant.weight_re - weights[k_max]).abs() <= 1e-4
        && (dominant.energy - vals[0]).abs() > 1e-2;
    pass &= ok_dominant;
    outcome(
        pass,
        format!(
            "{trials} random 4-component fits: {bad} wrong counts, max |ΔE| {worst_e:.2e}, max |Δh| {worst_h:.2e}, max |Σh-1| {worst_sum:.2e}; \
             non-eigenstate toy: dominant E {:.6} (h {:.4}) vs ground {:.6}{}",
            dominant.energy,
            dominant.weight_re,
            vals[0],
            if ok_dominant { "" } else { " WRONG" }
        ),
    )
}

fn scheme_comparison() -> AnyResult<Outcome> {
    let problem = LasProblem::new(
        &h2_dimer_integrals(1.0)?,
        &h2_dimer_fragments(),
        &[2, 2],
        &EmbeddingConfig::default(),
    )?;
    let ansatz = problem.ansatz(false)?;
    // QPE settings of the published dimer runs: 4 ancillas, 6 Trotter steps.
    let qpe = QpePrepConfig {
        n_ancilla: 4,
        n_trotter: 6,
        ..QpePrepConfig::default()
    };
    let seeds = [1u64, 2, 3, 4, 5];
    let jobs: Vec<(Scheme, u64)> = [Scheme::Di, Scheme::Qpe, Scheme::Hf]
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let reports: Vec<_> = jobs
        .par_iter()
        .map(|&(scheme, seed)| {
            let opt = OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            };
            run_scheme(&problem, scheme, &ansatz, &qpe, &opt).map(|r| (scheme, r))
        })
        .collect::<Result<_, _>>()?;
    let evals = |s: Scheme| {
        median(
            reports
                .iter()
                .filter(|(x, _)| *x == s)
                .map(|(_, r)| r.run.n_function_evals)
                .collect(),
        )
    };
    let (di, qp, hf) = (evals(Scheme::Di), evals(Scheme::Qpe), evals(Scheme::Hf));
    let di_zeroth = reports
        .iter()
        .filter(|(s, _)| *s == Scheme::Di)
        .map(|(_, r)| r.zeroth_iteration_error.abs())
        .fold(0.0, f64::max);

    let trotter_steps = [1usize, 2, 4, 6, 8];
    let mut qpe_errors = Vec::new();
    for &n_trotter in &trotter_steps {
        let cfg = QpePrepConfig { n_trotter, ..qpe };
        let psi = problem.preparer(Scheme::Qpe, &cfg, 1)?.prepare(0)?;
        qpe_errors.push((psi.expectation(&problem.h_eff)? - problem.las_energy()?).abs());
    }
    let decreasing = qpe_errors.windows(2).all(|w| w[1] < w[0]);

    let checks = [
        (di <= qp, format!("median evals DI {di} <= QPE {qp}")),
        (di <= hf, format!("DI {di} <= HF {hf}")),
        (di_zeroth <= 1e-8, format!("DI zeroth error {di_zeroth:.1e} <= 1e-8")),
        (
            decreasing,
            format!(
                "QPE zeroth error over n_tr {:?}: [{}]",
                trotter_steps,
                qpe_errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
            ),
        ),
    ];
    let pass = checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| format!("{d}{}", if *ok { "" } else { " FAILED" }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn aliasing_detection() -> AnyResult<Outcome> {
    // Z with coefficient 2: default b = π/4; 2.4x that pushes φ = 0.6 past 1/2.
    let h = PauliSum::from_labels(&[(2.0, "Z")])?;
    let cfg = QpeConfig::new(&h, 5, 1)?.with_mode(UnitaryMode::Exact).with_shots(2000);
    let wrap = aliasing_scan(&h, &cfg, &[1.0, 2.4], DEFAULT_MIN_PEAK_WEIGHT)?;
    let wrap_flagged = !wrap.flagged.is_empty();

    let mut flags = [0usize; 2];
    let modes = [UnitaryMode::Exact, UnitaryMode::Trotter];
    for i in 0..50u64 {
        let h = random_pauli_sum(2 + (i % 2) as usize, 6, 1000 + i);
        for (slot, &mode) in modes.iter().enumerate() {
            let cfg = QpeConfig::new(&h, 6, 4)?
                .with_mode(mode)
                .with_b(default_scale_factor(&h)? / 3.0)
                .with_seed(i);
            let rep = aliasing_scan(&h, &cfg, &[1.0, 2.0, 3.0], DEFAULT_MIN_PEAK_WEIGHT)?;
            flags[slot] += rep.flagged.len();
        }
    }
    outcome(
        wrap_flagged && flags == [0, 0],
        format!(
            "wrap case flagged: {} ({} energies); conservative b = default/3 on 50 random Hamiltonians, multipliers 1,2,3: {} flags exact, {} flags Trotter",
            wrap_flagged,
            wrap.flagged.len(),
            flags[0],
            flags[1]
        ),
    )
}

fn oracle_equivalence() -> AnyResult<Outcome> {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst_sv, mut worst_jw, mut worst_mol, mut worst_u) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);

    // Statevector kernels versus dense gate products.
    for n in 1..=4usize {
        for _ in 0..25 {
            let mut circuit = Circuit::new(n);
            let mut oracle = CMat::identity(1 << n, 1 << n);
            for _ in 0..30 {
                let mut qubits: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    qubits.swap(i, rng.random_range(0..=i));
                }
                let theta = rng.random_range(-PI..PI);
                let (kind, n_targets) = match rng.random_range(0..11) {
                    0 => (GateKind::H, 1),
                    1 => (GateKind::X, 1),
                    2 => (GateKind::Y, 1),
                    3 => (GateKind::Z, 1),
                    4 => (GateKind::S, 1),
                    5 => (GateKind::Sdg, 1),
                    6 => (GateKind::Rz(theta), 1),
                    7 => (GateKind::Ry(theta), 1),
                    8 => (GateKind::Phase(theta), 1),
                    9 if n >= 2 => (GateKind::Swap, 2),
                    10 if n >= 2 => (GateKind::Unitary(random_unitary(4, &mut rng).into()), 2),
                    _ => (GateKind::Unitary(random_unitary(2, &mut rng).into()), 1),
                };
                let targets = qubits[..n_targets].to_vec();
                let n_controls = rng.random_range(0..=(n - n_targets).min(2));
                let controls = qubits[n_targets..n_targets + n_controls].to_vec();
                oracle = gate_oracle(&kind, &targets, &controls, n) * oracle;
                circuit.push(Gate::new(kind, targets).with_controls(controls))?;
            }
            let psi = random_state(n, &mut rng);
            let mut out = psi.clone();
            out.apply(&circuit)?;
            let want = &oracle * amplitudes(&psi);
            worst_sv = worst_sv.max((amplitudes(&out) - &want).iter().map(|z| z.norm()).fold(0.0, f64::max));
            worst_sv = worst_sv.max(max_abs(&(circuit.to_matrix(12)? - &oracle)));
        }
    }

    // Jordan-Wigner images versus ladder operators acting on occupations.
    for n in 1..=4usize {
        for _ in 0..40 {
            let len = rng.random_range(1..=4);
            let ops: Vec<LadderOp> = (0..len)
                .map(|_| LadderOp {
                    orbital: rng.random_range(0..n),
                    dagger: rng.random_bool(0.5),
                })
                .collect();
            let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let term = FermionTerm { coeff, ops: ops.clone() };
            let terms = vec![term.clone(), term.adjoint()];
            let jw = jordan_wigner(&terms, n)?.to_dense_matrix_with_offset(12)?;
            let fock = fock_matrix(coeff, &ops, n) + fock_matrix(coeff, &ops, n).adjoint();
            worst_jw = worst_jw.max(max_abs(&(jw - fock)));
        }
    }
    for (m, seeds) in [(1usize, 0..10u64), (2, 10..30)] {
        for seed in seeds {
            let (h, eri) = random_spatial_integrals(m, seed);
            let ints = FermionIntegrals::from_spatial(&h, &eri, 0.0)?;
            let spec = FragmentSpec::new(vec![(0..2 * m).collect()], vec![]);
            let jw = build_effective_hamiltonian(&ints, &spec)?.to_dense_matrix_with_offset(12)?;
            worst_mol = worst_mol.max(max_abs(&(jw - fock_hamiltonian(&ints))));
        }
    }

    // exp(iHb): unitary, commutes with H, equals the spectral exponential.
    for n in 1..=4usize {
        for seed in 0..10u64 {
            let h = random_pauli_sum(n, 3 + 2 * n, 9000 + 10 * n as u64 + seed);
            let b = rng.random_range(0.1..3.0);
            let u = exact_unitary(&h, b, 12)?;
            let hd = kron_dense(&h);
            let id = CMat::identity(1 << n, 1 << n);
            worst_u = worst_u
                .max(max_abs(&(u.adjoint() * &u - id)))
                .max(max_abs(&(&u * &hd - &hd * &u)))
                .max(max_abs(&(&u - expm_i(&hd, b))));
        }
    }

    let worst = worst_sv.max(worst_jw).max(worst_mol).max(worst_u);
    outcome(
        worst <= tol,
        format!(
            "max deviations: statevector vs dense {worst_sv:.1e}, JW vs Fock {worst_jw:.1e}, molecular H {worst_mol:.1e}, exp(iHb) {worst_u:.1e} (tol {tol:.0e})"
        ),
    )
}

// ------------------------------------------------------------------ main

type Criterion = (&'static str, Duration, fn() -> AnyResult<Outcome>);

fn main() {
    // Under `cargo test -- <filter>` style invocations the harness passes
    // extra arguments; a `--list` request gets the criterion names only.
    let args: Vec<String> = std::env::args().skip(1).collect();
    let criteria: [Criterion; 7] = [
        ("gate-count reproduction", Duration::from_secs(1), gate_counts),
        ("QPE precision law", Duration::from_secs(60), qpe_precision),
        ("Trotter convergence", Duration::from_secs(120), trotter_convergence),
        ("Prony round trip", Duration::from_secs(30), prony_round_trip),
        ("scheme comparison", Duration::from_secs(600), scheme_comparison),
        ("aliasing detection", Duration::from_secs(120), aliasing_detection),
        ("oracle equivalence", Duration::from_secs(120), oracle_equivalence),
    ];
    if args.iter().any(|a| a == "--list") {
        for (name, _, _) in &criteria {
            println!("{}: test", name.replace(' ', "_"));
        }
        return;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    println!("acceptance criteria");
    for (name, budget, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.replace(' ', "_").contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_budget = elapsed <= budget;
        let pass = pass && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {detail} ({:.2} s, budget {} s{})",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_budget { "" } else { ", OVER BUDGET" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
