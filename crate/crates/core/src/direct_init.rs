//! Direct initialization: compile a classical statevector into a circuit of
//! uniformly controlled Ry/Rz rotations.
//!
//! The amplitude tree is reduced bottom-up. Pairs differing in qubit `q`
//! become `r e^{it} Rz(φ) Ry(θ) |0⟩` with
//! `θ = 2 atan2(|a1|, |a0|)`, `φ = arg a1 - arg a0`, `t = (arg a0 + arg a1)/2`,
//! and the `r e^{it}` values form the next level. Preparation runs top-down:
//! qubit `n-1` first, then each lower qubit gets a multiplexed Ry and Rz
//! controlled by all higher qubits. A multiplexor with `c` controls lowers to
//! `2^c` single-qubit rotations and `2^c` CNOTs in Gray-code order, so the
//! whole circuit holds at most `2^{n+1} - 4` CNOTs. Real targets use signed
//! Ry angles only, which halves that.
//!
//! CI vectors map to statevectors by the Jordan-Wigner rule: an occupation
//! string (rightmost character = spin orbital 0, `1` occupied) is the basis
//! state `a†_{p1} a†_{p2} … |vac⟩` with `p1 < p2 < …`, i.e. the basis index
//! with those bits set and no extra sign.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind, Pass, Provenance, Role};
use crate::error::{Error, Result};
use crate::statevector::Statevector;

/// Amplitudes below this magnitude are treated as exact zeros.
pub const ZERO_AMPLITUDE: f64 = 1e-14;
/// Norm tolerance for raw amplitude input.
pub const INPUT_NORM_TOL: f64 = 1e-8;

/// Closed-form CNOT count `4^N - (3/2) 2^N` of generic N-qubit
/// initialization.
pub fn di_cnot_count(n_qubits: u32) -> Result<u64> {
    if n_qubits < 1 {
        return Err(Error::invalid("direct initialization needs at least one qubit"));
    }
    if n_qubits > 31 {
        return Err(Error::invalid("qubit count too large for a 64-bit CNOT count"));
    }
    Ok((1u64 << (2 * n_qubits)) - 3 * (1u64 << (n_qubits - 1)))
}

/// Upper bound on the CNOTs emitted by [`compile_initializer`].
pub fn compiled_cnot_bound(n_qubits: usize) -> u64 {
    if n_qubits <= 1 {
        0
    } else {
        (1u64 << (n_qubits + 1)) - 4
    }
}

/// Circuit mapping `|0…0⟩` to `target` up to a global phase.
pub fn compile_initializer(target: &Statevector) -> Result<Circuit> {
    compile_amplitudes(target.amplitudes(), target.n_qubits())
}

/// As [`compile_initializer`] on a raw amplitude list, which must have norm
/// 1 within [`INPUT_NORM_TOL`].
pub fn compile_initializer_amplitudes(amps: &[Complex64]) -> Result<Circuit> {
    let n = amps.len().trailing_zeros() as usize;
    if amps.is_empty() || amps.len() != 1 << n || n == 0 {
        return Err(Error::invalid("amplitude count must be a power of two ≥ 2"));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("zero vector"));
    }
    if (norm - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::invalid(format!("target has norm {norm}, expected 1")));
    }
    compile_amplitudes(amps, n)
}

fn compile_amplitudes(amps: &[Complex64], n: usize) -> Result<Circuit> {
    let prov = Provenance::new(Pass::Initialize, Role::Plain);
    let mut circuit = Circuit::new(n);
    let cleaned: Vec<Complex64> = amps
        .iter()
        .map(|&a| if a.norm() < ZERO_AMPLITUDE { Complex64::new(0.0, 0.0) } else { a })
        .collect();

    let nonzero: Vec<usize> = (0..cleaned.len()).filter(|&i| cleaned[i].norm() > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::invalid("zero vector"));
    }
    if nonzero.len() == 1 {
        for q in 0..n {
            if nonzero[0] >> q & 1 == 1 {
                circuit.push(Gate::single(GateKind::X, q).tagged(prov))?;
            }
        }
        return Ok(circuit);
    }

    // levels[q] holds (θ, φ) for each value of the qubits above q.
    let mut levels: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);
    // Real targets take signed angles and need no Rz stage.
    let real = cleaned.iter().all(|a| a.im == 0.0);
    let mut current = cleaned;
    for _ in 0..n {
        let half = current.len() / 2;
        let mut thetas = Vec::with_capacity(half);
        let mut phis = Vec::with_capacity(half);
        let mut next = Vec::with_capacity(half);
        for j in 0..half {
            let (a0, a1) = (current[2 * j], current[2 * j + 1]);
            let (m0, m1) = (a0.norm(), a1.norm());
            let r = m0.hypot(m1);
            if r == 0.0 {
                thetas.push(0.0);
                phis.push(0.0);
                next.push(Complex64::new(0.0, 0.0));
                continue;
            }
            if real {
                thetas.push(2.0 * a1.re.atan2(a0.re));
                phis.push(0.0);
                next.push(Complex64::new(r, 0.0));
                continue;
            }
            let w0 = if m0 > 0.0 { a0.arg() } else { 0.0 };
            let w1 = if m1 > 0.0 { a1.arg() } else { w0 };
            let w0 = if m0 > 0.0 { w0 } else { w1 };
            thetas.push(2.0 * m1.atan2(m0));
            phis.push(w1 - w0);
            next.push(Complex64::from_polar(r, 0.5 * (w0 + w1)));
        }
        levels.push((thetas, phis));
        current = next;
    }

    for q in (0..n).rev() {
        let (thetas, phis) = &levels[q];
        let controls: Vec<usize> = (q + 1..n).collect();
        if thetas.iter().any(|&t| t != 0.0) {
            multiplexed_rotation(&mut circuit, Axis::Y, q, &controls, thetas, prov)?;
        }
        if phis.iter().any(|&p| p != 0.0) {
            multiplexed_rotation(&mut circuit, Axis::Z, q, &controls, phis, prov)?;
        }
    }
    Ok(circuit)
}

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Appends a rotation on `target` whose angle is `angles[j]` when the
/// controls read `j` (bit `m` of `j` is `controls[m]`).
fn multiplexed_rotation(
    circuit: &mut Circuit,
    axis: Axis,
    target: usize,
    controls: &[usize],
    angles: &[f64],
    prov: Provenance,
) -> Result<()> {
    let k = controls.len();
    let dim = 1usize << k;
    debug_assert_eq!(angles.len(), dim);
    let rot = |beta: f64| match axis {
        Axis::Y => GateKind::Ry(beta),
        Axis::Z => GateKind::Rz(beta),
    };
    if k == 0 {
        circuit.push(Gate::single(rot(angles[0]), target).tagged(prov))?;
        return Ok(());
    }
    // angles[j] = Σ_i (-1)^{|j & gray(i)|} β_i; the sign matrix is orthogonal
    // up to a factor 2^k.
    let betas: Vec<f64> = (0..dim)
        .map(|i| {
            let g = gray(i);
            (0..dim)
                .map(|j| {
                    if (j & g).count_ones() % 2 == 1 {
                        -angles[j]
                    } else {
                        angles[j]
                    }
                })
                .sum::<f64>()
                / dim as f64
        })
        .collect();
    for i in 0..dim {
        if betas[i].abs() > 1e-15 {
            circuit.push(Gate::single(rot(betas[i]), target).tagged(prov))?;
        }
        let flip = (gray(i) ^ gray((i + 1) % dim)).trailing_zeros() as usize;
        circuit.push(Gate::cnot(controls[flip], target).tagged(prov))?;
    }
    Ok(())
}

/// Statevector on `n` qubits from `(coefficient, occupation string)` pairs;
/// the result is normalized.
pub fn ci_vector_to_state(entries: &[(Complex64, String)], n: usize) -> Result<Statevector> {
    if n == 0 || n > 30 {
        return Err(Error::invalid(format!("{n} spin orbitals is outside 1..=30")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (c, occ) in entries {
        if occ.chars().count() != n {
            return Err(Error::invalid(format!(
                "occupation `{occ}` does not have {n} characters"
            )));
        }
        let mut idx = 0usize;
        for (q, ch) in occ.chars().rev().enumerate() {
            match ch {
                '1' => idx |= 1 << q,
                '0' => {}
                _ => return Err(Error::invalid(format!("bad occupation character `{ch}`"))),
            }
        }
        amps[idx] += c;
    }
    Statevector::from_unnormalized(amps)
}

/// Parses a CI vector file: one determinant per line as `coef occupation`
/// or `re im occupation`; `#` starts a comment.
pub fn parse_ci_vector(text: &str) -> Result<Statevector> {
    let mut entries = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(idx + 1, format!("non-numeric coefficient `{s}`")))
        };
        let (c, occ) = match f.as_slice() {
            [re, occ] => (Complex64::new(num(re)?, 0.0), *occ),
            [re, im, occ] => (Complex64::new(num(re)?, num(im)?), *occ),
            _ => return Err(Error::parse(idx + 1, "expected `coef occupation` or `re im occupation`")),
        };
        let w = occ.chars().count();
        if *width.get_or_insert(w) != w {
            return Err(Error::parse(idx + 1, "occupation strings differ in length"));
        }
        entries.push((c, occ.to_string()));
    }
    let n = width.ok_or_else(|| Error::parse(0, "empty CI vector"))?;
    ci_vector_to_state(&entries, n)
}
