//! Dense statevector simulation.
//!
//! Basis index bit `q` is the value of qubit `q`. Practical register limit is
//! around 26 qubits (1 GiB of amplitudes); nothing here enforces it beyond
//! the allocation itself.

use num_complex::Complex64;
use rand::Rng as _;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::rng;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Outcome of measuring a list of qubits. Bit `k` of `value` is the result
/// for the `k`-th listed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub value: u64,
    pub width: usize,
}

impl Outcome {
    /// Bitstring with the first listed qubit rightmost.
    pub fn bitstring(&self) -> String {
        (0..self.width)
            .rev()
            .map(|k| if self.value >> k & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn parse(bits: &str) -> Result<Outcome> {
        if bits.is_empty() || bits.len() > 64 {
            return Err(Error::invalid(format!("bad bitstring `{bits}`")));
        }
        let value = u64::from_str_radix(bits, 2)
            .map_err(|_| Error::invalid(format!("bad bitstring `{bits}`")))?;
        Ok(Outcome {
            value,
            width: bits.len(),
        })
    }
}

impl Statevector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        Statevector::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Self {
        assert!((1..40).contains(&n_qubits), "unsupported register size");
        let dim = 1usize << n_qubits;
        assert!((index as usize) < dim, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Statevector { n_qubits, amps }
    }

    /// Wraps amplitudes that are already normalized within [`NORM_TOL`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        Statevector::from_amplitudes_tol(amps, NORM_TOL)
    }

    /// Wraps amplitudes, rejecting anything whose norm is off by more than
    /// `tol`; the result is renormalized exactly.
    pub fn from_amplitudes_tol(amps: Vec<Complex64>, tol: f64) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol {
            return Err(Error::invalid(format!(
                "state norm {norm} differs from 1 by more than {tol:e}"
            )));
        }
        Statevector::from_unnormalized(amps)
    }

    /// Normalizes arbitrary nonzero amplitudes. Length must be a power of two.
    pub fn from_unnormalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("zero or non-finite state vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Statevector {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|high> ⊗ |low>`: the qubits of `low` come first (low-order bits).
    pub fn tensor(high: &Statevector, low: &Statevector) -> Statevector {
        let mut amps = Vec::with_capacity(high.dim() * low.dim());
        for h in &high.amps {
            for l in &low.amps {
                amps.push(h * l);
            }
        }
        Statevector {
            n_qubits: high.n_qubits + low.n_qubits,
            amps,
        }
    }

    /// Product state of `parts`, with `parts[0]` on the lowest qubits.
    pub fn product(parts: &[Statevector]) -> Result<Statevector> {
        let mut it = parts.iter();
        let mut acc = it
            .next()
            .ok_or_else(|| Error::invalid("empty product"))?
            .clone();
        for p in it {
            acc = Statevector::tensor(p, &acc);
        }
        Ok(acc)
    }

    /// Applies `circuit` in place.
    pub fn apply(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: circuit.n_qubits(),
            });
        }
        for g in circuit.gates() {
            g.apply_to(&mut self.amps);
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Statevector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// In-place `exp(i theta P)` without compiling to gates.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        if let Some(q) = p.max_qubit() {
            if q >= self.n_qubits {
                return Err(Error::invalid(format!(
                    "Pauli string acts on qubit {q} of a {}-qubit state",
                    self.n_qubits
                )));
            }
        }
        let (c, s) = (theta.cos(), theta.sin());
        if p.is_identity() {
            let ph = Complex64::new(c, s);
            self.amps.iter_mut().for_each(|a| *a *= ph);
            return Ok(());
        }
        let old = self.amps.clone();
        for (b, amp) in old.iter().enumerate() {
            let (ph, b2) = p.apply_to_basis(b as u64);
            let b2 = b2 as usize;
            self.amps[b2] = c * old[b2] + Complex64::new(0.0, s) * ph * amp;
        }
        Ok(())
    }

    /// `<psi|H|psi> + identity_offset`.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: h.n_qubits(),
            });
        }
        h.ensure_hermitian()?;
        let mut total = Complex64::new(0.0, 0.0);
        for (p, c) in h.terms() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, amp) in self.amps.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let (ph, b2) = p.apply_to_basis(b as u64);
                acc += self.amps[b2 as usize].conj() * ph * amp;
            }
            total += c * acc;
        }
        Ok(total.re + h.identity_offset())
    }

    /// Marginal distribution of `qubits`; entry `v` is the probability of the
    /// outcome whose bit `k` is the value of `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let mut probs = vec![0.0; 1usize << qubits.len()];
        for (b, a) in self.amps.iter().enumerate() {
            probs[extract_bits(b, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Projects onto `outcome` for `qubits` and renormalizes.
    pub fn collapse(&self, qubits: &[usize], outcome: u64) -> Result<Statevector> {
        self.check_qubits(qubits)?;
        let mut amps = self.amps.clone();
        for (b, a) in amps.iter_mut().enumerate() {
            if extract_bits(b, qubits) as u64 != outcome {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-150 {
            return Err(Error::Numeric(format!(
                "outcome {outcome} has zero probability"
            )));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Statevector {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// Reduced state of `keep` after measuring the remaining qubits with
    /// the given outcome. `keep` qubits map to `0..keep.len()` in order.
    pub fn extract(&self, keep: &[usize], others: &[usize], outcome: u64) -> Result<Statevector> {
        let collapsed = self.collapse(others, outcome)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << keep.len()];
        for (b, a) in collapsed.amps.iter().enumerate() {
            if extract_bits(b, others) as u64 == outcome {
                amps[extract_bits(b, keep)] += a;
            }
        }
        Statevector::from_unnormalized(amps)
    }

    /// Samples an outcome for `qubits` from `rng` and collapses onto it.
    pub fn measure_with(&self, qubits: &[usize], rng: &mut rng::Rng) -> Result<(Outcome, Statevector)> {
        if qubits.is_empty() {
            return Err(Error::invalid("measure needs at least one qubit"));
        }
        let probs = self.marginal(qubits)?;
        let value = sample_index(&probs, rng) as u64;
        let out = Outcome {
            value,
            width: qubits.len(),
        };
        Ok((out, self.collapse(qubits, value)?))
    }

    /// Seeded measurement; identical seeds give identical outcomes.
    pub fn measure(&self, qubits: &[usize], seed: u64) -> Result<(Outcome, Statevector)> {
        self.measure_with(qubits, &mut rng::seeded(seed))
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        let mut seen = 0u64;
        for &q in qubits {
            if q >= self.n_qubits || seen >> q & 1 == 1 {
                return Err(Error::invalid(format!("bad qubit list {qubits:?}")));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    /// Versioned text form: a header, `n_qubits N`, then one `re im` line per
    /// basis state in ascending index order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# fragprep statevector v1\n");
        out.push_str(&format!("n_qubits {}\n", self.n_qubits));
        for a in &self.amps {
            out.push_str(&format!("{} {}\n", crate::numfmt::sig(a.re), crate::numfmt::sig(a.im)));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Statevector> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l.starts_with("# fragprep statevector v1") => {}
            Some((n, _)) => return Err(Error::parse(n, "missing `# fragprep statevector v1` header")),
            None => return Err(Error::parse(0, "empty statevector file")),
        }
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing n_qubits line"))?;
        let n: usize = l
            .strip_prefix("n_qubits")
            .and_then(|r| r.trim().parse().ok())
            .filter(|&n| (1..40).contains(&n))
            .ok_or_else(|| Error::parse(ln, "expected `n_qubits <n>`"))?;
        let mut amps = Vec::with_capacity(1 << n);
        for (ln, l) in lines {
            if l.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::parse(ln, "expected `<re> <im>`"));
            }
            let re: f64 = f[0].parse().map_err(|_| Error::parse(ln, "bad real part"))?;
            let im: f64 = f[1].parse().map_err(|_| Error::parse(ln, "bad imaginary part"))?;
            amps.push(Complex64::new(re, im));
        }
        if amps.len() != 1 << n {
            return Err(Error::parse(
                0,
                format!("expected {} amplitudes, found {}", 1usize << n, amps.len()),
            ));
        }
        Statevector::from_amplitudes_tol(amps, 1e-8)
    }
}

/// Free-function form of [`Statevector::apply`].
pub fn apply(state: &Statevector, circuit: &Circuit) -> Result<Statevector> {
    let mut s = state.clone();
    s.apply(circuit)?;
    Ok(s)
}

pub(crate) fn extract_bits(b: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .map(|(k, &q)| (b >> q & 1) << k)
        .sum()
}

pub(crate) fn sample_index(probs: &[f64], rng: &mut rng::Rng) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
