//! Pauli strings and weighted Pauli sums.
//!
//! A [`PauliString`] is stored as a pair of bit masks: bit `q` of `x` is set
//! for X or Y on qubit `q`, bit `q` of `z` for Z or Y. Qubit 0 is the least
//! significant bit of a basis-state label and the rightmost character of the
//! text form, so `"ZI"` is Z on qubit 1.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numfmt;

/// Coefficients smaller than this (in magnitude) are dropped by [`PauliSum::combine`].
pub const DROP_TOL: f64 = 1e-14;
/// Largest imaginary part tolerated in a Hermitian sum.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default qubit cap for dense-matrix oracles.
pub const DEFAULT_ORACLE_CAP: usize = 12;
/// Hard limit imposed by the 64-bit mask representation.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Single-qubit product `self * other` as `(phase, result)`.
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, Z) => (i, X),
            (Z, X) => (i, Y),
            (Y, X) => (-i, Z),
            (Z, Y) => (-i, X),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }
}

/// A tensor product of single-qubit Paulis without a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn from_masks(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    /// Builds a string from per-qubit axes, `axes[q]` acting on qubit `q`.
    pub fn from_axes(axes: &[Pauli]) -> Self {
        assert!(axes.len() <= MAX_QUBITS, "at most 64 qubits");
        let mut s = PauliString::IDENTITY;
        for (q, &p) in axes.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Builds a string from sparse `(qubit, axis)` pairs.
    pub fn from_sparse(ops: &[(usize, Pauli)]) -> Self {
        let mut s = PauliString::IDENTITY;
        for &(q, p) in ops {
            s.set(q, p);
        }
        s
    }

    /// Parses a label such as `"ZZIX"`; the rightmost character is qubit 0.
    pub fn parse_label(label: &str) -> Option<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.is_empty() || chars.len() > MAX_QUBITS {
            return None;
        }
        let mut s = PauliString::IDENTITY;
        for (q, &c) in chars.iter().rev().enumerate() {
            s.set(q, Pauli::from_char(c)?);
        }
        Some(s)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < MAX_QUBITS, "qubit index {q} out of range");
        let (x, z) = p.bits();
        let bit = 1u64 << q;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut m = self.support_mask();
        let mut out = Vec::with_capacity(m.count_ones() as usize);
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            out.push(q);
            m &= m - 1;
        }
        out
    }

    /// Index of the highest non-identity qubit.
    pub fn max_qubit(&self) -> Option<usize> {
        let m = self.support_mask();
        (m != 0).then(|| 63 - m.leading_zeros() as usize)
    }

    /// Label of length `n`, qubit 0 rightmost.
    pub fn label(&self, n: usize) -> String {
        (0..n).rev().map(|q| self.get(q).as_char()).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti.is_multiple_of(2)
    }

    /// Product `self * other` as `(phase, string)`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut m = self.support_mask() & other.support_mask();
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            let (ph, _) = self.get(q).mul(other.get(q));
            phase *= ph;
            m &= m - 1;
        }
        let out = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        (phase, out)
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let y_count = (self.x & self.z).count_ones();
        let sign_count = (b & self.z).count_ones();
        let mut phase = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if sign_count % 2 == 1 {
            phase = -phase;
        }
        (phase, b ^ self.x)
    }

    /// Lexicographic comparison of the text labels of length `n`.
    pub fn cmp_label(&self, other: &PauliString, n: usize) -> Ordering {
        self.label(n).cmp(&other.label(n))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.x, self.z).cmp(&(other.x, other.z))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A weighted sum of Pauli strings over a fixed register.
///
/// `identity_offset` holds the coefficient removed by
/// [`PauliSum::subtract_identity`]; expectation values and energies add it back.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(PauliString, Complex64)>,
    identity_offset: f64,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            "register size must be in 1..=64"
        );
        PauliSum {
            n_qubits,
            terms: Vec::new(),
            identity_offset: 0.0,
        }
    }

    /// Raw constructor; duplicates are kept until [`combine`](Self::combine).
    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Self {
        let mut s = PauliSum::new(n_qubits);
        for (p, c) in terms {
            s.push(p, c);
        }
        s
    }

    /// Convenience constructor from `(real coefficient, label)` pairs.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, l)| l.chars().count())
            .ok_or_else(|| Error::invalid("empty term list"))?;
        let mut s = PauliSum::new(n);
        for &(c, label) in terms {
            if label.chars().count() != n {
                return Err(Error::invalid(format!("label {label} has wrong length")));
            }
            let p = PauliString::parse_label(label)
                .ok_or_else(|| Error::invalid(format!("bad Pauli label {label}")))?;
            s.push(p, Complex64::new(c, 0.0));
        }
        Ok(s)
    }

    pub fn push(&mut self, p: PauliString, c: Complex64) {
        if let Some(q) = p.max_qubit() {
            assert!(q < self.n_qubits, "term acts outside the register");
        }
        self.terms.push((p, c));
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliString, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    pub fn set_identity_offset(&mut self, offset: f64) {
        self.identity_offset = offset;
    }

    pub fn add_identity_offset(&mut self, delta: f64) {
        self.identity_offset += delta;
    }

    /// Coefficient of the all-I string (summed over duplicates).
    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|(p, _)| p.is_identity())
            .map(|(_, c)| *c)
            .sum()
    }

    /// Merges duplicate strings and drops coefficients below [`DROP_TOL`].
    /// Terms come out sorted by mask order.
    pub fn combine(&self) -> PauliSum {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|a| a.0);
        let mut merged: Vec<(PauliString, Complex64)> = Vec::with_capacity(terms.len());
        for (p, c) in terms {
            match merged.last_mut() {
                Some((q, acc)) if *q == p => *acc += c,
                _ => merged.push((p, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() >= DROP_TOL);
        PauliSum {
            n_qubits: self.n_qubits,
            terms: merged,
            identity_offset: self.identity_offset,
        }
    }

    /// Removes the all-I term and moves its (real) coefficient into
    /// `identity_offset`.
    pub fn subtract_identity(&self) -> PauliSum {
        let id = self.identity_coefficient();
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| !p.is_identity())
                .cloned()
                .collect(),
            identity_offset: self.identity_offset + id.re,
        }
    }

    /// Sum of coefficient magnitudes, an upper bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imag() <= HERMITIAN_TOL
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                max_imag: self.max_imag(),
            })
        }
    }

    /// Every coefficient multiplied by `factor`; the offset is scaled too.
    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
            identity_offset: self.identity_offset * factor,
        }
    }

    /// Concatenation of the two term lists (not combined).
    pub fn union(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(PauliSum {
            n_qubits: self.n_qubits,
            terms,
            identity_offset: self.identity_offset + other.identity_offset,
        })
    }

    /// Operator product, combined.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut out = PauliSum::new(self.n_qubits);
        let a = self.with_offset_as_term();
        let b = other.with_offset_as_term();
        for (p, c) in &a.terms {
            for (q, d) in &b.terms {
                let (ph, r) = p.mul(q);
                out.terms.push((r, ph * c * d));
            }
        }
        Ok(out.combine())
    }

    /// Same operator with `identity_offset` folded back into an all-I term.
    pub fn with_offset_as_term(&self) -> PauliSum {
        let mut s = self.clone();
        if s.identity_offset != 0.0 {
            s.terms
                .push((PauliString::IDENTITY, Complex64::new(s.identity_offset, 0.0)));
            s.identity_offset = 0.0;
        }
        s
    }

    /// Terms sorted by descending |coefficient|, ties broken by label.
    pub fn sorted_by_magnitude(&self) -> Vec<(PauliString, Complex64)> {
        let mut t = self.terms.clone();
        let n = self.n_qubits;
        t.sort_by(|a, b| {
            b.1.norm()
                .partial_cmp(&a.1.norm())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.cmp_label(&b.0, n))
        });
        t
    }

    /// Dense `2^n x 2^n` matrix of the terms (the identity offset is *not*
    /// included).
    pub fn to_dense_matrix(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::SizeCap {
                what: "dense matrix",
                requested: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, c) in &self.terms {
            for col in 0..dim {
                let (ph, row) = p.apply_to_basis(col as u64);
                m[(row as usize, col)] += ph * c;
            }
        }
        Ok(m)
    }

    /// Dense matrix including `identity_offset` on the diagonal.
    pub fn to_dense_matrix_with_offset(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let mut m = self.to_dense_matrix(cap)?;
        for i in 0..m.nrows() {
            m[(i, i)] += Complex64::new(self.identity_offset, 0.0);
        }
        Ok(m)
    }

    /// Text form: one `<real> <imag> <axes>` line per term. A nonzero
    /// identity offset is written as an all-I term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# fragprep pauli-sum v1, {} qubits, qubit 0 rightmost\n",
            self.n_qubits
        ));
        if self.identity_offset != 0.0 {
            out.push_str(&format!(
                "{} 0 {}\n",
                numfmt::sig(self.identity_offset),
                PauliString::IDENTITY.label(self.n_qubits)
            ));
        }
        for (p, c) in &self.terms {
            out.push_str(&format!(
                "{} {} {}\n",
                numfmt::sig(c.re),
                numfmt::sig(c.im),
                p.label(self.n_qubits)
            ));
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are skipped; every
    /// axes string must have the same length. Duplicates are kept.
    pub fn parse_text(text: &str) -> Result<PauliSum> {
        let mut n: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    line_no,
                    format!("expected `<real> <imag> <axes>`, got {} fields", fields.len()),
                ));
            }
            let re: f64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad real part `{}`", fields[0])))?;
            let im: f64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad imaginary part `{}`", fields[1])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::parse(line_no, "non-finite coefficient"));
            }
            let len = fields[2].chars().count();
            let p = PauliString::parse_label(fields[2])
                .ok_or_else(|| Error::parse(line_no, format!("bad axes string `{}`", fields[2])))?;
            match n {
                None => n = Some(len),
                Some(m) if m != len => {
                    return Err(Error::parse(
                        line_no,
                        format!("axes string has {len} qubits, expected {m}"),
                    ))
                }
                _ => {}
            }
            terms.push((p, Complex64::new(re, im)));
        }
        let n = n.ok_or_else(|| Error::parse(0, "no terms found"))?;
        Ok(PauliSum::from_terms(n, terms))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
