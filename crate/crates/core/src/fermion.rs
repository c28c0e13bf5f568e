//! Electronic-structure integrals, fragment partitions and the Jordan-Wigner
//! map to qubit operators.
//!
//! Spin orbital `p = 2P + σ` for spatial orbital `P` (σ = 0 alpha, 1 beta).
//! The two-electron tensor is stored antisymmetrized in the physicist form
//! `g_ij^kl = <kl||ij> = <kl|ij> - <kl|ji>`, so the electronic Hamiltonian is
//!
//! ```text
//! H = Σ_ij h_ij a†_j a_i + 1/4 Σ_ijkl g_ij^kl a†_k a†_l a_j a_i
//! ```
//!
//! and the mean-field term `Σ_u g_iu^ju` contains both Coulomb and exchange.
//!
//! # FCIDUMP grammar
//!
//! ```text
//! &FCI NORB=2,NELEC=2,MS2=0,ORBSYM=1,1,ISYM=1 &END     (or a closing "/")
//! value i j k l                                         one record per line
//! ```
//!
//! Indices are 1-based spatial orbitals, integrals are chemist-ordered
//! `(ij|kl)` over real orbitals. `i j k l` all nonzero is a two-electron
//! integral, `i j 0 0` a one-electron integral, `0 0 0 0` the core energy and
//! `i 0 0 0` an orbital energy (ignored). Each record fills its whole
//! symmetry class (8-fold for two-electron, 2-fold for one-electron); later
//! records overwrite earlier ones. Blank lines and lines starting with `!` or
//! `#` are skipped.
//!
//! # Fragment config (TOML)
//!
//! ```toml
//! inactive = [0, 1]
//!
//! [[fragment]]
//! orbitals = [2, 3, 4, 5]
//! gamma = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
//!
//! [[fragment]]
//! orbitals = [6, 7, 8, 9]
//! gamma_file = "frag1_gamma.txt"   # whitespace-separated rows
//! ```
//!
//! A fragment without `gamma`/`gamma_file` gets a zero block.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, CMatrix};
use crate::pauli::{PauliString, PauliSum, MAX_QUBITS};
use crate::statevector::Statevector;

/// Tolerance for the symmetry checks on `h` and `g`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance for the γ eigenvalue window `[0, 1]`.
pub const GAMMA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FermionIntegrals {
    n: usize,
    h: DMatrix<f64>,
    g: Vec<f64>,
    e_core: f64,
    n_electrons: Option<usize>,
}

impl FermionIntegrals {
    /// Builds from spin-orbital `h` and flat `g` (row-major over `i, j, k, l`).
    /// Checks `h` symmetry and the antisymmetry/Hermiticity of `g`.
    pub fn new(h: DMatrix<f64>, g: Vec<f64>, e_core: f64) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::invalid("h must be a non-empty square matrix"));
        }
        if g.len() != n.pow(4) {
            return Err(Error::SizeMismatch {
                expected: n.pow(4),
                found: g.len(),
            });
        }
        let ints = FermionIntegrals {
            n,
            h,
            g,
            e_core,
            n_electrons: None,
        };
        ints.validate()?;
        Ok(ints)
    }

    /// Spin-orbital integrals from spatial `h_PQ` and chemist-ordered
    /// `(PQ|RS)` (flat, row-major).
    pub fn from_spatial(h: &DMatrix<f64>, eri: &[f64], e_core: f64) -> Result<Self> {
        let m = h.nrows();
        if h.ncols() != m || eri.len() != m.pow(4) {
            return Err(Error::invalid("spatial integral dimensions disagree"));
        }
        let n = 2 * m;
        let chem = |p: usize, q: usize, r: usize, s: usize| eri[((p * m + q) * m + r) * m + s];
        let hs = DMatrix::from_fn(n, n, |i, j| {
            if i % 2 == j % 2 {
                h[(i / 2, j / 2)]
            } else {
                0.0
            }
        });
        let mut g = vec![0.0; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        if k % 2 == i % 2 && l % 2 == j % 2 {
                            v += chem(k / 2, i / 2, l / 2, j / 2);
                        }
                        if k % 2 == j % 2 && l % 2 == i % 2 {
                            v -= chem(k / 2, j / 2, l / 2, i / 2);
                        }
                        g[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        FermionIntegrals::new(hs, g, e_core)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                if (self.h[(i, j)] - self.h[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!("h is not symmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.g(i, j, k, l);
                        let checks = [
                            (-self.g(j, i, k, l), "g_ij^kl = -g_ji^kl"),
                            (-self.g(i, j, l, k), "g_ij^kl = -g_ij^lk"),
                            (self.g(k, l, i, j), "g_ij^kl = g_kl^ij"),
                        ];
                        for (w, what) in checks {
                            if (v - w).abs() > SYMMETRY_TOL {
                                return Err(Error::invalid(format!(
                                    "two-electron tensor violates {what} at ({i}, {j}, {k}, {l})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[(i, j)]
    }

    pub fn h_matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// `g_ij^kl`, the coefficient of `a†_k a†_l a_j a_i` (times 1/4).
    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.g[((i * n + j) * n + k) * n + l]
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    pub fn n_electrons(&self) -> Option<usize> {
        self.n_electrons
    }

    pub fn with_n_electrons(mut self, n_electrons: usize) -> Self {
        self.n_electrons = Some(n_electrons);
        self
    }

    /// `e_core` plus the energy of the fully occupied inactive determinant,
    /// `Σ_u h_uu + 1/2 Σ_uv g_uv^uv`.
    pub fn core_energy(&self, inactive: &[usize]) -> f64 {
        let mut e = self.e_core;
        for &u in inactive {
            e += self.h(u, u);
            for &v in inactive {
                e += 0.5 * self.g(u, v, u, v);
            }
        }
        e
    }
}

/// Parses FCIDUMP text (grammar in the module docs).
pub fn parse_fcidump(text: &str) -> Result<FermionIntegrals> {
    let mut header = String::new();
    let mut body_start = None;
    let mut header_started = false;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if !header_started {
            if trimmed.is_empty() {
                continue;
            }
            if !trimmed.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::parse(idx + 1, "expected &FCI header"));
            }
            header_started = true;
        }
        header.push(' ');
        header.push_str(trimmed);
        let upper = trimmed.to_ascii_uppercase();
        if upper.ends_with("&END") || upper.ends_with('/') || upper == "&END" {
            body_start = Some(idx + 1);
            break;
        }
    }
    let body_start = body_start.ok_or_else(|| {
        Error::parse(text.lines().count().max(1), "header is not terminated by &END or /")
    })?;

    let (norb, nelec) = parse_header(&header)?;
    let m = norb;
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut eri = vec![0.0; m.pow(4)];
    let mut e_core = 0.0;
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;

    for (idx, line) in text.lines().enumerate().skip(body_start) {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('!') || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                lineno,
                format!("expected `value i j k l`, found {} fields", fields.len()),
            ));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-numeric value `{}`", fields[0])))?;
        let mut idxs = [0usize; 4];
        for (slot, f) in idxs.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-integer index `{f}`")))?;
            if *slot > m {
                return Err(Error::parse(
                    lineno,
                    format!("orbital index {slot} exceeds NORB={m}"),
                ));
            }
        }
        match idxs {
            [0, 0, 0, 0] => e_core = value,
            [_, 0, 0, 0] => {}
            [i, j, 0, 0] if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = value;
                h[(j - 1, i - 1)] = value;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                for (a, b, c, d) in [
                    (p, q, r, s),
                    (q, p, r, s),
                    (p, q, s, r),
                    (q, p, s, r),
                    (r, s, p, q),
                    (s, r, p, q),
                    (r, s, q, p),
                    (s, r, q, p),
                ] {
                    eri[at(a, b, c, d)] = value;
                }
            }
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("index pattern {idxs:?} is not a recognised record"),
                ))
            }
        }
    }
    let ints = FermionIntegrals::from_spatial(&h, &eri, e_core)?;
    Ok(match nelec {
        Some(ne) => ints.with_n_electrons(ne),
        None => ints,
    })
}

fn parse_header(header: &str) -> Result<(usize, Option<usize>)> {
    let cleaned = header
        .replace(['&', '/'], " ")
        .replace(',', " ");
    let mut norb = None;
    let mut nelec = None;
    for tok in cleaned.split_whitespace() {
        if let Some((key, val)) = tok.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(1, format!("bad {key} value `{v}`")))
            };
            match key.as_str() {
                "NORB" => norb = Some(parse(val)?),
                "NELEC" => nelec = Some(parse(val)?),
                _ => {}
            }
        }
    }
    let norb = norb.ok_or_else(|| Error::parse(1, "header lacks NORB"))?;
    if norb == 0 || 2 * norb > MAX_QUBITS {
        return Err(Error::parse(1, format!("NORB={norb} out of range")));
    }
    Ok((norb, nelec))
}

/// Partition of spin orbitals into fragment active spaces and an inactive
/// (doubly occupied) set, plus the 1-RDM block of each fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentSpec {
    pub fragment_orbitals: Vec<Vec<usize>>,
    pub inactive_orbitals: Vec<usize>,
    pub gamma: Vec<DMatrix<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    inactive: Vec<usize>,
    fragment: Vec<RawFragment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFragment {
    orbitals: Vec<usize>,
    gamma: Option<Vec<Vec<f64>>>,
    gamma_file: Option<String>,
}

impl FragmentSpec {
    /// Fragments with zero γ blocks.
    pub fn new(fragment_orbitals: Vec<Vec<usize>>, inactive_orbitals: Vec<usize>) -> Self {
        let gamma = fragment_orbitals
            .iter()
            .map(|f| DMatrix::zeros(f.len(), f.len()))
            .collect();
        FragmentSpec {
            fragment_orbitals,
            inactive_orbitals,
            gamma,
        }
    }

    pub fn with_gamma(mut self, k: usize, gamma: DMatrix<f64>) -> Self {
        self.gamma[k] = gamma;
        self
    }

    /// Parses the TOML form; `gamma_file` paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut fragments = Vec::new();
        let mut gammas = Vec::new();
        for (k, f) in raw.fragment.into_iter().enumerate() {
            let d = f.orbitals.len();
            let gamma = match (f.gamma, f.gamma_file) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!(
                        "fragment {k} gives both gamma and gamma_file"
                    )))
                }
                (Some(rows), None) => rows_to_matrix(&rows, k)?,
                (None, Some(file)) => {
                    let path = match base_dir {
                        Some(dir) => dir.join(&file),
                        None => file.into(),
                    };
                    parse_matrix_text(&crate::error::read_text(path)?)?
                }
                (None, None) => DMatrix::zeros(d, d),
            };
            fragments.push(f.orbitals);
            gammas.push(gamma);
        }
        Ok(FragmentSpec {
            fragment_orbitals: fragments,
            inactive_orbitals: raw.inactive,
            gamma: gammas,
        })
    }

    pub fn n_fragments(&self) -> usize {
        self.fragment_orbitals.len()
    }

    /// Concatenated fragment orbitals, the qubit order of `H_eff`.
    pub fn active_orbitals(&self) -> Vec<usize> {
        self.fragment_orbitals.iter().flatten().copied().collect()
    }

    /// First qubit of fragment `k` inside the concatenated register.
    pub fn fragment_offset(&self, k: usize) -> usize {
        self.fragment_orbitals[..k].iter().map(Vec::len).sum()
    }

    pub fn validate(&self, n_spin_orbitals: usize) -> Result<()> {
        if self.fragment_orbitals.is_empty() {
            return Err(Error::invalid("no fragments given"));
        }
        if self.gamma.len() != self.fragment_orbitals.len() {
            return Err(Error::invalid("one gamma block per fragment is required"));
        }
        let mut owner = vec![None::<String>; n_spin_orbitals];
        let groups = self
            .fragment_orbitals
            .iter()
            .enumerate()
            .map(|(k, f)| (format!("fragment {k}"), f))
            .chain(std::iter::once(("inactive set".to_string(), &self.inactive_orbitals)));
        for (name, orbs) in groups {
            for &p in orbs {
                if p >= n_spin_orbitals {
                    return Err(Error::invalid(format!(
                        "{name} lists orbital {p}, only {n_spin_orbitals} exist"
                    )));
                }
                if let Some(prev) = &owner[p] {
                    return Err(Error::invalid(format!(
                        "orbital {p} appears in both {prev} and {name}"
                    )));
                }
                owner[p] = Some(name.clone());
            }
        }
        for (k, (orbs, gamma)) in self.fragment_orbitals.iter().zip(&self.gamma).enumerate() {
            if orbs.is_empty() {
                return Err(Error::invalid(format!("fragment {k} is empty")));
            }
            if gamma.nrows() != orbs.len() || gamma.ncols() != orbs.len() {
                return Err(Error::invalid(format!(
                    "gamma of fragment {k} is {}x{}, expected {}x{}",
                    gamma.nrows(),
                    gamma.ncols(),
                    orbs.len(),
                    orbs.len()
                )));
            }
            check_gamma(gamma, k)?;
        }
        Ok(())
    }
}

fn check_gamma(gamma: &DMatrix<f64>, k: usize) -> Result<()> {
    let d = gamma.nrows();
    for i in 0..d {
        for j in 0..i {
            if (gamma[(i, j)] - gamma[(j, i)]).abs() > GAMMA_TOL {
                return Err(Error::invalid(format!("gamma of fragment {k} is not symmetric")));
            }
        }
    }
    let c = CMatrix::from_fn(d, d, |i, j| Complex64::new(gamma[(i, j)], 0.0));
    for ev in eigvalsh(&c) {
        if !(-GAMMA_TOL..=1.0 + GAMMA_TOL).contains(&ev) {
            return Err(Error::invalid(format!(
                "gamma of fragment {k} has eigenvalue {ev} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

fn rows_to_matrix(rows: &[Vec<f64>], k: usize) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("gamma of fragment {k} is not square")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Whitespace-separated square real matrix, one row per line.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(idx + 1, format!("non-numeric entry `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::parse(0, "matrix is not square"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// One creation (`dagger`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub orbital: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(orbital: usize) -> Self {
        LadderOp {
            orbital,
            dagger: true,
        }
    }

    pub fn annihilate(orbital: usize) -> Self {
        LadderOp {
            orbital,
            dagger: false,
        }
    }
}

/// `coeff * ops[0] ops[1] ...` (leftmost operator acts last).
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub ops: Vec<LadderOp>,
}

impl FermionTerm {
    pub fn new(coeff: f64, ops: Vec<LadderOp>) -> Self {
        FermionTerm {
            coeff: Complex64::new(coeff, 0.0),
            ops,
        }
    }

    /// Hermitian conjugate: reversed order, daggers flipped, coefficient conjugated.
    pub fn adjoint(&self) -> FermionTerm {
        FermionTerm {
            coeff: self.coeff.conj(),
            ops: self
                .ops
                .iter()
                .rev()
                .map(|o| LadderOp {
                    orbital: o.orbital,
                    dagger: !o.dagger,
                })
                .collect(),
        }
    }
}

/// JW image of a single ladder operator: `Z_{<p} (X_p ∓ iY_p) / 2`.
fn jw_ladder(op: LadderOp) -> [(PauliString, Complex64); 2] {
    let p = op.orbital;
    let below = (1u64 << p) - 1;
    let bit = 1u64 << p;
    let x = PauliString::from_masks(bit, below);
    let y = PauliString::from_masks(bit, below | bit);
    let sign = if op.dagger { -1.0 } else { 1.0 };
    [
        (x, Complex64::new(0.5, 0.0)),
        (y, Complex64::new(0.0, 0.5 * sign)),
    ]
}

/// Expanded (uncombined) JW image of a product of ladder operators.
fn jw_product(coeff: Complex64, ops: &[LadderOp]) -> Vec<(PauliString, Complex64)> {
    let mut acc = vec![(PauliString::IDENTITY, coeff)];
    for &op in ops {
        let factors = jw_ladder(op);
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (p, c) in &acc {
            for (q, d) in &factors {
                let (ph, r) = p.mul(q);
                next.push((r, ph * c * d));
            }
        }
        acc = next;
    }
    acc
}

/// Jordan-Wigner image of a sum of ladder-operator products on `n` modes,
/// combined.
pub fn jordan_wigner(terms: &[FermionTerm], n: usize) -> Result<PauliSum> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!("{n} modes is outside 1..=64")));
    }
    let mut out = Accumulator::default();
    for t in terms {
        if let Some(op) = t.ops.iter().find(|o| o.orbital >= n) {
            return Err(Error::invalid(format!(
                "orbital {} out of range for {n} modes",
                op.orbital
            )));
        }
        out.add_product(t.coeff, &t.ops);
    }
    Ok(out.finish(n))
}

#[derive(Default)]
struct Accumulator {
    map: HashMap<PauliString, Complex64>,
}

impl Accumulator {
    fn add_product(&mut self, coeff: Complex64, ops: &[LadderOp]) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        for (p, c) in jw_product(coeff, ops) {
            *self.map.entry(p).or_default() += c;
        }
    }

    fn finish(self, n: usize) -> PauliSum {
        PauliSum::from_terms(n, self.map).combine()
    }
}

/// Quadratic-plus-quartic operator on `orbs` (mapped to qubits `0..orbs.len()`)
/// with local one-body matrix `f` (coefficient of `a†_j a_i` is `f[(i, j)]`).
fn assemble(ints: &FermionIntegrals, orbs: &[usize], f: &DMatrix<f64>) -> PauliSum {
    let d = orbs.len();
    let mut acc = Accumulator::default();
    for a in 0..d {
        for b in 0..d {
            let v = f[(a, b)];
            if v != 0.0 {
                acc.add_product(
                    Complex64::new(v, 0.0),
                    &[LadderOp::create(b), LadderOp::annihilate(a)],
                );
            }
        }
    }
    // 1/4 Σ_ijkl over ordered pairs collapses to Σ_{i<j, k<l} for antisymmetric g.
    for a in 0..d {
        for b in a + 1..d {
            for c in 0..d {
                for e in c + 1..d {
                    let v = ints.g(orbs[a], orbs[b], orbs[c], orbs[e]);
                    if v.abs() > 0.0 {
                        acc.add_product(
                            Complex64::new(v, 0.0),
                            &[
                                LadderOp::create(c),
                                LadderOp::create(e),
                                LadderOp::annihilate(b),
                                LadderOp::annihilate(a),
                            ],
                        );
                    }
                }
            }
        }
    }
    acc.finish(d).subtract_identity()
}

/// Mean-field one-body block `h_ij + Σ_u g_iu^ju` over `orbs`.
fn dressed_one_body(ints: &FermionIntegrals, orbs: &[usize], inactive: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(orbs.len(), orbs.len(), |a, b| {
        let (i, j) = (orbs[a], orbs[b]);
        ints.h(i, j) + inactive.iter().map(|&u| ints.g(i, u, j, u)).sum::<f64>()
    })
}

/// JW image of the embedded fragment Hamiltonian `H_K` on fragment `k`'s
/// spin orbitals (local qubit `a` is `fragment_orbitals[k][a]`). The identity
/// part is moved to `identity_offset`.
pub fn build_fragment_hamiltonian(
    ints: &FermionIntegrals,
    spec: &FragmentSpec,
    k: usize,
) -> Result<PauliSum> {
    spec.validate(ints.n_spin_orbitals())?;
    if k >= spec.n_fragments() {
        return Err(Error::invalid(format!(
            "fragment index {k} out of range ({} fragments)",
            spec.n_fragments()
        )));
    }
    let orbs = &spec.fragment_orbitals[k];
    let mut f = dressed_one_body(ints, orbs, &spec.inactive_orbitals);
    for (l, (other, gamma)) in spec.fragment_orbitals.iter().zip(&spec.gamma).enumerate() {
        if l == k {
            continue;
        }
        for a in 0..orbs.len() {
            for b in 0..orbs.len() {
                let (i, j) = (orbs[a], orbs[b]);
                let mut s = 0.0;
                for (x, &m) in other.iter().enumerate() {
                    for (y, &nn) in other.iter().enumerate() {
                        let gm = gamma[(x, y)];
                        if gm != 0.0 {
                            s += ints.g(i, m, j, nn) * gm;
                        }
                    }
                }
                f[(a, b)] += s;
            }
        }
    }
    Ok(assemble(ints, orbs, &f))
}

/// JW image of `H_eff` over the concatenated fragment active spaces
/// (fragment 0 on the lowest qubits). No constant is included; see
/// [`FermionIntegrals::core_energy`].
pub fn build_effective_hamiltonian(ints: &FermionIntegrals, spec: &FragmentSpec) -> Result<PauliSum> {
    spec.validate(ints.n_spin_orbitals())?;
    let orbs = spec.active_orbitals();
    if orbs.len() > MAX_QUBITS {
        return Err(Error::invalid("active space exceeds 64 qubits"));
    }
    let f = dressed_one_body(ints, &orbs, &spec.inactive_orbitals);
    Ok(assemble(ints, &orbs, &f))
}

/// Total number operator `Σ_p (I - Z_p) / 2` on `n` modes.
pub fn number_operator(n: usize) -> PauliSum {
    let mut s = PauliSum::new(n);
    for p in 0..n {
        s.push(
            PauliString::from_masks(0, 1 << p),
            Complex64::new(-0.5, 0.0),
        );
    }
    s.set_identity_offset(n as f64 / 2.0);
    s
}

/// Basis index of the determinant occupying the `n_electrons` lowest modes.
pub fn hartree_fock_index(n_electrons: usize) -> u64 {
    if n_electrons >= 64 {
        u64::MAX
    } else {
        (1u64 << n_electrons) - 1
    }
}

/// One-particle density matrix `γ_pq = <a†_p a_q>` of a JW-encoded state.
pub fn one_rdm(state: &Statevector) -> DMatrix<f64> {
    let n = state.n_qubits();
    let amps = state.amplitudes();
    DMatrix::from_fn(n, n, |p, q| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &amp) in amps.iter().enumerate() {
            let b = b as u64;
            if amp.norm_sqr() == 0.0 || b >> q & 1 == 0 {
                continue;
            }
            let (s1, b1) = (parity_below(b, q), b & !(1 << q));
            if b1 >> p & 1 == 1 {
                continue;
            }
            let (s2, b2) = (parity_below(b1, p), b1 | (1 << p));
            let sign = if s1 ^ s2 { -1.0 } else { 1.0 };
            acc += amps[b2 as usize].conj() * amp * sign;
        }
        acc.re
    })
}

/// Lowest eigenpair of `h` restricted to determinants with `n_electrons`
/// occupied modes. The energy includes `h`'s identity offset.
pub fn ground_state_in_sector(h: &PauliSum, n_electrons: usize) -> Result<(f64, Statevector)> {
    let n = h.n_qubits();
    if n_electrons > n {
        return Err(Error::invalid(format!(
            "{n_electrons} electrons do not fit in {n} modes"
        )));
    }
    let full = h.to_dense_matrix(crate::pauli::DEFAULT_ORACLE_CAP)?;
    let idx: Vec<usize> = (0..1usize << n)
        .filter(|b| b.count_ones() as usize == n_electrons)
        .collect();
    let sub = CMatrix::from_fn(idx.len(), idx.len(), |a, b| full[(idx[a], idx[b])]);
    let (vals, vecs) = crate::linalg::eigh(&sub);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (a, &b) in idx.iter().enumerate() {
        amps[b] = vecs[(a, 0)];
    }
    // Fix the global phase so the largest amplitude is real and positive.
    let lead = amps
        .iter()
        .copied()
        .max_by(|x, y| x.norm_sqr().total_cmp(&y.norm_sqr()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let amps = amps.into_iter().map(|a| a * phase).collect();
    Ok((vals[0] + h.identity_offset(), Statevector::from_unnormalized(amps)?))
}

fn parity_below(b: u64, p: usize) -> bool {
    (b & ((1u64 << p) - 1)).count_ones() % 2 == 1
}
