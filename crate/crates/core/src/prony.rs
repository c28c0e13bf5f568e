//! Autocorrelation series and Prony's method.
//!
//! A series holds `C_k = ⟨ψ0| e^{iHbτk} |ψ0⟩` for `k = 0..=N`. Its model is
//! `C_k = Σ_s h_s z_s^k` with `z_s = e^{iθ_s}`, so each component gives an
//! energy `E_s = θ_s / (bτ)` and a weight `h_s = |⟨E_s|ψ0⟩|²`.
//!
//! The fit solves the linear-prediction system `Σ_j c_j C_{k+j} = -C_{k+p}`
//! by SVD least squares on the Hankel matrix, lowering `p` to the numerical
//! rank when the matrix is rank deficient. Roots of
//! `z^p + Σ_j c_j z^j` come from the companion matrix, are pulled onto the
//! unit circle, and the weights follow from a Vandermonde least-squares
//! solve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, CVector};
use crate::numfmt::sig;
use crate::pauli::{PauliSum, DEFAULT_ORACLE_CAP};
use crate::statevector::Statevector;

/// Relative singular-value cutoff for the Hankel rank.
pub const RANK_TOL: f64 = 1e-10;
/// Default pruning threshold relative to the largest weight.
pub const DEFAULT_PRUNE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationSeries {
    pub tau: f64,
    pub b: f64,
    /// Added to every fitted energy (the identity part left out of the
    /// propagation).
    pub energy_offset: f64,
    pub samples: Vec<Complex64>,
    pub source: String,
}

impl AutocorrelationSeries {
    pub fn new(tau: f64, b: f64, samples: Vec<Complex64>) -> Self {
        AutocorrelationSeries {
            tau,
            b,
            energy_offset: 0.0,
            samples,
            source: String::new(),
        }
    }

    /// Series of a known spectral decomposition, `C_k = Σ w_s e^{i E_s bτk}`.
    pub fn synthetic(weights: &[f64], energies: &[f64], tau: f64, b: f64, n: usize) -> Self {
        let samples = (0..=n)
            .map(|k| {
                weights
                    .iter()
                    .zip(energies)
                    .map(|(&w, &e)| Complex64::from_polar(w, e * b * tau * k as f64))
                    .sum()
            })
            .collect();
        AutocorrelationSeries::new(tau, b, samples)
    }

    /// `k,re,im` behind a versioned comment carrying `tau`, `b` and the offset.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# fragprep autocorrelation v1 tau={} b={} offset={} source={}\nk,re,im\n",
            sig(self.tau),
            sig(self.b),
            sig(self.energy_offset),
            if self.source.is_empty() { "-" } else { &self.source }
        );
        for (k, c) in self.samples.iter().enumerate() {
            out.push_str(&format!("{k},{},{}\n", sig(c.re), sig(c.im)));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::parse(1, "empty series file"))?;
        let header = first
            .strip_prefix("# fragprep autocorrelation v1")
            .ok_or_else(|| Error::parse(1, "missing `# fragprep autocorrelation v1` header"))?;
        let mut tau = None;
        let mut b = None;
        let mut offset = 0.0;
        let mut source = String::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("bad header field `{tok}`")))?;
            let num = || v.parse::<f64>().map_err(|_| Error::parse(1, format!("bad {k} value")));
            match k {
                "tau" => tau = Some(num()?),
                "b" => b = Some(num()?),
                "offset" => offset = num()?,
                "source" => source = if v == "-" { String::new() } else { v.to_string() },
                _ => {}
            }
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("k,") {
                continue;
            }
            let f: Vec<&str> = t.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(Error::parse(idx + 1, "expected `k,re,im`"));
            }
            let k: usize = f[0].parse().map_err(|_| Error::parse(idx + 1, "bad index"))?;
            if k != samples.len() {
                return Err(Error::parse(idx + 1, format!("expected index {}, found {k}", samples.len())));
            }
            let re: f64 = f[1].parse().map_err(|_| Error::parse(idx + 1, "bad real part"))?;
            let im: f64 = f[2].parse().map_err(|_| Error::parse(idx + 1, "bad imaginary part"))?;
            samples.push(Complex64::new(re, im));
        }
        Ok(AutocorrelationSeries {
            tau: tau.ok_or_else(|| Error::parse(1, "header lacks tau"))?,
            b: b.ok_or_else(|| Error::parse(1, "header lacks b"))?,
            energy_offset: offset,
            samples,
            source,
        })
    }
}

/// Propagates `psi0` with the exact `U = e^{iHbτ}` (identity part removed)
/// and records `C_k` for `k = 0..=n_samples`.
pub fn generate_series(
    h: &PauliSum,
    psi0: &Statevector,
    tau: f64,
    b: f64,
    n_samples: usize,
) -> Result<AutocorrelationSeries> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: h.n_qubits(),
            found: psi0.n_qubits(),
        });
    }
    let hs = h.subtract_identity();
    let u = crate::evolution::exact_unitary(&hs, b * tau, DEFAULT_ORACLE_CAP)?;
    let v0 = CVector::from_column_slice(psi0.amplitudes());
    let mut v = v0.clone();
    let mut samples = Vec::with_capacity(n_samples + 1);
    for k in 0..=n_samples {
        if k > 0 {
            v = &u * v;
        }
        samples.push(v0.dotc(&v));
    }
    Ok(AutocorrelationSeries {
        tau,
        b,
        energy_offset: hs.identity_offset(),
        samples,
        source: String::new(),
    })
}

/// True when `bτ ‖H‖₁ ≥ π`, i.e. phases may wrap.
pub fn aliasing_warning(h: &PauliSum, tau: f64, b: f64) -> bool {
    b * tau * h.subtract_identity().one_norm() >= PI
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PronyComponent {
    pub weight_re: f64,
    pub weight_im: f64,
    pub theta: f64,
    pub energy: f64,
}

impl PronyComponent {
    pub fn weight(&self) -> Complex64 {
        Complex64::new(self.weight_re, self.weight_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PronyResult {
    /// Sorted by descending |h_s|.
    pub components: Vec<PronyComponent>,
    pub p_requested: usize,
    /// Order actually used after the rank reduction.
    pub p_effective: usize,
    /// Components removed by pruning.
    pub pruned: usize,
    /// ‖C - model‖₂ over all samples, before pruning.
    pub residual: f64,
}

impl PronyResult {
    pub fn weight_sum(&self) -> Complex64 {
        self.components.iter().map(|c| c.weight()).sum()
    }

    /// Columns `h_s,E_s` first, then the imaginary part of `h_s` and `θ_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# fragprep prony v1\nh_s,E_s,h_s_imag,theta_s\n");
        for c in &self.components {
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig(c.weight_re),
                sig(c.energy),
                sig(c.weight_im),
                sig(c.theta)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PronyOptions {
    /// Prune components with |h| below this fraction of the largest; `None`
    /// keeps everything.
    pub prune: Option<f64>,
    pub rank_tol: f64,
}

impl Default for PronyOptions {
    fn default() -> Self {
        PronyOptions {
            prune: Some(DEFAULT_PRUNE),
            rank_tol: RANK_TOL,
        }
    }
}

pub fn prony_fit(series: &AutocorrelationSeries, p: usize) -> Result<PronyResult> {
    prony_fit_with(series, p, PronyOptions::default())
}

pub fn prony_fit_with(series: &AutocorrelationSeries, p: usize, opts: PronyOptions) -> Result<PronyResult> {
    let c = &series.samples;
    let n = c.len();
    if p == 0 {
        return Err(Error::invalid("model order p must be at least 1"));
    }
    if n < 2 * p {
        return Err(Error::invalid(format!(
            "{n} samples cannot support order {p} (need at least {})",
            2 * p
        )));
    }
    if !(series.b * series.tau).is_finite() || series.b * series.tau == 0.0 {
        return Err(Error::invalid("b·tau must be finite and nonzero"));
    }

    // Rank of the full p-column Hankel matrix decides the effective order.
    let rows = n - p;
    let hankel = DMatrix::from_fn(rows, p + 1, |k, j| c[k + j]);
    let sv = hankel.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::Numeric("autocorrelation series is identically zero".into()));
    }
    let rank = sv.iter().filter(|&&s| s > opts.rank_tol * smax).count();
    let p_eff = rank.clamp(1, p);

    let rows = n - p_eff;
    let a = DMatrix::from_fn(rows, p_eff, |k, j| c[k + j]);
    let rhs = DVector::from_fn(rows, |k, _| -c[k + p_eff]);
    let coeffs = a
        .svd(true, true)
        .solve(&rhs, opts.rank_tol * smax)
        .map_err(|e| Error::Numeric(format!("linear prediction solve failed: {e}")))?;

    // Companion matrix of z^p + Σ_j coeffs[j] z^j.
    let mut comp = DMatrix::<Complex64>::zeros(p_eff, p_eff);
    for j in 0..p_eff {
        comp[(0, j)] = -coeffs[p_eff - 1 - j];
    }
    for i in 1..p_eff {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let roots = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("companion eigenvalues did not converge".into()))?;
    let roots: Vec<Complex64> = roots
        .iter()
        .map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) })
        .collect();

    let vand = DMatrix::from_fn(n, p_eff, |k, s| roots[s].powu(k as u32));
    let cvec = DVector::from_column_slice(c);
    let weights = vand
        .clone()
        .svd(true, true)
        .solve(&cvec, 1e-14)
        .map_err(|e| Error::Numeric(format!("Vandermonde solve failed: {e}")))?;
    let residual = (vand * &weights - cvec).norm();

    let bt = series.b * series.tau;
    let mut components: Vec<PronyComponent> = roots
        .iter()
        .zip(weights.iter())
        .map(|(z, w)| {
            let theta = wrap_angle(z.arg());
            PronyComponent {
                weight_re: w.re,
                weight_im: w.im,
                theta,
                energy: theta / bt + series.energy_offset,
            }
        })
        .collect();
    components.sort_by(|a, b| b.weight().norm().total_cmp(&a.weight().norm()));
    let before = components.len();
    if let Some(frac) = opts.prune {
        let max = components.first().map(|c| c.weight().norm()).unwrap_or(0.0);
        components.retain(|c| c.weight().norm() >= frac * max);
    }
    Ok(PronyResult {
        pruned: before - components.len(),
        components,
        p_requested: p,
        p_effective: p_eff,
        residual,
    })
}

/// Angle in `(-π, π]`.
fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Exact `(weight, energy)` pairs of `psi0` in the eigenbasis of `h`,
/// merging eigenvalues within `tol`; the oracle for fitted components.
pub fn spectral_weights(h: &PauliSum, psi0: &Statevector, tol: f64) -> Result<Vec<(f64, f64)>> {
    let (vals, vecs) = eigh(&h.to_dense_matrix(DEFAULT_ORACLE_CAP)?);
    let psi = CVector::from_column_slice(psi0.amplitudes());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (k, &e) in vals.iter().enumerate() {
        let w = vecs.column(k).dotc(&psi).norm_sqr();
        let e = e + h.identity_offset();
        match out.last_mut() {
            Some((acc, e0)) if (e - *e0).abs() <= tol => *acc += w,
            _ => out.push((w, e)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_component_synthetic() {
        let samples: Vec<Complex64> = (0..=20)
            .map(|k| {
                Complex64::from_polar(0.7, 0.3 * k as f64) + Complex64::from_polar(0.3, -1.1 * k as f64)
            })
            .collect();
        let s = AutocorrelationSeries::new(1.0, 1.0, samples);
        let r = prony_fit(&s, 2).unwrap();
        assert_eq!(r.components.len(), 2);
        assert!(approx(r.components[0].weight_re, 0.7, 1e-8));
        assert!(approx(r.components[0].theta, 0.3, 1e-8));
        assert!(approx(r.components[1].weight_re, 0.3, 1e-8));
        assert!(approx(r.components[1].theta, -1.1, 1e-8));
    }

    #[test]
    fn eigenvector_series() {
        let h = PauliSum::from_labels(&[(0.8, "Z")]).unwrap();
        let s = generate_series(&h, &Statevector::basis(1, 1), 0.75, 1.0, 20).unwrap();
        for (k, c) in s.samples.iter().enumerate() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
            assert!((c - Complex64::from_polar(1.0, -0.8 * 0.75 * k as f64)).norm() < 1e-12);
        }
        let r = prony_fit(&s, 1).unwrap();
        assert!(approx(r.components[0].weight_re, 1.0, 1e-9));
        assert!(approx(r.components[0].energy, -0.8, 1e-9));
    }

    #[test]
    fn zero_tau_and_cosine() {
        let h = PauliSum::from_labels(&[(1.0, "Z")]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Statevector::from_amplitudes(vec![Complex64::new(r, 0.0); 2]).unwrap();
        let flat = generate_series(&h, &plus, 0.0, 1.0, 5).unwrap();
        assert!(flat.samples.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        let s = generate_series(&h, &plus, 0.4, 0.9, 10).unwrap();
        for (k, c) in s.samples.iter().enumerate() {
            assert!((c - Complex64::new((0.9 * 0.4 * k as f64).cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_reduction_and_pruning() {
        let s = AutocorrelationSeries::synthetic(&[0.5, 0.3, 0.15, 0.05], &[-1.0, -0.4, 0.35, 0.9], 0.75, 1.0, 20);
        let r = prony_fit(&s, 8).unwrap();
        assert_eq!(r.p_effective, 4);
        assert_eq!(r.components.len(), 4);
        assert!((r.weight_sum() - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        for (c, (w, e)) in r.components.iter().zip([(0.5, -1.0), (0.3, -0.4), (0.15, 0.35), (0.05, 0.9)]) {
            assert!(approx(c.weight_re, w, 1e-6) && approx(c.energy, e, 1e-6));
        }
        assert!(prony_fit(&s, 11).is_err());
    }

    #[test]
    fn recovers_random_hamiltonian_spectrum() {
        let h = PauliSum::from_labels(&[
            (0.5, "ZII"),
            (-0.3, "IZI"),
            (0.2, "IIZ"),
            (0.15, "XXI"),
            (0.1, "IYY"),
        ])
        .unwrap();
        let psi = Statevector::from_unnormalized(
            (0..8).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64)).collect(),
        )
        .unwrap();
        let b = crate::qpe::default_scale_factor(&h).unwrap();
        assert!(!aliasing_warning(&h, 0.75, b));
        let s = generate_series(&h, &psi, 0.75, b, 40).unwrap();
        let r = prony_fit(&s, 16).unwrap();
        let exact = spectral_weights(&h, &psi, 1e-9).unwrap();
        for (w, e) in exact.iter().filter(|(w, _)| *w > 1e-3) {
            let hit = r
                .components
                .iter()
                .find(|c| approx(c.energy, *e, 1e-4))
                .unwrap_or_else(|| panic!("no component near {e}"));
            assert!(approx(hit.weight_re, *w, 1e-4));
        }
    }

    #[test]
    fn half_step_invariance() {
        let s1 = AutocorrelationSeries::synthetic(&[0.6, 0.4], &[-0.7, 0.5], 0.5, 1.0, 20);
        let s2 = AutocorrelationSeries::synthetic(&[0.6, 0.4], &[-0.7, 0.5], 0.25, 1.0, 40);
        let (r1, r2) = (prony_fit(&s1, 4).unwrap(), prony_fit(&s2, 4).unwrap());
        for (a, b) in r1.components.iter().zip(&r2.components) {
            assert!(approx(a.energy, b.energy, 1e-8));
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut s = AutocorrelationSeries::synthetic(&[1.0], &[0.25], 0.5, 2.0, 3);
        s.energy_offset = -1.5;
        s.source = "toy".into();
        let back = AutocorrelationSeries::parse_csv(&s.to_csv()).unwrap();
        assert_eq!(back.samples.len(), 4);
        assert_eq!(back.energy_offset, -1.5);
        assert_eq!(back.source, "toy");
        for (a, b) in back.samples.iter().zip(&s.samples) {
            assert!((a - b).norm() < 1e-11);
        }
        assert!(AutocorrelationSeries::parse_csv("k,re,im\n0,1,0\n").is_err());
    }
}
