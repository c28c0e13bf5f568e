//! Closed-form resource accounting for the two preparation schemes.
//!
//! * ancillas: `t = max(n, ceil(n + log(1 / (ΔE² r^{2p} ε))))`, log base 2 by
//!   default;
//! * QPE CNOTs: `n_U · n_Tr · (2^{n_an} - 1)`;
//! * direct initialization CNOTs: `4^N - (3/2) 2^N`.
//!
//! The crossover size is the smallest fragment size at which the QPE total
//! is no larger than the direct-initialization total.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::direct_init::di_cnot_count;
use crate::error::{Error, Result};
use crate::evolution::controlled_step_cnots;
use crate::pauli::PauliSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            "10" => Ok(LogBase::Ten),
            _ => Err(Error::invalid(format!("log base must be 2, e or 10, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncillaEstimateInput {
    /// Requested phase precision bits.
    pub n: u32,
    /// Gap between ground and first excited state (Hartree).
    pub delta_e: f64,
    /// Trotter steps.
    pub r: u32,
    /// Fidelity exponent.
    pub p: f64,
    /// Failure budget in `(0, 1]`.
    pub epsilon: f64,
}

pub fn estimate_ancilla(inp: &AncillaEstimateInput, base: LogBase) -> Result<u32> {
    if inp.n < 1 {
        return Err(Error::invalid("precision bits n must be at least 1"));
    }
    if !(inp.delta_e > 0.0 && inp.delta_e.is_finite()) {
        return Err(Error::invalid("gap delta_e must be positive"));
    }
    if inp.r < 1 {
        return Err(Error::invalid("Trotter steps r must be at least 1"));
    }
    if !(inp.p >= 0.0 && inp.p.is_finite()) {
        return Err(Error::invalid("fidelity exponent p must be non-negative"));
    }
    if !(inp.epsilon > 0.0 && inp.epsilon <= 1.0) {
        return Err(Error::invalid("failure budget epsilon must lie in (0, 1]"));
    }
    let denom = inp.delta_e.powi(2) * (inp.r as f64).powf(2.0 * inp.p) * inp.epsilon;
    let t = inp.n as f64 + base.log(1.0 / denom);
    // Guard against t landing a hair above an integer through rounding.
    let t = (t - 1e-12).ceil();
    Ok((t.max(inp.n as f64)) as u32)
}

pub fn qpe_cnots(n_u: u64, n_trotter: u64, n_ancilla: u32) -> Result<u64> {
    if n_u < 1 || n_trotter < 1 || n_ancilla < 1 {
        return Err(Error::invalid("n_U, n_Tr and n_an must all be at least 1"));
    }
    if n_ancilla >= 64 {
        return Err(Error::invalid("n_an must be below 64"));
    }
    n_u.checked_mul(n_trotter)
        .and_then(|x| x.checked_mul((1u64 << n_ancilla) - 1))
        .ok_or_else(|| Error::invalid("QPE CNOT count overflows 64 bits"))
}

/// `n_U` of a Hamiltonian: CNOT-equivalents of one controlled Trotter step.
pub fn measured_n_u(h: &PauliSum) -> Result<u64> {
    controlled_step_cnots(&h.subtract_identity())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub label: String,
    pub n_u: u64,
    pub n_trotter: u64,
    pub n_ancilla: u32,
    pub cnot_qpe: u64,
    pub n_qubits_fragment: u32,
    pub cnot_di: u64,
}

impl ResourceRow {
    pub fn new(label: impl Into<String>, n_u: u64, n_trotter: u64, n_ancilla: u32, n_qubits: u32) -> Result<Self> {
        Ok(ResourceRow {
            label: label.into(),
            n_u,
            n_trotter,
            n_ancilla,
            cnot_qpe: qpe_cnots(n_u, n_trotter, n_ancilla)?,
            n_qubits_fragment: n_qubits,
            cnot_di: di_cnot_count(n_qubits)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub n_ancilla: u32,
    pub crossover_qubits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub rows: Vec<ResourceRow>,
    pub crossovers: Vec<CrossoverPoint>,
}

/// Quotes a CSV field when it contains a delimiter or quote.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ResourceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# fragprep resources v1\nlabel,n_U,n_Tr,n_an,N_CNOT_QPE,n_qubits,N_CNOT_DI\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&r.label), r.n_u, r.n_trotter, r.n_ancilla, r.cnot_qpe, r.n_qubits_fragment, r.cnot_di
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "format": "fragprep resources v1",
            "rows": self.rows,
            "crossovers": self.crossovers,
        });
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["label", "n_U", "n_Tr", "n_an", "N_CNOT(QPE)", "qubits", "N_CNOT(DI)"];
        let cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.n_u.to_string(),
                    r.n_trotter.to_string(),
                    r.n_ancilla.to_string(),
                    r.cnot_qpe.to_string(),
                    r.n_qubits_fragment.to_string(),
                    r.cnot_di.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let fmt_row = |row: &[String]| {
            row.iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = fmt_row(&header.map(String::from));
        out.push('\n');
        out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        out.push('\n');
        for row in &cells {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        for c in &self.crossovers {
            out.push_str(&match c.crossover_qubits {
                Some(q) => format!("crossover (n_an = {}): {} qubits\n", c.n_ancilla, q),
                None => format!("crossover (n_an = {}): none in range\n", c.n_ancilla),
            });
        }
        out
    }
}

/// QPE vs DI totals for every `(size, n_ancilla)` pair. `n_u_model` gives
/// `n_U` for a fragment of the given qubit count.
pub fn crossover_report(
    fragment_sizes: &[u32],
    n_u_model: &dyn Fn(u32) -> Result<u64>,
    n_trotter: u64,
    n_ancilla: &[u32],
) -> Result<ResourceReport> {
    let mut sizes = fragment_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut n_us = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        n_us.push(n_u_model(n)?);
    }
    let mut rows = Vec::new();
    let mut crossovers = Vec::new();
    for &t in n_ancilla {
        let mut cross = None;
        for (&n, &n_u) in sizes.iter().zip(&n_us) {
            let row = ResourceRow::new(format!("N={n} n_an={t}"), n_u, n_trotter, t, n)?;
            if cross.is_none() && row.cnot_qpe <= row.cnot_di {
                cross = Some(n);
            }
            rows.push(row);
        }
        crossovers.push(CrossoverPoint {
            n_ancilla: t,
            crossover_qubits: cross,
        });
    }
    Ok(ResourceReport { rows, crossovers })
}

/// `n_U` source for crossover sweeps in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuModel {
    Constant { value: u64 },
    /// One entry per size, same order as `sizes`.
    Table { values: Vec<u64> },
    /// Compiled from random molecular Hamiltonians of each size.
    Measured { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowConfig {
    pub label: String,
    pub n_u: Option<u64>,
    /// Pauli file to measure `n_U` from (relative to the config file).
    pub hamiltonian: Option<String>,
    pub n_trotter: u64,
    pub n_ancilla: u32,
    pub n_qubits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverConfig {
    pub sizes: Vec<u32>,
    pub n_trotter: u64,
    pub n_ancilla: Vec<u32>,
    pub n_u_model: NuModel,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncillaConfig {
    #[serde(flatten)]
    pub input: AncillaEstimateInput,
    #[serde(default)]
    pub log_base: LogBase,
}

/// Resource config file (TOML): any of `[[row]]`, `[crossover]`,
/// `[[ancilla]]`.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ResourceConfig {
    #[serde(default)]
    pub row: Vec<RowConfig>,
    pub crossover: Option<CrossoverConfig>,
    #[serde(default)]
    pub ancilla: Vec<AncillaConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceOutcome {
    pub report: ResourceReport,
    pub ancilla_estimates: Vec<(AncillaEstimateInput, LogBase, u32)>,
}

impl ResourceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn evaluate(&self, base_dir: Option<&Path>) -> Result<ResourceOutcome> {
        let mut rows = Vec::new();
        for r in &self.row {
            let (n_u, n_q) = match (&r.n_u, &r.hamiltonian) {
                (Some(n_u), None) => (*n_u, r.n_qubits),
                (None, Some(file)) => {
                    let path = base_dir.map(|d| d.join(file)).unwrap_or_else(|| file.into());
                    let h = PauliSum::parse_text(&crate::error::read_text(path)?)?;
                    (measured_n_u(&h)?, r.n_qubits.or(Some(h.n_qubits() as u32)))
                }
                _ => {
                    return Err(Error::Config(format!(
                        "row `{}` needs exactly one of n_u or hamiltonian",
                        r.label
                    )))
                }
            };
            let n_q = n_q.ok_or_else(|| Error::Config(format!("row `{}` lacks n_qubits", r.label)))?;
            rows.push(ResourceRow::new(r.label.clone(), n_u, r.n_trotter, r.n_ancilla, n_q)?);
        }
        let mut report = ResourceReport {
            rows,
            crossovers: Vec::new(),
        };
        if let Some(c) = &self.crossover {
            let model: Box<dyn Fn(u32) -> Result<u64>> = match &c.n_u_model {
                NuModel::Constant { value } => {
                    let v = *value;
                    Box::new(move |_| Ok(v))
                }
                NuModel::Table { values } => {
                    if values.len() != c.sizes.len() {
                        return Err(Error::Config("n_u table must match sizes".into()));
                    }
                    let map: Vec<(u32, u64)> = c.sizes.iter().copied().zip(values.iter().copied()).collect();
                    Box::new(move |n| {
                        map.iter()
                            .find(|(s, _)| *s == n)
                            .map(|(_, v)| *v)
                            .ok_or_else(|| Error::Config(format!("no n_u for size {n}")))
                    })
                }
                NuModel::Measured { seed } => {
                    let seed = *seed;
                    Box::new(move |n| {
                        let h = crate::toys::random_molecular_hamiltonian(n as usize, seed)?;
                        measured_n_u(&h)
                    })
                }
            };
            let cr = crossover_report(&c.sizes, &*model, c.n_trotter, &c.n_ancilla)?;
            report.rows.extend(cr.rows);
            report.crossovers = cr.crossovers;
        }
        let mut estimates = Vec::new();
        for a in &self.ancilla {
            estimates.push((a.input, a.log_base, estimate_ancilla(&a.input, a.log_base)?));
        }
        Ok(ResourceOutcome {
            report,
            ancilla_estimates: estimates,
        })
    }
}
