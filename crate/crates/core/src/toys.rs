//! Bundled model systems and seeded random generators used by tests, the
//! acceptance suite and the CLI.
//!
//! * an H2 dimer: two minimal-basis H2 units (four spin orbitals each) with a
//!   tunable inter-unit coupling `λ`; `λ = 1` is the weakly coupled toy
//!   shipped as `data/h2_dimer.fcidump`;
//! * three small Hamiltonians for Trotter convergence studies;
//! * random molecular Hamiltonians for resource sweeps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fermion::{
    build_fragment_hamiltonian, ground_state_in_sector, one_rdm, parse_fcidump, FermionIntegrals,
    FragmentSpec,
};
use crate::pauli::PauliSum;
use crate::rng::derive_seed;
use crate::statevector::Statevector;

pub const H2_DIMER_FCIDUMP: &str = include_str!("../data/h2_dimer.fcidump");
pub const H2_DIMER_FRAGMENTS: &str = include_str!("../data/h2_dimer_fragments.toml");
pub const H2_FRAGMENT_PAULI: &str = include_str!("../data/h2_fragment.pauli");
pub const ISING3_PAULI: &str = include_str!("../data/ising3.pauli");
pub const XXZ4_PAULI: &str = include_str!("../data/xxz4.pauli");

// Minimal-basis H2 at 0.7414 Å in the canonical MO basis (Hartree).
const H2_H00: f64 = -1.252463576;
const H2_H11: f64 = -0.475948718;
const H2_J00: f64 = 0.674488766;
const H2_J11: f64 = 0.697394985;
const H2_J01: f64 = 0.663457769;
const H2_K01: f64 = 0.181287535;
pub const H2_NUCLEAR_REPULSION: f64 = 0.713753994;

// Inter-unit couplings at λ = 1.
const DIMER_HOP: f64 = -0.02;
const DIMER_COULOMB: f64 = 0.1;
const DIMER_EXCHANGE: f64 = 0.004;

fn put8(eri: &mut [f64], m: usize, (p, q, r, s): (usize, usize, usize, usize), v: f64) {
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;
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
        eri[at(a, b, c, d)] = v;
    }
}

/// Spatial integrals `(h, (pq|rs))` of the H2 dimer with coupling `λ`.
/// Spatial orbitals 0, 1 belong to unit A and 2, 3 to unit B.
pub fn h2_dimer_spatial(coupling: f64) -> (DMatrix<f64>, Vec<f64>, f64) {
    let m = 4;
    let mut h = DMatrix::zeros(m, m);
    let mut eri = vec![0.0; m.pow(4)];
    for base in [0, 2] {
        let (g, u) = (base, base + 1);
        h[(g, g)] = H2_H00;
        h[(u, u)] = H2_H11;
        put8(&mut eri, m, (g, g, g, g), H2_J00);
        put8(&mut eri, m, (u, u, u, u), H2_J11);
        put8(&mut eri, m, (g, g, u, u), H2_J01);
        put8(&mut eri, m, (g, u, g, u), H2_K01);
    }
    for (p, q) in [(0, 2), (1, 3)] {
        h[(p, q)] = DIMER_HOP * coupling;
        h[(q, p)] = DIMER_HOP * coupling;
    }
    for p in 0..2 {
        for q in 2..4 {
            put8(&mut eri, m, (p, p, q, q), DIMER_COULOMB * coupling);
            put8(&mut eri, m, (p, q, p, q), DIMER_EXCHANGE * coupling);
        }
    }
    (h, eri, 2.0 * H2_NUCLEAR_REPULSION)
}

pub fn h2_dimer_integrals(coupling: f64) -> Result<FermionIntegrals> {
    let (h, eri, e_core) = h2_dimer_spatial(coupling);
    Ok(FermionIntegrals::from_spatial(&h, &eri, e_core)?.with_n_electrons(4))
}

/// Unit A on spin orbitals 0..4, unit B on 4..8, zero γ.
pub fn h2_dimer_fragments() -> FragmentSpec {
    FragmentSpec::new(vec![(0..4).collect(), (4..8).collect()], vec![])
}

/// The shipped weakly coupled dimer (`λ = 1`), parsed from the bundled files.
pub fn bundled_dimer() -> Result<(FermionIntegrals, FragmentSpec)> {
    Ok((
        parse_fcidump(H2_DIMER_FCIDUMP)?,
        FragmentSpec::from_toml(H2_DIMER_FRAGMENTS, None)?,
    ))
}

/// Fragment Hamiltonians and ground states with self-consistent γ blocks.
#[derive(Debug, Clone)]
pub struct EmbeddedFragments {
    pub spec: FragmentSpec,
    pub hamiltonians: Vec<PauliSum>,
    /// Ground state of each `H_K` in its electron sector (local qubits).
    pub ground_states: Vec<Statevector>,
    pub ground_energies: Vec<f64>,
    pub iterations: usize,
}

/// Alternates between fragment ground states and their γ blocks until the
/// blocks change by less than `tol` (max-abs), starting from the lowest
/// determinant of each fragment.
pub fn embed_fragments(
    ints: &FermionIntegrals,
    spec: &FragmentSpec,
    electrons: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<EmbeddedFragments> {
    if electrons.len() != spec.n_fragments() {
        return Err(Error::invalid("one electron count per fragment is required"));
    }
    let mut spec = spec.clone();
    for (k, &ne) in electrons.iter().enumerate() {
        let d = spec.fragment_orbitals[k].len();
        if ne > d {
            return Err(Error::invalid(format!("fragment {k} cannot hold {ne} electrons")));
        }
        spec.gamma[k] = DMatrix::from_fn(d, d, |i, j| if i == j && i < ne { 1.0 } else { 0.0 });
    }
    let solve = |spec: &FragmentSpec| -> Result<(Vec<PauliSum>, Vec<Statevector>, Vec<f64>)> {
        let (mut hams, mut states, mut energies) = (Vec::new(), Vec::new(), Vec::new());
        for (k, &ne) in electrons.iter().enumerate() {
            let hk = build_fragment_hamiltonian(ints, spec, k)?;
            let (e, psi) = ground_state_in_sector(&hk, ne)?;
            hams.push(hk);
            states.push(psi);
            energies.push(e);
        }
        Ok((hams, states, energies))
    };
    let max_iter = max_iter.max(1);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let (_, states, _) = solve(&spec)?;
        let mut change: f64 = 0.0;
        for (k, psi) in states.iter().enumerate() {
            let g = one_rdm(psi);
            change = change.max((&g - &spec.gamma[k]).amax());
            spec.gamma[k] = g;
        }
        if change < tol {
            break;
        }
    }
    // Rebuild so the returned Hamiltonians match the final γ.
    let (hamiltonians, ground_states, ground_energies) = solve(&spec)?;
    Ok(EmbeddedFragments {
        spec,
        hamiltonians,
        ground_states,
        ground_energies,
        iterations,
    })
}

/// A named Hamiltonian with a reference (non-eigen) starting state.
#[derive(Debug, Clone)]
pub struct ToySystem {
    pub name: &'static str,
    pub hamiltonian: PauliSum,
    pub reference: Statevector,
}

/// The three Trotter-convergence toys: the H2 unit (4 qubits, Hartree-Fock
/// reference), a transverse-field Ising chain (3 qubits, all-zero reference)
/// and an XXZ chain (4 qubits, Néel reference).
pub fn trotter_toys() -> Result<Vec<ToySystem>> {
    Ok(vec![
        ToySystem {
            name: "h2",
            hamiltonian: PauliSum::parse_text(H2_FRAGMENT_PAULI)?,
            reference: Statevector::basis(4, 0b0011),
        },
        ToySystem {
            name: "ising3",
            hamiltonian: PauliSum::parse_text(ISING3_PAULI)?,
            reference: Statevector::basis(3, 0),
        },
        ToySystem {
            name: "xxz4",
            hamiltonian: PauliSum::parse_text(XXZ4_PAULI)?,
            reference: Statevector::basis(4, 0b0101),
        },
    ])
}

/// Random real spatial integrals with full 8-fold symmetry: `h` entries in
/// `[-1.5, 0.5)` on the diagonal and `[-0.5, 0.5)` off it, `(pq|rs)` in
/// `[-0.15, 0.15)`.
pub fn random_spatial_integrals(m: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut state = seed;
    let mut next = move || {
        state = derive_seed(state, 1);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = next() - if i == j { 1.0 } else { 0.0 };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let mut eri = vec![0.0; m.pow(4)];
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let i = at(p, q, r, s);
                    if i > at(q, p, r, s) || i > at(p, q, s, r) || i > at(r, s, p, q) {
                        continue;
                    }
                    put8(&mut eri, m, (p, q, r, s), 0.3 * next());
                }
            }
        }
    }
    (h, eri)
}

/// JW Hamiltonian of random integrals on `n_spin_orbitals` qubits (even),
/// as one fragment; identity part in the offset.
pub fn random_molecular_hamiltonian(n_spin_orbitals: usize, seed: u64) -> Result<PauliSum> {
    if n_spin_orbitals == 0 || !n_spin_orbitals.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "random molecular Hamiltonians need an even, positive qubit count, got {n_spin_orbitals}"
        )));
    }
    let m = n_spin_orbitals / 2;
    let (h, eri) = random_spatial_integrals(m, seed);
    let ints = FermionIntegrals::from_spatial(&h, &eri, 0.0)?;
    let spec = FragmentSpec::new(vec![(0..n_spin_orbitals).collect()], vec![]);
    build_fragment_hamiltonian(&ints, &spec, 0)
}

/// Random Hermitian Pauli sum with `n_terms` non-identity strings and real
/// coefficients in `[-1, 1)`.
pub fn random_pauli_sum(n_qubits: usize, n_terms: usize, seed: u64) -> PauliSum {
    use crate::pauli::PauliString;
    use num_complex::Complex64;
    let mut state = seed;
    let mut next = move || {
        state = derive_seed(state, 7);
        state
    };
    let mask = if n_qubits >= 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
    let mut terms = Vec::new();
    while terms.len() < n_terms {
        let (x, z) = (next() & mask, next() & mask);
        if x == 0 && z == 0 {
            continue;
        }
        let c = (next() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        terms.push((PauliString::from_masks(x, z), Complex64::new(c, 0.0)));
    }
    PauliSum::from_terms(n_qubits, terms).combine()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::build_effective_hamiltonian;
    use crate::linalg::eigvalsh;
    use crate::pauli::DEFAULT_ORACLE_CAP;

    #[test]
    fn bundled_dimer_matches_builder() {
        let (file, spec) = bundled_dimer().unwrap();
        let built = h2_dimer_integrals(1.0).unwrap();
        assert_eq!(spec, h2_dimer_fragments());
        for i in 0..8 {
            for j in 0..8 {
                assert!((file.h(i, j) - built.h(i, j)).abs() < 1e-12);
                for k in 0..8 {
                    for l in 0..8 {
                        assert!((file.g(i, j, k, l) - built.g(i, j, k, l)).abs() < 1e-12);
                    }
                }
            }
        }
        assert!((file.e_core() - built.e_core()).abs() < 1e-12);
    }

    #[test]
    fn h2_unit_reproduces_known_ground_energy() {
        let ints = h2_dimer_integrals(0.0).unwrap();
        let spec = FragmentSpec::new(vec![(0..4).collect(), (4..8).collect()], vec![]);
        let ha = build_fragment_hamiltonian(&ints, &spec, 0).unwrap();
        let (e, _) = ground_state_in_sector(&ha, 2).unwrap();
        // FCI energy of minimal-basis H2 near equilibrium, about -1.1373 Eh.
        assert!((e + H2_NUCLEAR_REPULSION + 1.1373).abs() < 5e-4, "{}", e + H2_NUCLEAR_REPULSION);
        // The bundled Pauli file is this operator.
        let file = PauliSum::parse_text(H2_FRAGMENT_PAULI).unwrap();
        let a = ha.to_dense_matrix_with_offset(DEFAULT_ORACLE_CAP).unwrap();
        let b = file.to_dense_matrix_with_offset(DEFAULT_ORACLE_CAP).unwrap();
        assert!((a - b).camax() < 1e-9);
    }

    #[test]
    fn uncoupled_dimer_is_additive() {
        let ints = h2_dimer_integrals(0.0).unwrap();
        let spec = h2_dimer_fragments();
        let emb = embed_fragments(&ints, &spec, &[2, 2], 1e-12, 50).unwrap();
        let heff = build_effective_hamiltonian(&ints, &emb.spec).unwrap();
        let (e, _) = ground_state_in_sector(&heff, 4).unwrap();
        assert!((e - emb.ground_energies.iter().sum::<f64>()).abs() < 1e-9);
        assert!((emb.ground_energies[0] - emb.ground_energies[1]).abs() < 1e-12);
    }

    #[test]
    fn weak_coupling_embedding_converges() {
        let (ints, spec) = bundled_dimer().unwrap();
        let emb = embed_fragments(&ints, &spec, &[2, 2], 1e-10, 100).unwrap();
        assert!(emb.iterations < 100);
        for g in &emb.spec.gamma {
            assert!((g.trace() - 2.0).abs() < 1e-9);
        }
        // Global ground of each H_K lies in the two-electron sector.
        for (hk, &e) in emb.hamiltonians.iter().zip(&emb.ground_energies) {
            let lowest = eigvalsh(&hk.to_dense_matrix(DEFAULT_ORACLE_CAP).unwrap())[0] + hk.identity_offset();
            assert!((lowest - e).abs() < 1e-9);
        }
    }

    #[test]
    fn random_generators_are_seeded() {
        let a = random_molecular_hamiltonian(4, 3).unwrap();
        let b = random_molecular_hamiltonian(4, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.is_hermitian());
        assert!(random_molecular_hamiltonian(5, 3).is_err());
        let p = random_pauli_sum(3, 6, 9);
        assert_eq!(p, random_pauli_sum(3, 6, 9));
        assert!(!p.is_empty() && p.is_hermitian());
    }

    #[test]
    fn trotter_toys_load() {
        let toys = trotter_toys().unwrap();
        assert_eq!(toys.len(), 3);
        for t in toys {
            assert_eq!(t.hamiltonian.n_qubits(), t.reference.n_qubits(), "{}", t.name);
        }
    }
}
