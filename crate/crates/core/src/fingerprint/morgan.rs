//! Morgan environment hashing.
//!
//! Every identifier is produced by [`mix64`], the SplitMix64 output
//! finalizer, chained through [`fold`]. Both are pinned by golden fixtures;
//! changing either changes every stored fingerprint.

use std::collections::BTreeSet;

use crate::mol::{Element, Molecule};

use super::{FingerprintBits, FingerprintError};

const SEED: u64 = 0x6d73_6265_6e63_6821;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fold(h: u64, v: u64) -> u64 {
    mix64(h ^ v.wrapping_add(GOLDEN).wrapping_add(h << 6).wrapping_add(h >> 2))
}

fn fold_all(values: &[u64]) -> u64 {
    values.iter().fold(SEED, |h, &v| fold(h, v))
}

/// Per-round identifiers for the heavy atoms of `mol`; hydrogen nodes count
/// toward their neighbour's hydrogen total instead of being centres.
fn rounds(mol: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let heavy: Vec<usize> = (0..mol.atom_count())
        .filter(|&i| mol.atoms()[i].element != Element::H)
        .collect();
    let mut slot = vec![usize::MAX; mol.atom_count()];
    for (k, &i) in heavy.iter().enumerate() {
        slot[i] = k;
    }

    let mut ids: Vec<u64> = heavy
        .iter()
        .map(|&i| {
            let a = &mol.atoms()[i];
            let h_nodes = mol
                .neighbors(i)
                .iter()
                .filter(|&&(nb, _)| mol.atoms()[nb].element == Element::H)
                .count();
            let degree = mol.degree(i) - h_nodes;
            let total_h = usize::from(mol.implicit_hydrogens(i)) + h_nodes;
            fold_all(&[
                u64::from(a.element.atomic_number()),
                degree as u64,
                total_h as u64,
                i64::from(a.formal_charge) as u64,
                u64::from(a.in_ring),
                u64::from(a.aromatic),
            ])
        })
        .collect();

    let mut out = vec![ids.clone()];
    for round in 1..=radius {
        let next: Vec<u64> = heavy
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .filter(|&&(nb, _)| slot[nb] != usize::MAX)
                    .map(|&(nb, b)| (u64::from(mol.bonds()[b].order.code()), ids[slot[nb]]))
                    .collect();
                if env.is_empty() {
                    // Nothing to expand: an isolated atom keeps one environment.
                    return ids[k];
                }
                env.sort_unstable();
                let mut h = fold(fold(SEED, u64::from(round)), ids[k]);
                for (code, id) in env {
                    h = fold(fold(h, code), id);
                }
                h
            })
            .collect();
        ids = next;
        out.push(ids.clone());
    }
    out
}

/// Distinct environment identifiers up to `radius`, over the largest
/// fragment.
pub fn morgan_identifiers(mol: &Molecule, radius: u32) -> BTreeSet<u64> {
    let frag = mol.largest_fragment();
    rounds(&frag, radius).into_iter().flatten().collect()
}

pub fn morgan_fingerprint(
    mol: &Molecule,
    radius: u32,
    bits: usize,
) -> Result<FingerprintBits, FingerprintError> {
    let mut fp = FingerprintBits::new(bits, radius)?;
    for id in morgan_identifiers(mol, radius) {
        fp.set((id % bits as u64) as usize);
    }
    Ok(fp)
}
