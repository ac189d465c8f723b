//! Canonical SMILES emission.
//!
//! Atoms are ranked by iterative neighborhood refinement over
//! (element, charge, isotope, aromatic, degree, hydrogen count). Remaining
//! ties are split by individualizing each tied atom in turn and keeping the
//! lexicographically smallest output string. The final ranking drives a
//! depth-first writer.

use std::fmt::Write;

use super::{BondOrder, Element, Molecule};

/// Upper bound on fully explored individualization leaves. Past it, each
/// remaining branch point only follows its first candidate.
const LEAF_BUDGET: usize = 512;

/// (atom, parent bond, sorted neighbors, cursor)
type Frame = (usize, usize, Vec<(usize, usize)>, usize);

/// Deterministic canonical SMILES of a molecule. Isomorphic graphs map to
/// identical strings regardless of input atom order.
pub fn canonical_form(mol: &Molecule) -> String {
    let n = mol.atom_count();
    if n == 0 {
        return String::new();
    }
    let initial = initial_ranks(mol);
    let refined = refine(mol, initial);
    let mut search = Search {
        mol,
        best: None,
        leaves: 0,
    };
    search.explore(refined);
    search.best.expect("at least one leaf")
}

struct Search<'a> {
    mol: &'a Molecule,
    best: Option<String>,
    leaves: usize,
}

impl Search<'_> {
    fn explore(&mut self, ranks: Vec<u32>) {
        let Some(cell) = first_tied_cell(&ranks) else {
            self.leaves += 1;
            let s = write_smiles(self.mol, &ranks);
            if self.best.as_ref().is_none_or(|b| s < *b) {
                self.best = Some(s);
            }
            return;
        };
        for (i, &atom) in cell.iter().enumerate() {
            if i > 0 && self.leaves >= LEAF_BUDGET {
                break;
            }
            let split = individualize(&ranks, atom);
            let refined = refine(self.mol, split);
            self.explore(refined);
        }
    }
}

fn initial_ranks(mol: &Molecule) -> Vec<u32> {
    let keys: Vec<_> = (0..mol.atom_count())
        .map(|i| {
            let a = &mol.atoms()[i];
            (
                a.element.atomic_number(),
                a.formal_charge,
                a.isotope.unwrap_or(0),
                a.aromatic,
                mol.degree(i),
                mol.implicit_hydrogens(i),
            )
        })
        .collect();
    dense_ranks(&keys)
}

/// Maps keys to dense ranks 0..k preserving key order.
fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut r = 0;
    for w in 0..order.len() {
        if w > 0 && keys[order[w]] != keys[order[w - 1]] {
            r += 1;
        }
        ranks[order[w]] = r;
    }
    ranks
}

fn class_count(ranks: &[u32]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Refines ranks by neighbor multisets until the partition stops splitting.
/// Refinement only splits classes, so earlier order is preserved.
fn refine(mol: &Molecule, mut ranks: Vec<u32>) -> Vec<u32> {
    let n = ranks.len();
    let mut classes = class_count(&ranks);
    loop {
        if classes == n {
            return ranks;
        }
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u32, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (ranks[j], mol.bonds()[b].order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_ranks(&keys);
        let next_classes = class_count(&next);
        ranks = next;
        if next_classes == classes {
            return ranks;
        }
        classes = next_classes;
    }
}

/// Atoms of the lowest-ranked class holding more than one atom, by index.
fn first_tied_cell(ranks: &[u32]) -> Option<Vec<usize>> {
    let mut counts = vec![0usize; class_count(ranks)];
    for &r in ranks {
        counts[r as usize] += 1;
    }
    let target = counts.iter().position(|&c| c > 1)? as u32;
    Some(
        ranks
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r == target)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Gives `atom` a rank strictly below the rest of its class.
fn individualize(ranks: &[u32], atom: usize) -> Vec<u32> {
    let keys: Vec<(u32, bool)> = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i != atom))
        .collect();
    dense_ranks(&keys)
}

/// Depth-first SMILES writer driven by a total atom ranking. Each fragment
/// starts at its lowest-ranked atom and neighbors are visited in rank order.
pub(crate) fn write_smiles(mol: &Molecule, ranks: &[u32]) -> String {
    let n = mol.atom_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);

    // pass 1: spanning forest and ring-closure bonds
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut is_closure = vec![false; mol.bond_count()];
    let mut closures_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for &start in &order {
        if visited[start] {
            continue;
        }
        roots.push(start);
        visited[start] = true;
        let mut stack: Vec<Frame> =
            vec![(start, usize::MAX, sorted_neighbors(mol, start, ranks), 0)];
        while let Some(top) = stack.last_mut() {
            let (u, parent_bond) = (top.0, top.1);
            if top.3 == top.2.len() {
                stack.pop();
                continue;
            }
            let (v, b) = top.2[top.3];
            top.3 += 1;
            if b == parent_bond || is_closure[b] {
                continue;
            }
            if visited[v] {
                is_closure[b] = true;
                closures_at[u].push((v, b));
                closures_at[v].push((u, b));
            } else {
                visited[v] = true;
                children[u].push((v, b));
                stack.push((v, b, sorted_neighbors(mol, v, ranks), 0));
            }
        }
    }

    // pass 2: emission
    let mut out = String::new();
    let mut labels: Vec<Option<u32>> = vec![None; mol.bond_count()];
    let mut in_use: Vec<bool> = Vec::new();
    let mut emitted = vec![false; n];
    for (fi, &root) in roots.iter().enumerate() {
        if fi > 0 {
            out.push('.');
        }
        // explicit stack of actions keeps deep chains off the call stack
        enum Step {
            Atom(usize, usize),
            Text(&'static str),
        }
        let mut steps = vec![Step::Atom(root, usize::MAX)];
        while let Some(step) = steps.pop() {
            let (u, via) = match step {
                Step::Text(t) => {
                    out.push_str(t);
                    continue;
                }
                Step::Atom(u, via) => (u, via),
            };
            if via != usize::MAX {
                let b = &mol.bonds()[via];
                out.push_str(bond_symbol(mol, b.endpoints.0, b.endpoints.1, b.order));
            }
            write_atom(&mut out, mol, u);
            emitted[u] = true;

            let mut closing: Vec<(u32, usize, usize)> = Vec::new();
            let mut opening: Vec<(usize, usize)> = Vec::new();
            for &(v, b) in &closures_at[u] {
                if emitted[v] && v != u {
                    if let Some(l) = labels[b] {
                        closing.push((l, v, b));
                        continue;
                    }
                }
                opening.push((v, b));
            }
            closing.sort_unstable();
            opening.sort_by_key(|&(v, _)| ranks[v]);
            let mut freed = Vec::new();
            for (label, v, b) in closing {
                let bond = &mol.bonds()[b];
                out.push_str(bond_symbol(mol, u, v, bond.order));
                write_label(&mut out, label);
                freed.push(label);
            }
            for (_, b) in opening {
                let label = match in_use.iter().position(|&x| !x) {
                    Some(i) => i,
                    None => {
                        in_use.push(false);
                        in_use.len() - 1
                    }
                };
                in_use[label] = true;
                labels[b] = Some(label as u32 + 1);
                write_label(&mut out, label as u32 + 1);
            }
            for label in freed {
                in_use[label as usize - 1] = false;
            }

            let kids = &children[u];
            // pushed in reverse so the first child is written first
            for (k, &(v, b)) in kids.iter().enumerate().rev() {
                if k + 1 < kids.len() {
                    steps.push(Step::Text(")"));
                    steps.push(Step::Atom(v, b));
                    steps.push(Step::Text("("));
                } else {
                    steps.push(Step::Atom(v, b));
                }
            }
        }
    }
    out
}

fn sorted_neighbors(mol: &Molecule, atom: usize, ranks: &[u32]) -> Vec<(usize, usize)> {
    let mut nb = mol.neighbors(atom).to_vec();
    nb.sort_by_key(|&(v, _)| ranks[v]);
    nb
}

fn write_label(out: &mut String, label: u32) {
    if label < 10 {
        let _ = write!(out, "{label}");
    } else if label < 100 {
        let _ = write!(out, "%{label}");
    } else {
        let _ = write!(out, "%({label})");
    }
}

fn bond_symbol(mol: &Molecule, a: usize, b: usize, order: BondOrder) -> &'static str {
    let both_aromatic = mol.atoms()[a].aromatic && mol.atoms()[b].aromatic;
    match order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

/// Writes an atom in organic-subset form when re-reading it would give the
/// same hydrogen count, in bracket form otherwise.
fn write_atom(out: &mut String, mol: &Molecule, i: usize) {
    let a = &mol.atoms()[i];
    let h = mol.implicit_hydrogens(i);
    let aromatic_ok = !a.aromatic || matches!(a.element, Element::B | Element::C | Element::N | Element::O | Element::P | Element::S);
    let bare = a.element.is_organic_subset()
        && aromatic_ok
        && a.formal_charge == 0
        && a.isotope.is_none()
        && organic_hydrogens(mol, i) == Some(h);
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if bare {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    if let Some(iso) = a.isotope {
        let _ = write!(out, "{iso}");
    }
    out.push_str(&symbol);
    match h {
        0 => {}
        1 => out.push('H'),
        _ => {
            let _ = write!(out, "H{h}");
        }
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            let _ = write!(out, "+{c}");
        }
        c => {
            let _ = write!(out, "-{}", -c);
        }
    }
    out.push(']');
}

/// Hydrogen count an organic-subset reading of this atom would produce,
/// or `None` when that reading would overflow its valence.
fn organic_hydrogens(mol: &Molecule, i: usize) -> Option<u8> {
    let a = &mol.atoms()[i];
    if !a.bracket {
        // counts already came from the organic-subset rule
        return Some(mol.implicit_hydrogens(i));
    }
    let mut probe = a.clone();
    probe.bracket = false;
    probe.explicit_h = 0;
    let (h, overflow) = super::hydrogen_count(&probe, mol.neighbors(i), mol.bonds());
    (!overflow).then_some(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    fn canon(s: &str) -> String {
        canonical_form(&parse_smiles(s).unwrap())
    }

    #[test]
    fn atom_order_does_not_matter() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(C)O"), canon("CCO"));
        assert_eq!(canon("c1ccccc1O"), canon("Oc1ccccc1"));
        assert_eq!(canon("C1CC1CC"), canon("CCC1CC1"));
        assert_ne!(canon("CCO"), canon("COC"));
    }

    #[test]
    fn deterministic() {
        assert_eq!(canon("C"), canon("C"));
        assert_eq!(canon("C"), "C");
    }

    #[test]
    fn bracket_normalization() {
        assert_eq!(canon("[CH3][CH2][OH]"), canon("CCO"));
        assert_eq!(canon("N[C@@H](C)C(=O)O"), canon("NC(C)C(=O)O"));
        assert_ne!(canon("[CH2]C"), canon("CC"));
        assert_eq!(canon("[NH4+]"), "[NH4+]");
        assert_eq!(canon("[13CH4]"), "[13CH4]");
    }

    #[test]
    fn roundtrip_reparses_to_same_form() {
        for s in [
            "CC(=O)Oc1ccccc1C(=O)O",
            "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
            "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
            "C1CC2CCC1CC2",
            "c1ccc2ccccc2c1",
            "C12C3C4C1C5C2C3C45",
            "[Na+].[Cl-]",
            "OC(=O)C(N)Cc1c[nH]c2ccccc12",
            "C#N",
            "c1ccccc1-c1ccccc1",
            "C:C",
        ] {
            let first = canon(s);
            let second = canon(&first);
            assert_eq!(first, second, "{s}");
        }
    }

    #[test]
    fn cubane_is_symmetric_and_stable() {
        let a = canon("C12C3C4C1C5C2C3C45");
        assert_eq!(parse_smiles(&a).unwrap().bond_count(), 12);
    }
}
