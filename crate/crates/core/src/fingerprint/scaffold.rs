use crate::mol::{canonical_form, BondOrder, Element, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaffoldKey {
    pub key: String,
    pub is_acyclic: bool,
}

impl ScaffoldKey {
    fn acyclic() -> ScaffoldKey {
        ScaffoldKey {
            key: String::new(),
            is_acyclic: true,
        }
    }
}

/// Ring systems, linkers between them, and terminal atoms double-bonded to
/// either. `None` when the molecule has no ring.
pub fn scaffold_molecule(mol: &Molecule) -> Option<Molecule> {
    if !mol.bonds().iter().any(|b| b.in_ring) {
        return None;
    }
    let n = mol.atom_count();
    let mut alive: Vec<bool> = mol.atoms().iter().map(|a| a.element != Element::H).collect();
    let mut degree: Vec<usize> = (0..n)
        .map(|i| mol.neighbors(i).iter().filter(|&&(nb, _)| alive[nb]).count())
        .collect();
    let mut queue: Vec<usize> = (0..n).filter(|&i| alive[i] && degree[i] <= 1).collect();
    while let Some(i) = queue.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &(nb, _) in mol.neighbors(i) {
            if alive[nb] {
                degree[nb] -= 1;
                if degree[nb] == 1 {
                    queue.push(nb);
                }
            }
        }
    }

    let mut keep = alive.clone();
    for b in mol.bonds() {
        let (x, y) = b.endpoints;
        if b.order != BondOrder::Double || alive[x] == alive[y] {
            continue;
        }
        let outer = if alive[x] { y } else { x };
        if mol.atoms()[outer].element != Element::H {
            keep[outer] = true;
        }
    }
    Some(mol.induced_subgraph(&keep, true))
}

/// Canonical key of the Murcko framework.
pub fn murcko_scaffold(mol: &Molecule) -> ScaffoldKey {
    match scaffold_molecule(mol) {
        None => ScaffoldKey::acyclic(),
        Some(s) => ScaffoldKey {
            key: canonical_form(&s),
            is_acyclic: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::parse_smiles;

    fn key(s: &str) -> ScaffoldKey {
        murcko_scaffold(&parse_smiles(s).unwrap())
    }

    fn canon(s: &str) -> String {
        canonical_form(&parse_smiles(s).unwrap())
    }

    #[test]
    fn acyclic_is_empty() {
        assert_eq!(key("CCCC"), ScaffoldKey::acyclic());
        assert_eq!(key("[Na+].[Cl-]"), ScaffoldKey::acyclic());
    }

    #[test]
    fn side_chains_are_pruned() {
        assert_eq!(key("CCc1ccccc1").key, canon("c1ccccc1"));
        assert_eq!(key("c1ccccc1").key, canon("c1ccccc1"));
        assert_eq!(key("CC(=O)Oc1ccccc1C(=O)O").key, canon("c1ccccc1"));
    }

    #[test]
    fn linkers_and_exocyclic_double_bonds_stay() {
        assert_eq!(key("c1ccccc1CCc1ccccc1C").key, canon("c1ccccc1CCc1ccccc1"));
        assert_eq!(key("CC1CCC(=O)CC1").key, canon("O=C1CCCCC1"));
        assert_eq!(key("O=C(c1ccccc1)c1ccccc1").key, canon("O=C(c1ccccc1)c1ccccc1"));
    }

    #[test]
    fn cut_aromatic_nitrogen_keeps_its_hydrogen() {
        assert_eq!(key("Cn1cccc1").key, canon("c1cc[nH]c1"));
    }
}
