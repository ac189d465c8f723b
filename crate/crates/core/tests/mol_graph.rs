mod common;

use msbench_core::mol::{canonical_form, parse_smiles, Molecule};
use msbench_testkit::{random_molecule, random_smiles, DRUGS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// (SMILES, heavy atoms, bonds, fragments, ring bonds), counted by hand.
const FIXTURES: &[(&str, usize, usize, usize, usize)] = &[
    ("C", 1, 0, 1, 0),
    ("CC", 2, 1, 1, 0),
    ("CCO", 3, 2, 1, 0),
    ("CC(=O)O", 4, 3, 1, 0),
    ("C#N", 2, 1, 1, 0),
    ("c1ccccc1", 6, 6, 1, 6),
    ("C1CCCCC1", 6, 6, 1, 6),
    ("C1CC1CC", 5, 5, 1, 3),
    ("c1ccc2ccccc2c1", 10, 11, 1, 11),
    ("c1ccccc1-c1ccccc1", 12, 13, 1, 12),
    ("CC(=O)Oc1ccccc1C(=O)O", 13, 13, 1, 6),
    ("Cn1cnc2c1c(=O)n(C)c(=O)n2C", 14, 15, 1, 10),
    ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", 15, 15, 1, 6),
    ("CC(=O)Nc1ccc(O)cc1", 11, 11, 1, 6),
    ("CN1CCCC1c1cccnc1", 12, 13, 1, 11),
    ("CN(C)C(=N)NC(=N)N", 9, 8, 1, 0),
    ("[Na+].[Cl-]", 2, 0, 2, 0),
    ("CCO.O", 4, 2, 2, 0),
    ("C12C3C4C1C5C2C3C45", 8, 12, 1, 12),
    ("C1CC2CCC1CC2", 8, 9, 1, 9),
    ("OC(=O)C(N)Cc1c[nH]c2ccccc12", 15, 16, 1, 10),
    ("FC(F)(F)c1ccc(Cl)cc1", 11, 11, 1, 6),
    ("C1CCC2(C1)CCC2", 8, 9, 1, 9),
    ("O=C1CCCCC1", 7, 7, 1, 6),
    ("CCCCCCCCCCCCCCCC(=O)O", 18, 17, 1, 0),
];

#[test]
fn hand_counted_fixture_counts() {
    for &(s, heavy, bonds, frags, ring) in FIXTURES {
        let m = parse_smiles(s).unwrap();
        assert_eq!(m.heavy_atom_count(), heavy, "{s} heavy atoms");
        assert_eq!(m.bond_count(), bonds, "{s} bonds");
        assert_eq!(m.fragment_count(), frags, "{s} fragments");
        assert_eq!(m.bonds().iter().filter(|b| b.in_ring).count(), ring, "{s} ring bonds");
    }
}

/// Marks every bond that lies on at least one simple cycle, by enumerating
/// all simple paths that return to their start.
fn cycle_oracle(mol: &Molecule) -> Vec<bool> {
    let n = mol.atom_count();
    let mut flags = vec![false; mol.bond_count()];
    fn walk(
        mol: &Molecule,
        start: usize,
        u: usize,
        path_bonds: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        flags: &mut Vec<bool>,
    ) {
        for &(v, b) in mol.neighbors(u) {
            if path_bonds.contains(&b) {
                continue;
            }
            if v == start && path_bonds.len() >= 2 {
                for &pb in path_bonds.iter() {
                    flags[pb] = true;
                }
                flags[b] = true;
                continue;
            }
            if on_path[v] || v < start {
                continue;
            }
            on_path[v] = true;
            path_bonds.push(b);
            walk(mol, start, v, path_bonds, on_path, flags);
            path_bonds.pop();
            on_path[v] = false;
        }
    }
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        walk(mol, start, start, &mut Vec::new(), &mut on_path, &mut flags);
    }
    flags
}

#[test]
fn ring_flags_match_cycle_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut smiles: Vec<String> = FIXTURES.iter().map(|f| f.0.to_string()).collect();
    for _ in 0..400 {
        smiles.push(random_smiles(&random_molecule(&mut rng), &mut rng));
    }
    for s in &smiles {
        let m = parse_smiles(s).unwrap();
        if m.atom_count() > 12 {
            continue;
        }
        let (bond_flags, atom_flags) = m.ring_membership();
        assert_eq!(bond_flags, cycle_oracle(&m), "{s}");
        for (i, &flag) in atom_flags.iter().enumerate() {
            let incident = m.neighbors(i).iter().any(|&(_, b)| bond_flags[b]);
            assert_eq!(flag, incident, "{s} atom {i}");
        }
        checked += 1;
    }
    assert!(checked > 100, "only {checked} small molecules checked");
}

#[test]
fn caffeine_permutations_share_one_canonical_form() {
    let caffeine = parse_smiles("Cn1cnc2c1c(=O)n(C)c(=O)n2C").unwrap();
    let graph = common::to_graph(&caffeine);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut forms = std::collections::BTreeSet::new();
    let mut inputs = std::collections::BTreeSet::new();
    for _ in 0..20 {
        let s = random_smiles(&graph, &mut rng);
        inputs.insert(s.clone());
        forms.insert(canonical_form(&parse_smiles(&s).unwrap()));
    }
    assert!(inputs.len() > 10, "writer produced too few distinct orderings");
    assert_eq!(forms.len(), 1, "{forms:?}");
}

#[test]
fn canonical_form_roundtrips() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut corpus: Vec<String> = DRUGS.iter().map(|d| d.1.to_string()).collect();
    corpus.extend(FIXTURES.iter().map(|f| f.0.to_string()));
    for _ in 0..300 {
        corpus.push(random_smiles(&random_molecule(&mut rng), &mut rng));
    }
    for s in &corpus {
        let m = parse_smiles(s).unwrap();
        let c = canonical_form(&m);
        let again = parse_smiles(&c).unwrap_or_else(|e| panic!("{s} -> {c}: {e}"));
        assert_eq!(again.atom_count(), m.atom_count(), "{s} -> {c}");
        assert_eq!(again.bond_count(), m.bond_count(), "{s} -> {c}");
        assert_eq!(canonical_form(&again), c, "{s}");
    }
}

#[test]
fn random_orderings_canonicalize_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..300 {
        let g = random_molecule(&mut rng);
        let reference = canonical_form(&parse_smiles(&random_smiles(&g, &mut rng)).unwrap());
        for _ in 0..4 {
            let s = random_smiles(&g, &mut rng);
            assert_eq!(canonical_form(&parse_smiles(&s).unwrap()), reference, "{s}");
        }
    }
}

#[test]
fn invalid_smiles_are_rejected_with_positions() {
    let bad = [
        "C1CC", "C(", "C)", "((C", "C==O", "C#", "[", "[C", "[]", "C[Zz]", "Q", "C%", "C%1", "c1cc",
        "CC(C)(", "C-(C)", "C.", ".", "C..C", "[13]", "[C+a]", "C=1CC#1", "C11", "C@C", "1",
    ];
    for s in bad {
        let err = parse_smiles(s).expect_err(s);
        let pos = err.position().unwrap_or_else(|| panic!("{s}: {err} carries no position"));
        assert!(pos <= s.len(), "{s}: position {pos}");
    }
}
