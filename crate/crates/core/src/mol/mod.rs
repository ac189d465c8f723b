//! Molecular graphs parsed from SMILES.
//!
//! A [`Molecule`] is immutable once built. Ring flags, implicit hydrogen
//! counts and fragment labels are derived at construction so every consumer
//! (fingerprints, scaffolds, canonical keys) sees the same graph.

mod canon;
mod element;
mod parse;
mod ring;

use std::fmt;

use thiserror::Error;

pub use canon::canonical_form;
pub use element::Element;
pub use parse::parse_smiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer code used by hashing and canonical refinement.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Bond order as a whole number of electron pairs; aromatic counts one.
    fn integral(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Mass number, when written.
    pub isotope: Option<u16>,
    /// Hydrogen count written inside brackets. Zero for organic-subset atoms,
    /// whose hydrogens are implicit.
    pub explicit_h: u8,
    /// Whether the atom was written in bracket form.
    pub bracket: bool,
    pub in_ring: bool,
}

impl Atom {
    pub fn organic(element: Element, aromatic: bool) -> Atom {
        Atom {
            element,
            aromatic,
            formal_charge: 0,
            isotope: None,
            explicit_h: 0,
            bracket: false,
            in_ring: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub endpoints: (usize, usize),
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond {
            endpoints: (a, b),
            order,
            in_ring: false,
        }
    }

    /// The endpoint opposite `atom`.
    pub fn other(&self, atom: usize) -> usize {
        if self.endpoints.0 == atom {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("bond {bond} references atom {atom}, but the molecule has {atoms} atoms")]
    AtomOutOfRange { bond: usize, atom: usize, atoms: usize },
    #[error("bond {bond} joins atom {atom} to itself")]
    SelfLoop { bond: usize, atom: usize },
    #[error("atoms {0} and {1} are bonded more than once")]
    DuplicateBond(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Per atom: (neighbor, bond index), in bond insertion order.
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
    fragment_of: Vec<usize>,
    fragment_count: usize,
    valence_overflow: usize,
    source_smiles: String,
}

impl Molecule {
    /// Builds a molecule from raw parts, deriving ring flags, hydrogen counts
    /// and connected components.
    pub fn from_parts(
        mut atoms: Vec<Atom>,
        mut bonds: Vec<Bond>,
        source_smiles: impl Into<String>,
    ) -> Result<Molecule, GraphError> {
        let n = atoms.len();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, b) in bonds.iter().enumerate() {
            let (x, y) = b.endpoints;
            for atom in [x, y] {
                if atom >= n {
                    return Err(GraphError::AtomOutOfRange { bond: i, atom, atoms: n });
                }
            }
            if x == y {
                return Err(GraphError::SelfLoop { bond: i, atom: x });
            }
            if adjacency[x].iter().any(|&(nb, _)| nb == y) {
                return Err(GraphError::DuplicateBond(x.min(y), x.max(y)));
            }
            adjacency[x].push((y, i));
            adjacency[y].push((x, i));
        }

        let ring_bonds = ring::ring_bonds(n, &adjacency, bonds.len());
        for (b, flag) in bonds.iter_mut().zip(&ring_bonds) {
            b.in_ring = *flag;
        }
        for a in atoms.iter_mut() {
            a.in_ring = false;
        }
        for b in bonds.iter().filter(|b| b.in_ring) {
            atoms[b.endpoints.0].in_ring = true;
            atoms[b.endpoints.1].in_ring = true;
        }

        let (fragment_of, fragment_count) = components(n, &adjacency);

        let mut valence_overflow = 0;
        let hydrogens = (0..n)
            .map(|i| {
                let (h, overflow) = hydrogen_count(&atoms[i], &adjacency[i], &bonds);
                valence_overflow += usize::from(overflow);
                h
            })
            .collect();

        Ok(Molecule {
            atoms,
            bonds,
            adjacency,
            hydrogens,
            fragment_of,
            fragment_count,
            valence_overflow,
            source_smiles: source_smiles.into(),
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Atoms other than hydrogen.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(nb, _)| nb == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// Hydrogens attached to an atom that are not graph nodes: the bracket
    /// count for bracket atoms, the default-valence remainder otherwise.
    pub fn implicit_hydrogens(&self, atom: usize) -> u8 {
        self.hydrogens[atom]
    }

    /// Number of atoms whose bond-order sum exceeded every allowed valence.
    /// Their implicit hydrogen count was clamped to zero.
    pub fn valence_overflow_count(&self) -> usize {
        self.valence_overflow
    }

    pub fn has_valence_overflow(&self) -> bool {
        self.valence_overflow > 0
    }

    pub fn fragment_count(&self) -> usize {
        self.fragment_count
    }

    pub fn fragment_of(&self, atom: usize) -> usize {
        self.fragment_of[atom]
    }

    /// Atom indices of each connected component, ordered by lowest atom index.
    pub fn fragments(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.fragment_count];
        for (i, &f) in self.fragment_of.iter().enumerate() {
            out[f].push(i);
        }
        out
    }

    pub fn source_smiles(&self) -> &str {
        &self.source_smiles
    }

    /// Per-bond and per-atom ring flags.
    pub fn ring_membership(&self) -> (Vec<bool>, Vec<bool>) {
        (
            self.bonds.iter().map(|b| b.in_ring).collect(),
            self.atoms.iter().map(|a| a.in_ring).collect(),
        )
    }

    /// The induced subgraph on atoms flagged in `keep`. When `cap_hydrogens`
    /// is set, every atom that loses a bond is pinned to an explicit hydrogen
    /// count of its old count plus the removed bond orders, so cut atoms keep
    /// their valence (an N-substituted pyrrole nitrogen becomes `[nH]`).
    pub fn induced_subgraph(&self, keep: &[bool], cap_hydrogens: bool) -> Molecule {
        let mut remap = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if keep[i] {
                remap[i] = atoms.len();
                atoms.push(a.clone());
            }
        }
        let mut bonds = Vec::new();
        for b in &self.bonds {
            let (x, y) = b.endpoints;
            match (keep[x], keep[y]) {
                (true, true) => bonds.push(Bond::new(remap[x], remap[y], b.order)),
                (true, false) | (false, true) if cap_hydrogens => {
                    let kept = if keep[x] { x } else { y };
                    let atom = &mut atoms[remap[kept]];
                    if !atom.bracket {
                        atom.bracket = true;
                        atom.explicit_h = self.hydrogens[kept];
                    }
                    atom.explicit_h = atom.explicit_h.saturating_add(b.order.integral());
                }
                _ => {}
            }
        }
        Molecule::from_parts(atoms, bonds, self.source_smiles.clone())
            .expect("induced subgraph of a valid molecule is valid")
    }

    /// The component with the most heavy atoms; ties go to the component whose
    /// canonical form sorts first.
    pub fn largest_fragment(&self) -> Molecule {
        if self.fragment_count <= 1 {
            return self.clone();
        }
        let mut best: Option<(usize, String, Molecule)> = None;
        for frag in self.fragments() {
            let mut keep = vec![false; self.atoms.len()];
            for &i in &frag {
                keep[i] = true;
            }
            let sub = self.induced_subgraph(&keep, false);
            let heavy = sub.heavy_atom_count();
            let key = canonical_form(&sub);
            let better = match &best {
                None => true,
                Some((h, k, _)) => heavy > *h || (heavy == *h && key < *k),
            };
            if better {
                best = Some((heavy, key, sub));
            }
        }
        best.map(|(_, _, m)| m).expect("at least one fragment")
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical_form(self))
    }
}

fn components(n: usize, adjacency: &[Vec<(usize, usize)>]) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Implicit hydrogens of one atom and whether its valence overflowed.
///
/// Aromatic bonds count one each, plus one shared pi electron for the atom.
/// Atoms that cannot fit that extra electron within their lowest valence
/// (furan oxygen, thiophene sulfur, N-substituted pyrrole nitrogen) are
/// treated as lone-pair donors and contribute no extra electron.
fn hydrogen_count(atom: &Atom, adjacency: &[(usize, usize)], bonds: &[Bond]) -> (u8, bool) {
    if atom.bracket {
        return (atom.explicit_h, false);
    }
    let Some(valences) = atom.element.default_valences() else {
        return (0, false);
    };
    let mut sum: u32 = 0;
    let mut aromatic_bonds = 0;
    for &(_, bi) in adjacency {
        let order = bonds[bi].order;
        if order == BondOrder::Aromatic {
            aromatic_bonds += 1;
        }
        sum += u32::from(order.integral());
    }
    if aromatic_bonds > 0 || atom.aromatic {
        let lowest = u32::from(valences[0]);
        if sum < lowest {
            sum += 1;
        }
    }
    match valences.iter().map(|&v| u32::from(v)).find(|&v| v >= sum) {
        Some(v) => ((v - sum) as u8, false),
        None => (0, true),
    }
}
