#![allow(dead_code)]

use msbench_core::mol::{BondOrder, Molecule};
use msbench_testkit::{Graph, GraphAtom, GraphBond};

/// Converts a parsed molecule into the testkit's plain graph so it can be
/// re-written by the independent random SMILES writer.
pub fn to_graph(mol: &Molecule) -> Graph {
    let atoms = mol
        .atoms()
        .iter()
        .map(|a| GraphAtom {
            symbol: a.element.symbol().to_string(),
            aromatic: a.aromatic,
            charge: a.formal_charge,
            isotope: a.isotope,
            bracket_h: a.bracket.then_some(a.explicit_h),
        })
        .collect();
    let bonds = mol
        .bonds()
        .iter()
        .map(|b| GraphBond {
            a: b.endpoints.0,
            b: b.endpoints.1,
            order: match b.order {
                BondOrder::Single => 1,
                BondOrder::Double => 2,
                BondOrder::Triple => 3,
                BondOrder::Aromatic => 4,
            },
        })
        .collect();
    Graph { atoms, bonds }
}
