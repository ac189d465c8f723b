//! Test-only helpers shared by the integration suites.
//!
//! Nothing here touches the library under test: graphs are plain structs and
//! the SMILES writer is a separate implementation, so permuted strings are
//! an independent check on parsing and canonicalization.

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAtom {
    pub symbol: String,
    pub aromatic: bool,
    pub charge: i8,
    pub isotope: Option<u16>,
    /// Bracket hydrogen count; `None` writes the atom in organic-subset form.
    pub bracket_h: Option<u8>,
}

impl GraphAtom {
    pub fn organic(symbol: &str, aromatic: bool) -> GraphAtom {
        GraphAtom {
            symbol: symbol.to_string(),
            aromatic,
            charge: 0,
            isotope: None,
            bracket_h: None,
        }
    }
}

/// Bond order codes: 1 single, 2 double, 3 triple, 4 aromatic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphBond {
    pub a: usize,
    pub b: usize,
    pub order: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    pub atoms: Vec<GraphAtom>,
    pub bonds: Vec<GraphBond>,
}

impl Graph {
    fn add_atom(&mut self, atom: GraphAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn add_bond(&mut self, a: usize, b: usize, order: u8) {
        self.bonds.push(GraphBond { a, b, order });
    }

    fn degree(&self, i: usize) -> usize {
        self.bonds.iter().filter(|b| b.a == i || b.b == i).count()
    }

    fn order_sum(&self, i: usize) -> u8 {
        self.bonds
            .iter()
            .filter(|b| b.a == i || b.b == i)
            .map(|b| if b.order == 4 { 1 } else { b.order })
            .sum()
    }

    fn neighbors(&self, i: usize) -> Vec<(usize, u8)> {
        self.bonds
            .iter()
            .filter_map(|b| {
                if b.a == i {
                    Some((b.b, b.order))
                } else if b.b == i {
                    Some((b.a, b.order))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Appends another graph, returning the index offset of its atoms.
    fn absorb(&mut self, other: &Graph) -> usize {
        let off = self.atoms.len();
        self.atoms.extend(other.atoms.iter().cloned());
        for b in &other.bonds {
            self.add_bond(b.a + off, b.b + off, b.order);
        }
        off
    }
}

fn atom_text(atom: &GraphAtom) -> String {
    let sym = if atom.aromatic {
        atom.symbol.to_ascii_lowercase()
    } else {
        atom.symbol.clone()
    };
    match atom.bracket_h {
        None if atom.charge == 0 && atom.isotope.is_none() => sym,
        h => {
            let mut s = String::from("[");
            if let Some(i) = atom.isotope {
                s.push_str(&i.to_string());
            }
            s.push_str(&sym);
            match h.unwrap_or(0) {
                0 => {}
                1 => s.push('H'),
                n => s.push_str(&format!("H{n}")),
            }
            match atom.charge {
                0 => {}
                1 => s.push('+'),
                -1 => s.push('-'),
                c if c > 0 => s.push_str(&format!("+{c}")),
                c => s.push_str(&format!("-{}", -c)),
            }
            s.push(']');
            s
        }
    }
}

fn bond_text(g: &Graph, a: usize, b: usize, order: u8) -> &'static str {
    let both = g.atoms[a].aromatic && g.atoms[b].aromatic;
    match order {
        1 if both => "-",
        1 => "",
        2 => "=",
        3 => "#",
        4 if both => "",
        _ => ":",
    }
}

fn ring_label(n: usize) -> String {
    if n < 10 {
        n.to_string()
    } else {
        format!("%{n}")
    }
}

/// Writes the graph as SMILES with a random start atom per component,
/// random neighbor visiting order and random fragment order.
pub fn random_smiles<R: Rng>(g: &Graph, rng: &mut R) -> String {
    let n = g.atoms.len();
    let mut visited = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    let mut pieces = Vec::new();
    for &s in &starts {
        if visited[s] {
            continue;
        }
        let mut out = String::new();
        let mut labels: Vec<(usize, usize, usize)> = Vec::new(); // (from, to, label)
        write_component(g, s, rng, &mut visited, &mut out, &mut labels);
        pieces.push(out);
    }
    pieces.shuffle(rng);
    pieces.join(".")
}

fn write_component<R: Rng>(
    g: &Graph,
    root: usize,
    rng: &mut R,
    visited: &mut [bool],
    out: &mut String,
    open: &mut Vec<(usize, usize, usize)>,
) {
    // First pass: randomized DFS tree. Second pass: emission.
    let n = g.atoms.len();
    let mut children: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    let mut back: Vec<(usize, usize, u8)> = Vec::new();
    let mut order_seen = Vec::new();
    let mut stack = vec![(root, usize::MAX)];
    let mut entered = vec![false; n];
    let mut tree_parent = vec![usize::MAX; n];
    while let Some((u, p)) = stack.pop() {
        if entered[u] {
            continue;
        }
        entered[u] = true;
        visited[u] = true;
        tree_parent[u] = p;
        if p != usize::MAX {
            let ord = g.neighbors(p).iter().find(|x| x.0 == u).unwrap().1;
            children[p].push((u, ord));
        }
        order_seen.push(u);
        let mut nb = g.neighbors(u);
        nb.shuffle(rng);
        for (v, _) in nb {
            if !entered[v] {
                stack.push((v, u));
            }
        }
    }
    // every non-tree bond inside the component is a ring closure
    for bnd in &g.bonds {
        if entered[bnd.a] && entered[bnd.b] && tree_parent[bnd.a] != bnd.b && tree_parent[bnd.b] != bnd.a {
            back.push((bnd.a, bnd.b, bnd.order));
        }
    }
    let pos: Vec<usize> = {
        let mut p = vec![usize::MAX; n];
        for (i, &u) in order_seen.iter().enumerate() {
            p[u] = i;
        }
        p
    };
    // writing children in discovery order makes the preorder equal `order_seen`
    for c in children.iter_mut() {
        c.sort_by_key(|&(v, _)| pos[v]);
    }
    let mut used_labels: Vec<bool> = vec![false; 100];
    emit(g, root, None, &children, &back, &pos, out, open, &mut used_labels, rng);
}

#[allow(clippy::too_many_arguments)]
fn emit<R: Rng>(
    g: &Graph,
    u: usize,
    via: Option<(usize, u8)>,
    children: &[Vec<(usize, u8)>],
    back: &[(usize, usize, u8)],
    pos: &[usize],
    out: &mut String,
    open: &mut Vec<(usize, usize, usize)>,
    used: &mut Vec<bool>,
    rng: &mut R,
) {
    if let Some((p, ord)) = via {
        out.push_str(bond_text(g, p, u, ord));
    }
    out.push_str(&atom_text(&g.atoms[u]));
    let mut freed = Vec::new();
    // close rings opened earlier
    let mut i = 0;
    while i < open.len() {
        let (from, to, label) = open[i];
        if to == u {
            let ord = back
                .iter()
                .find(|&&(a, b, _)| (a == from && b == u) || (a == u && b == from))
                .unwrap()
                .2;
            out.push_str(bond_text(g, from, u, ord));
            out.push_str(&ring_label(label));
            freed.push(label);
            open.swap_remove(i);
        } else {
            i += 1;
        }
    }
    // open rings towards atoms written later
    let mut outgoing: Vec<usize> = back
        .iter()
        .filter_map(|&(a, b, _)| {
            if a == u && pos[b] > pos[u] {
                Some(b)
            } else if b == u && pos[a] > pos[u] {
                Some(a)
            } else {
                None
            }
        })
        .collect();
    outgoing.shuffle(rng);
    for v in outgoing {
        let label = (1..100).find(|&l| !used[l]).expect("fewer than 99 open rings");
        used[label] = true;
        open.push((u, v, label));
        out.push_str(&ring_label(label));
    }
    for l in freed {
        used[l] = false;
    }
    let kids = &children[u];
    for (k, &(v, ord)) in kids.iter().enumerate() {
        let last = k + 1 == kids.len();
        if !last {
            out.push('(');
        }
        emit(g, v, Some((u, ord)), children, back, pos, out, open, used, rng);
        if !last {
            out.push(')');
        }
    }
}

struct Template {
    graph: Graph,
}

fn ring_template(symbols: &[(&str, bool)], fused_extra: &[(usize, usize)]) -> Template {
    let mut g = Graph::default();
    for &(s, ar) in symbols {
        g.add_atom(GraphAtom::organic(s, ar));
    }
    let ring_len = symbols.len();
    for i in 0..ring_len {
        let a = i;
        let b = (i + 1) % ring_len;
        let order = if symbols[a].1 && symbols[b].1 { 4 } else { 1 };
        g.add_bond(a, b, order);
    }
    for &(a, b) in fused_extra {
        let order = if symbols[a].1 && symbols[b].1 { 4 } else { 1 };
        g.add_bond(a, b, order);
    }
    Template { graph: g }
}

fn templates() -> Vec<Template> {
    let c = ("C", false);
    let ca = ("C", true);
    vec![
        ring_template(&[ca; 6], &[]),
        ring_template(&[ca, ca, ("N", true), ca, ca, ca], &[]),
        ring_template(&[c; 6], &[]),
        ring_template(&[c; 5], &[]),
        ring_template(&[c, c, ("N", false), c, c, c], &[]),
        ring_template(&[ca, ca, ca, ca, ("O", true)], &[]),
        ring_template(&[c; 3], &[]),
        ring_template(&[c, ("O", false), c, c, ("N", false), c], &[]),
        // naphthalene as a 10-cycle plus the fusion bond
        ring_template(&[ca; 10], &[(0, 5)]),
        // decalin-like bicycle
        ring_template(&[c; 10], &[(0, 5)]),
    ]
}

fn max_valence(atom: &GraphAtom) -> u8 {
    match (atom.symbol.as_str(), atom.aromatic) {
        ("C", true) => 3,
        ("N", true) | ("O", true) => 2,
        ("C", false) => 4,
        ("N", false) => 3,
        ("O", false) => 2,
        _ => 1,
    }
}

fn free_valence(g: &Graph, i: usize) -> u8 {
    let used = if g.atoms[i].aromatic { g.degree(i) as u8 } else { g.order_sum(i) };
    max_valence(&g.atoms[i]).saturating_sub(used)
}

fn attach_point<R: Rng>(g: &Graph, rng: &mut R, need: u8) -> Option<usize> {
    let cand: Vec<usize> = (0..g.atoms.len()).filter(|&i| free_valence(g, i) >= need).collect();
    cand.choose(rng).copied()
}

/// A random connected, valence-consistent molecule with `0..=3` ring units,
/// linker chains and small substituents.
pub fn random_molecule<R: Rng>(rng: &mut R) -> Graph {
    let templates = templates();
    let mut g = Graph::default();
    let units = rng.gen_range(0..=3);
    if units == 0 {
        let len = rng.gen_range(2..=8);
        let first = g.add_atom(GraphAtom::organic("C", false));
        let mut prev = first;
        for _ in 1..len {
            let sym = *["C", "C", "C", "N", "O"].choose(rng).unwrap();
            let Some(p) = (if free_valence(&g, prev) >= 1 { Some(prev) } else { attach_point(&g, rng, 1) }) else {
                break;
            };
            let a = g.add_atom(GraphAtom::organic(sym, false));
            g.add_bond(p, a, 1);
            prev = a;
        }
    } else {
        for u in 0..units {
            let t = &templates[rng.gen_range(0..templates.len())].graph;
            if u == 0 {
                g.absorb(t);
                continue;
            }
            let Some(from) = attach_point(&g, rng, 1) else { break };
            let mut tail = from;
            for _ in 0..rng.gen_range(0..=3) {
                let a = g.add_atom(GraphAtom::organic(if rng.gen_bool(0.8) { "C" } else { "N" }, false));
                g.add_bond(tail, a, 1);
                tail = a;
            }
            let off = g.absorb(t);
            let inner: Vec<usize> = (off..g.atoms.len()).filter(|&i| free_valence(&g, i) >= 1).collect();
            let Some(&to) = inner.choose(rng) else { break };
            g.add_bond(tail, to, 1);
        }
    }
    for _ in 0..rng.gen_range(0..=4) {
        match rng.gen_range(0..6) {
            0 => {
                // carbonyl on an sp3 carbon
                let cand: Vec<usize> = (0..g.atoms.len())
                    .filter(|&i| g.atoms[i].symbol == "C" && !g.atoms[i].aromatic && free_valence(&g, i) >= 2)
                    .collect();
                if let Some(&i) = cand.choose(rng) {
                    let o = g.add_atom(GraphAtom::organic("O", false));
                    g.add_bond(i, o, 2);
                }
            }
            k => {
                let sym = ["C", "O", "N", "Cl", "F"][k - 1];
                if let Some(i) = attach_point(&g, rng, 1) {
                    let a = g.add_atom(GraphAtom::organic(sym, false));
                    g.add_bond(i, a, 1);
                }
            }
        }
    }
    g
}

/// Named drug SMILES used for golden fingerprint fixtures.
pub const DRUGS: &[(&str, &str)] = &[
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("caffeine", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
    ("ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"),
    ("paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("nicotine", "CN1CCCC1c1cccnc1"),
    ("diazepam", "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21"),
    ("metformin", "CN(C)C(=N)NC(=N)N"),
    ("naproxen", "COc1ccc2cc(ccc2c1)C(C)C(=O)O"),
    ("penicillin_g", "CC1(C)SC2C(NC(=O)Cc3ccccc3)C(=O)N2C1C(=O)O"),
    ("sertraline", "CNC1CCC(c2ccc(Cl)c(Cl)c2)c2ccccc21"),
];
