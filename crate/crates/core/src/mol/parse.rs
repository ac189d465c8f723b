//! SMILES reader.
//!
//! Accepts the OpenSMILES grammar minus reaction and quadruple-bond syntax.
//! Stereo marks (`/`, `\`, `@`, `@@`, `@TH1`...) are consumed and dropped;
//! `/` and `\` read as single bonds. Atom classes (`[CH3:4]`) are dropped.

use std::collections::HashMap;

use thiserror::Error;

use super::{Atom, Bond, BondOrder, Element, Molecule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("unexpected character {found:?} at position {pos}")]
    UnexpectedChar { pos: usize, found: char },
    #[error("unexpected end of input at position {pos}")]
    UnexpectedEnd { pos: usize },
    #[error("ring closure {label} opened at position {pos} is never closed")]
    UnclosedRing { pos: usize, label: u32 },
    #[error("unknown element symbol {symbol:?} at position {pos}")]
    UnknownElement { pos: usize, symbol: String },
    #[error("ring closure {label} at position {pos} has conflicting bond orders")]
    RingBondConflict { pos: usize, label: u32 },
    #[error("ring closure {label} at position {pos} joins an atom to itself or to an existing neighbor")]
    InvalidRingBond { pos: usize, label: u32 },
    #[error("empty bracket atom at position {pos}")]
    EmptyBracket { pos: usize },
    #[error("unbalanced parenthesis at position {pos}")]
    UnbalancedParen { pos: usize },
    #[error("bond symbol at position {pos} is not followed by an atom or ring closure")]
    DanglingBond { pos: usize },
    #[error("{kind} at position {pos} has no preceding atom")]
    NoPrecedingAtom { pos: usize, kind: &'static str },
    #[error("value at position {pos} is out of range")]
    OutOfRange { pos: usize },
}

impl SmilesError {
    /// Byte offset of the offending input, when one exists.
    pub fn position(&self) -> Option<usize> {
        use SmilesError::*;
        match *self {
            Empty => None,
            UnexpectedChar { pos, .. }
            | UnexpectedEnd { pos }
            | UnclosedRing { pos, .. }
            | UnknownElement { pos, .. }
            | RingBondConflict { pos, .. }
            | InvalidRingBond { pos, .. }
            | EmptyBracket { pos }
            | UnbalancedParen { pos }
            | DanglingBond { pos }
            | NoPrecedingAtom { pos, .. }
            | OutOfRange { pos } => Some(pos),
        }
    }
}

/// Parses a SMILES string into a [`Molecule`].
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: HashMap::new(),
        dangling_dot: None,
    };
    p.run()?;
    let Parser { atoms, bonds, .. } = p;
    Ok(Molecule::from_parts(atoms, bonds, text).expect("parser rejects self-loops and duplicate bonds"))
}

#[derive(Debug, Clone, Copy)]
struct PendingBond {
    order: Option<BondOrder>,
    pos: usize,
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    pos: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<PendingBond>,
    /// (atom the branch hangs from, position of the open paren, atom count at the paren)
    branches: Vec<(Option<usize>, usize, usize)>,
    rings: HashMap<u32, OpenRing>,
    /// Position of a `.` not yet followed by an atom.
    dangling_dot: Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> SmilesError {
        // the cursor only ever advances over ASCII, so it sits on a char boundary
        match std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
        {
            Some(found) => SmilesError::UnexpectedChar { pos: self.pos, found },
            None => SmilesError::UnexpectedEnd { pos: self.pos },
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if self.prev.is_none() {
                        return Err(SmilesError::NoPrecedingAtom { pos: self.pos, kind: "branch" });
                    }
                    if let Some(b) = self.pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    self.branches.push((self.prev, self.pos, self.atoms.len()));
                    self.pos += 1;
                }
                b')' => {
                    let Some((anchor, _, first_atom)) = self.branches.pop() else {
                        return Err(SmilesError::UnbalancedParen { pos: self.pos });
                    };
                    if let Some(b) = self.pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    if self.atoms.len() == first_atom {
                        // "()" holds no atom
                        return Err(SmilesError::UnexpectedChar { pos: self.pos, found: ')' });
                    }
                    self.prev = anchor;
                    self.pos += 1;
                }
                b'.' => {
                    if let Some(b) = self.pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    if self.prev.is_none() {
                        return Err(SmilesError::NoPrecedingAtom { pos: self.pos, kind: "fragment separator" });
                    }
                    self.prev = None;
                    self.dangling_dot = Some(self.pos);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    if self.prev.is_none() {
                        return Err(SmilesError::NoPrecedingAtom { pos: self.pos, kind: "bond" });
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(PendingBond { order: Some(order), pos: self.pos });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom);
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom);
                }
            }
        }
        if let Some(b) = self.pending {
            return Err(SmilesError::DanglingBond { pos: b.pos });
        }
        if let Some(&(_, pos, _)) = self.branches.last() {
            return Err(SmilesError::UnbalancedParen { pos });
        }
        if let Some((&label, ring)) = self.rings.iter().min_by_key(|(_, r)| r.pos) {
            return Err(SmilesError::UnclosedRing { pos: ring.pos, label });
        }
        if let Some(pos) = self.dangling_dot {
            return Err(SmilesError::NoPrecedingAtom { pos, kind: "fragment separator" });
        }
        if self.atoms.is_empty() {
            return Err(SmilesError::Empty);
        }
        Ok(())
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_atom(&mut self, atom: Atom) {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = self
                .pending
                .take()
                .and_then(|b| b.order)
                .unwrap_or_else(|| self.default_order(prev, idx));
            self.bonds.push(Bond::new(prev, idx, order));
        }
        self.prev = Some(idx);
        self.dangling_dot = None;
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let label = match self.peek() {
            Some(b'%') => {
                self.pos += 1;
                match self.peek() {
                    Some(b'(') => {
                        self.pos += 1;
                        let n = self.read_number().ok_or_else(|| self.unexpected())?;
                        if self.peek() != Some(b')') {
                            return Err(self.unexpected());
                        }
                        self.pos += 1;
                        n
                    }
                    Some(d1 @ b'0'..=b'9') => {
                        self.pos += 1;
                        match self.peek() {
                            Some(d2 @ b'0'..=b'9') => {
                                self.pos += 1;
                                u32::from(d1 - b'0') * 10 + u32::from(d2 - b'0')
                            }
                            Some(_) => return Err(self.unexpected()),
                            None => return Err(SmilesError::UnexpectedEnd { pos: self.pos }),
                        }
                    }
                    Some(_) => return Err(self.unexpected()),
                    None => return Err(SmilesError::UnexpectedEnd { pos: self.pos }),
                }
            }
            Some(d) => {
                self.pos += 1;
                u32::from(d - b'0')
            }
            None => unreachable!(),
        };
        let Some(atom) = self.prev else {
            return Err(SmilesError::NoPrecedingAtom { pos: start, kind: "ring closure" });
        };
        let bond = self.pending.take();
        match self.rings.remove(&label) {
            Some(open) => {
                let order = match (open.order, bond.and_then(|b| b.order)) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(SmilesError::RingBondConflict { pos: start, label });
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.default_order(open.atom, atom),
                };
                let duplicate = self.bonds.iter().any(|b| {
                    b.endpoints == (open.atom, atom) || b.endpoints == (atom, open.atom)
                });
                if open.atom == atom || duplicate {
                    return Err(SmilesError::InvalidRingBond { pos: start, label });
                }
                self.bonds.push(Bond::new(open.atom, atom, order));
            }
            None => {
                self.rings.insert(
                    label,
                    OpenRing {
                        atom,
                        order: bond.and_then(|b| b.order),
                        pos: start,
                    },
                );
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let c = self.peek().ok_or(SmilesError::UnexpectedEnd { pos: start })?;
        let next = self.src.get(self.pos + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::CL, false, 2),
            (b'B', Some(b'r')) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (b'A'..=b'Z', _) => {
                let len = if matches!(next, Some(b'a'..=b'z')) { 2 } else { 1 };
                let symbol = String::from_utf8_lossy(&self.src[start..start + len]).into_owned();
                return Err(SmilesError::UnknownElement { pos: start, symbol });
            }
            _ => return Err(self.unexpected()),
        };
        self.pos += len;
        Ok(Atom::organic(element, aromatic))
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        if self.peek() == Some(b']') {
            return Err(SmilesError::EmptyBracket { pos: open });
        }
        let isotope = match self.read_number() {
            Some(n) => Some(u16::try_from(n).map_err(|_| SmilesError::OutOfRange { pos: open + 1 })?),
            None => None,
        };
        let (element, aromatic) = self.bracket_symbol()?;

        // chirality
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else {
                let rest = &self.src[self.pos..];
                if rest.len() >= 2 && matches!(&rest[..2], b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                    self.pos += 2;
                    if self.read_number().is_none() {
                        return Err(self.unexpected());
                    }
                }
            }
        }

        let mut explicit_h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            let at = self.pos;
            explicit_h = match self.read_number() {
                Some(n) => u8::try_from(n).map_err(|_| SmilesError::OutOfRange { pos: at })?,
                None => 1,
            };
        }

        let mut formal_charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            let at = self.pos;
            let magnitude = match self.read_number() {
                Some(n) => i32::try_from(n).map_err(|_| SmilesError::OutOfRange { pos: at })?,
                None => {
                    let mut m = 1;
                    while self.peek() == Some(sign) {
                        self.pos += 1;
                        m += 1;
                    }
                    m
                }
            };
            formal_charge = unit * magnitude;
            if formal_charge.abs() > 15 {
                return Err(SmilesError::OutOfRange { pos: at });
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return Err(self.unexpected());
            }
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(_) => return Err(self.unexpected()),
            None => return Err(SmilesError::UnexpectedEnd { pos: self.pos }),
        }

        Ok(Atom {
            element,
            aromatic,
            formal_charge: formal_charge as i8,
            isotope,
            explicit_h,
            bracket: true,
            in_ring: false,
        })
    }

    fn bracket_symbol(&mut self) -> Result<(Element, bool), SmilesError> {
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(&c) = rest.first() else {
            return Err(SmilesError::UnexpectedEnd { pos: start });
        };
        match c {
            b'a'..=b'z' => {
                for (sym, el) in [("se", "Se"), ("as", "As"), ("te", "Te")] {
                    if rest.starts_with(sym.as_bytes()) {
                        self.pos += 2;
                        return Ok((Element::from_symbol(el).expect("table entry"), true));
                    }
                }
                let el = match c {
                    b'b' => Element::B,
                    b'c' => Element::C,
                    b'n' => Element::N,
                    b'o' => Element::O,
                    b'p' => Element::P,
                    b's' => Element::S,
                    _ => {
                        return Err(SmilesError::UnknownElement {
                            pos: start,
                            symbol: (c as char).to_string(),
                        })
                    }
                };
                self.pos += 1;
                Ok((el, true))
            }
            b'A'..=b'Z' => {
                if let Some(&l @ b'a'..=b'z') = rest.get(1) {
                    let two = [c, l];
                    let two = std::str::from_utf8(&two).expect("ascii");
                    if let Some(el) = Element::from_symbol(two) {
                        self.pos += 2;
                        return Ok((el, false));
                    }
                }
                let one = (c as char).to_string();
                match Element::from_symbol(&one) {
                    Some(el) => {
                        self.pos += 1;
                        Ok((el, false))
                    }
                    None => {
                        let len = if matches!(rest.get(1), Some(b'a'..=b'z')) { 2 } else { 1 };
                        Err(SmilesError::UnknownElement {
                            pos: start,
                            symbol: String::from_utf8_lossy(&rest[..len]).into_owned(),
                        })
                    }
                }
            }
            b'*' => Err(SmilesError::UnknownElement { pos: start, symbol: "*".into() }),
            _ => Err(self.unexpected()),
        }
    }
}
