//! Periodic table lookup: symbols, default valences and most-abundant isotope masses.

use std::fmt;

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// A chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        (1..=118).contains(&z).then_some(Element(z))
    }

    /// Case-sensitive symbol lookup ("Cl", not "CL").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|s| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize - 1]
    }

    /// Allowed valences for members of the SMILES organic subset, lowest first.
    /// `None` for elements outside the subset.
    pub fn default_valences(self) -> Option<&'static [u8]> {
        match self.0 {
            5 => Some(&[3]),
            6 => Some(&[4]),
            7 | 15 => Some(&[3, 5]),
            8 => Some(&[2]),
            16 => Some(&[2, 4, 6]),
            9 | 17 | 35 | 53 => Some(&[1]),
            _ => None,
        }
    }

    pub fn is_organic_subset(self) -> bool {
        self.default_valences().is_some()
    }

    /// Whether the element may be written as a lowercase aromatic atom.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
    }

    /// Mass of the most abundant isotope in Daltons, for elements that
    /// appear in small-molecule spectral libraries.
    pub fn monoisotopic_mass(self) -> Option<f64> {
        let m = match self.0 {
            1 => 1.007_825_032_23,
            5 => 11.009_305_36,
            6 => 12.0,
            7 => 14.003_074_004_43,
            8 => 15.994_914_619_57,
            9 => 18.998_403_162_73,
            11 => 22.989_769_282,
            14 => 27.976_926_534_65,
            15 => 30.973_761_998_42,
            16 => 31.972_071_174_4,
            17 => 34.968_852_682,
            19 => 38.963_706_486_4,
            33 => 74.921_595_7,
            34 => 79.916_521_8,
            35 => 78.918_337_6,
            53 => 126.904_472_6,
            _ => return None,
        };
        Some(m)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
