//! Monoisotopic masses and precursor-ion adducts for candidate generation.

use msbench_core::mol::{Element, Molecule};

pub const ELECTRON: f64 = 0.000_548_579_909;
pub const PROTON: f64 = 1.007_276_466_62;
const H: f64 = 1.007_825_032_23;
const O: f64 = 15.994_914_619_57;
const N: f64 = 14.003_074_004_43;
const C: f64 = 12.0;
const NA: f64 = 22.989_769_282;
const K: f64 = 38.963_706_486_4;
const CL: f64 = 34.968_852_682;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adduct {
    pub name: &'static str,
    /// Copies of the neutral molecule in the ion.
    pub multiplier: f64,
    /// Mass added to `multiplier * M`, electrons included.
    pub offset: f64,
}

pub const ADDUCTS: [Adduct; 9] = [
    Adduct { name: "[M+H]+", multiplier: 1.0, offset: PROTON },
    Adduct { name: "[M+Na]+", multiplier: 1.0, offset: NA - ELECTRON },
    Adduct { name: "[M+K]+", multiplier: 1.0, offset: K - ELECTRON },
    Adduct { name: "[M+NH4]+", multiplier: 1.0, offset: N + 3.0 * H + PROTON },
    Adduct { name: "[M+H-H2O]+", multiplier: 1.0, offset: PROTON - 2.0 * H - O },
    Adduct { name: "[2M+H]+", multiplier: 2.0, offset: PROTON },
    Adduct { name: "[M-H]-", multiplier: 1.0, offset: -PROTON },
    Adduct { name: "[M+Cl]-", multiplier: 1.0, offset: CL + ELECTRON },
    Adduct { name: "[M+HCOO]-", multiplier: 1.0, offset: C + H + 2.0 * O + ELECTRON },
];

pub fn adduct(name: &str) -> Option<Adduct> {
    let name = name.trim();
    ADDUCTS.iter().copied().find(|a| a.name == name)
}

impl Adduct {
    pub fn ion_mz(&self, neutral_mass: f64) -> f64 {
        self.multiplier * neutral_mass + self.offset
    }
}

/// Neutral monoisotopic mass, counting implicit and bracket hydrogens.
/// `None` for charged species, isotope labels and elements outside the
/// mass table.
pub fn monoisotopic_mass(mol: &Molecule) -> Option<f64> {
    let mut mass = 0.0;
    let mut charge = 0i32;
    for (i, a) in mol.atoms().iter().enumerate() {
        if a.isotope.is_some() {
            return None;
        }
        mass += a.element.monoisotopic_mass()?;
        mass += f64::from(mol.implicit_hydrogens(i)) * Element::H.monoisotopic_mass()?;
        charge += i32::from(a.formal_charge);
    }
    (charge == 0).then_some(mass)
}

pub fn ppm_error(observed: f64, theoretical: f64) -> f64 {
    (observed - theoretical).abs() / theoretical * 1e6
}
