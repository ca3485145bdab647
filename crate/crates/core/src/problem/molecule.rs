use crate::{geom, Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub position: Point,
    /// Charge in units of the elementary charge.
    pub charge: f64,
    pub radius: f64,
}

/// A set of fixed point charges with atomic radii.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularSystem {
    atoms: Vec<Atom>,
}

impl MolecularSystem {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::NoAtoms);
        }
        for (i, a) in atoms.iter().enumerate() {
            if !a.position.iter().all(|c| c.is_finite()) || !a.charge.is_finite() {
                return Err(Error::Parameter(format!("atom {i} has non-finite data")));
            }
            if !(a.radius > 0.0) || !a.radius.is_finite() {
                return Err(Error::Parameter(format!("atom {i} has radius {} <= 0", a.radius)));
            }
        }
        Ok(Self { atoms })
    }

    /// A single ion of charge `q` and radius `a` at the origin.
    pub fn born_ion(charge: f64, radius: f64) -> Result<Self> {
        Self::new(vec![Atom { position: [0.0; 3], charge, radius }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_charge(&self) -> f64 {
        self.atoms.iter().map(|a| a.charge).sum()
    }

    /// Charge-agnostic center (mean position).
    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for a in &self.atoms {
            c = geom::add(&c, &a.position);
        }
        geom::scale(&c, 1.0 / self.atoms.len() as f64)
    }

    /// Radius of the smallest center-based ball containing every atom
    /// sphere.
    pub fn extent(&self) -> f64 {
        let c = self.center();
        self.atoms
            .iter()
            .map(|a| geom::norm(&geom::sub(&a.position, &c)) + a.radius)
            .fold(0.0, f64::max)
    }
}

/// Reads ATOM/HETATM records of a PQR file. The last five whitespace
/// separated fields of each record are `x y z charge radius`; every other
/// record is ignored.
pub fn parse_pqr(text: &str) -> Result<MolecularSystem> {
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first() {
            Some(&"ATOM") | Some(&"HETATM") => {}
            _ => continue,
        }
        let err = |message: String| Error::Parse { line: i + 1, message };
        if toks.len() < 6 {
            return Err(err(format!("expected x y z charge radius, got {} fields", toks.len() - 1)));
        }
        let mut v = [0.0f64; 5];
        for (slot, tok) in v.iter_mut().zip(&toks[toks.len() - 5..]) {
            *slot = tok.parse().map_err(|_| err(format!("non-numeric field '{tok}'")))?;
            if !slot.is_finite() {
                return Err(err(format!("non-finite field '{tok}'")));
            }
        }
        if !(v[4] > 0.0) {
            return Err(err(format!("radius {} must be positive", v[4])));
        }
        atoms.push(Atom { position: [v[0], v[1], v[2]], charge: v[3], radius: v[4] });
    }
    MolecularSystem::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_record() {
        let s = parse_pqr("ATOM 1 N ALA 1 0.0 0.0 0.0 -0.3 1.5").unwrap();
        assert_eq!(s.atoms(), &[Atom { position: [0.0; 3], charge: -0.3, radius: 1.5 }]);
    }

    #[test]
    fn empty_input_has_no_atoms() {
        let e = parse_pqr("").unwrap_err();
        assert!(matches!(e, Error::NoAtoms));
        assert_eq!(e.to_string(), "no atoms");
    }

    #[test]
    fn other_records_are_ignored() {
        let text = "REMARK generated\nATOM      1  N   ALA A   1      1.000   2.000  -3.500  0.1000 1.8240\nTER\nEND\n";
        let s = parse_pqr(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.atoms()[0].position, [1.0, 2.0, -3.5]);
        assert_eq!(s.atoms()[0].radius, 1.824);
    }

    #[test]
    fn bad_fields_report_the_line() {
        let e = parse_pqr("REMARK\nATOM 1 N ALA 1 0.0 x 0.0 -0.3 1.5").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_pqr("HETATM 1 NA ION 1 0 0 0 1 0.0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_pqr("ATOM 1 0 0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }
}
