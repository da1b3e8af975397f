//! Variant-selection spaces: Cartesian products over (level, op kind) with
//! pins, exclusions and presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DseError;
use crate::field::{variants, Coords, OpKind, Selection, Tower, Variant};

/// One constraint on the selection space. Levels are named by absolute
/// degree (2 for Fp2, 12 for Fp12, ...).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Restriction {
    Pin { level: usize, kind: OpKind, variant: Variant },
    Exclude { level: usize, kind: OpKind, variant: Variant },
    Coords { coords: Coords },
}

/// Named restriction sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Schoolbook everywhere.
    AllSchoolbook,
    /// Karatsuba wherever the catalog has it, schoolbook elsewhere.
    AllKaratsuba,
    /// All-Karatsuba except at the level of the given degree, where every
    /// non-Karatsuba variant is enumerated.
    NoKaratsubaAt(usize),
    /// Every selection.
    Exhaustive,
}

impl FromStr for Preset {
    type Err = DseError;
    fn from_str(s: &str) -> Result<Self, DseError> {
        let k = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        let k = k.trim_end_matches('.');
        match k {
            "all-sch" | "all-schoolbook" => Ok(Preset::AllSchoolbook),
            "all-karat" | "all-karatsuba" => Ok(Preset::AllKaratsuba),
            "exhaustive" | "all" => Ok(Preset::Exhaustive),
            _ => k
                .strip_prefix("no-karat-p")
                .or_else(|| k.strip_prefix("no-karatsuba-p"))
                .and_then(|d| d.parse().ok())
                .map(Preset::NoKaratsubaAt)
                .ok_or_else(|| DseError::Config(format!("unknown preset `{s}` (all-sch, all-karat, no-karat-p<deg>, exhaustive)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::AllSchoolbook => f.write_str("all-sch"),
            Preset::AllKaratsuba => f.write_str("all-karat"),
            Preset::NoKaratsubaAt(d) => write!(f, "no-karat-p{d}"),
            Preset::Exhaustive => f.write_str("exhaustive"),
        }
    }
}

fn karatsuba_or_schoolbook(ext: usize, kind: OpKind) -> Variant {
    if variants::catalog(ext, kind).contains(&Variant::Karatsuba) {
        Variant::Karatsuba
    } else {
        Variant::Schoolbook
    }
}

impl Preset {
    pub fn restrictions(self, t: &Tower) -> Result<Vec<Restriction>, DseError> {
        let mut out = vec![Restriction::Coords { coords: Coords::Jacobian }];
        let slots = t.levels.iter().enumerate().flat_map(|(i, l)| [(t.degs[i + 1], l.ext, OpKind::Mul), (t.degs[i + 1], l.ext, OpKind::Sqr)]);
        match self {
            Preset::Exhaustive => out.clear(),
            Preset::AllSchoolbook => out.extend(slots.map(|(level, _, kind)| Restriction::Pin { level, kind, variant: Variant::Schoolbook })),
            Preset::AllKaratsuba => {
                out.extend(slots.map(|(level, ext, kind)| Restriction::Pin { level, kind, variant: karatsuba_or_schoolbook(ext, kind) }))
            }
            Preset::NoKaratsubaAt(d) => {
                if !t.degs[1..].contains(&d) {
                    return Err(DseError::Config(format!("tower has no level of degree {d}")));
                }
                for (level, ext, kind) in slots {
                    out.push(if level == d {
                        Restriction::Exclude { level, kind, variant: Variant::Karatsuba }
                    } else {
                        Restriction::Pin { level, kind, variant: karatsuba_or_schoolbook(ext, kind) }
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Per-slot choices after applying restrictions. Slot order: level 0 mul,
/// level 0 sqr, level 1 mul, ..., then coordinates.
#[derive(Clone, Debug)]
pub struct VariantSpace {
    choices: Vec<Vec<Variant>>,
    coords: Vec<Coords>,
}

impl VariantSpace {
    pub fn new(t: &Tower, restrictions: &[Restriction]) -> Result<Self, DseError> {
        let mut choices = Vec::new();
        for (i, l) in t.levels.iter().enumerate() {
            for kind in [OpKind::Mul, OpKind::Sqr] {
                let mut c = variants::catalog(l.ext, kind).to_vec();
                if c.is_empty() {
                    return Err(DseError::EmptyLevel { level: t.degs[i + 1], kind });
                }
                for r in restrictions {
                    match *r {
                        Restriction::Pin { level, kind: k, variant } if level == t.degs[i + 1] && k == kind => c.retain(|&v| v == variant),
                        Restriction::Exclude { level, kind: k, variant } if level == t.degs[i + 1] && k == kind => c.retain(|&v| v != variant),
                        _ => {}
                    }
                }
                if c.is_empty() {
                    return Err(DseError::EmptyLevel { level: t.degs[i + 1], kind });
                }
                choices.push(c);
            }
        }
        for r in restrictions {
            if let Restriction::Pin { level, .. } | Restriction::Exclude { level, .. } = r {
                if !t.degs[1..].contains(level) {
                    return Err(DseError::Config(format!("restriction names degree {level}, not a level of this tower")));
                }
            }
        }
        let coords = match restrictions.iter().rev().find_map(|r| match r {
            Restriction::Coords { coords } => Some(*coords),
            _ => None,
        }) {
            Some(c) => vec![c],
            None => vec![Coords::Jacobian, Coords::Projective],
        };
        Ok(VariantSpace { choices, coords })
    }

    /// Number of selections (product of per-slot counts).
    pub fn len(&self) -> u64 {
        self.choices.iter().map(|c| c.len() as u64).product::<u64>() * self.coords.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot_counts(&self) -> Vec<usize> {
        self.choices.iter().map(Vec::len).chain([self.coords.len()]).collect()
    }

    /// Selection number `i` in mixed-radix order (last slot fastest).
    pub fn get(&self, mut i: u64) -> Selection {
        let c = self.coords[(i % self.coords.len() as u64) as usize];
        i /= self.coords.len() as u64;
        let mut picks = vec![Variant::Schoolbook; self.choices.len()];
        for (s, ch) in self.choices.iter().enumerate().rev() {
            picks[s] = ch[(i % ch.len() as u64) as usize];
            i /= ch.len() as u64;
        }
        Selection { mul: picks.iter().step_by(2).copied().collect(), sqr: picks.iter().skip(1).step_by(2).copied().collect(), coords: c }
    }

    pub fn iter(&self) -> impl Iterator<Item = Selection> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

/// Parses `deg:kind=variant` items separated by commas, plus an optional
/// `coords=...` item, into pins, e.g. `2:mul=karatsuba,coords=projective`.
pub fn parse_restrictions(t: &Tower, s: &str) -> Result<Vec<Restriction>, DseError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, val) = item.split_once('=').ok_or_else(|| DseError::Config(format!("`{item}`: expected key=value")))?;
        if key.trim() == "coords" {
            let coords = val.trim().parse().map_err(|e: crate::field::FieldError| DseError::Config(e.to_string()))?;
            out.push(Restriction::Coords { coords });
            continue;
        }
        let (deg, kind) = key.split_once(':').ok_or_else(|| DseError::Config(format!("`{item}`: expected <degree>:<mul|sqr>=<variant>")))?;
        let level: usize = deg.trim().trim_start_matches("fp").parse().map_err(|_| DseError::Config(format!("`{item}`: bad degree")))?;
        let kind = match kind.trim() {
            "mul" => OpKind::Mul,
            "sqr" => OpKind::Sqr,
            k => return Err(DseError::Config(format!("`{item}`: unknown op kind `{k}`"))),
        };
        let i = t.degs[1..].iter().position(|&d| d == level).ok_or_else(|| DseError::Config(format!("`{item}`: tower has no level of degree {level}")))?;
        let variant: Variant = val.trim().parse().map_err(|e: crate::field::FieldError| DseError::Config(e.to_string()))?;
        if !variants::catalog(t.levels[i].ext, kind).contains(&variant) {
            return Err(DseError::MissingVariant { level, kind, variant });
        }
        out.push(Restriction::Pin { level, kind, variant });
    }
    Ok(out)
}

/// Applies a selection string (see [`parse_restrictions`]) on top of `base`.
pub fn parse_selection(t: &Tower, s: &str, base: &Selection) -> Result<Selection, DseError> {
    let mut sel = base.clone();
    for r in parse_restrictions(t, s)? {
        match r {
            Restriction::Coords { coords } => sel.coords = coords,
            Restriction::Pin { level, kind, variant } => {
                let i = t.degs[1..].iter().position(|&d| d == level).expect("validated level");
                match kind {
                    OpKind::Mul => sel.mul[i] = variant,
                    OpKind::Sqr => sel.sqr[i] = variant,
                }
            }
            Restriction::Exclude { .. } => unreachable!("selection strings only pin"),
        }
    }
    Ok(sel)
}

/// Lazily enumerates selections satisfying `restrictions`.
pub fn enumerate_variants<'a>(t: &Tower, restrictions: &[Restriction]) -> Result<impl Iterator<Item = Selection> + 'a, DseError> {
    let space = VariantSpace::new(t, restrictions)?;
    Ok((0..space.len()).map(move |i| space.get(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CurveSpec;

    #[test]
    fn cardinality_is_product_of_slot_counts() {
        let s = CurveSpec::shipped("bls24_509").unwrap();
        let sp = VariantSpace::new(&s.tower, &[]).unwrap();
        // levels 2, 2, 3, 2 over the previous level
        let per = [2 * 3, 2 * 3, 3 * 5, 2 * 3, 2];
        assert_eq!(sp.len(), per.iter().product::<u64>());
        assert_eq!(enumerate_variants(&s.tower, &[]).unwrap().count() as u64, sp.len());
    }

    #[test]
    fn presets() {
        let s = CurveSpec::shipped("bls24_509").unwrap();
        let t = &s.tower;
        let one = |p: Preset| enumerate_variants(t, &p.restrictions(t).unwrap()).unwrap().collect::<Vec<_>>();
        assert_eq!(one(Preset::AllSchoolbook), vec![Selection::schoolbook(t)]);
        let k = one(Preset::AllKaratsuba);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].mul, vec![Variant::Karatsuba; 4]);
        let no2 = one(Preset::NoKaratsubaAt(2));
        assert!(no2.iter().all(|x| x.mul[0] != Variant::Karatsuba && x.sqr[0] != Variant::Karatsuba));
        assert_eq!(no2.len(), 2);
        assert!(Preset::NoKaratsubaAt(6).restrictions(t).is_err());
        assert_eq!("all karat.".parse::<Preset>().unwrap(), Preset::AllKaratsuba);
        assert_eq!("no-karat-p12".parse::<Preset>().unwrap(), Preset::NoKaratsubaAt(12));
    }

    #[test]
    fn contradictory_pins_are_rejected() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let r = [
            Restriction::Pin { level: 2, kind: OpKind::Mul, variant: Variant::Karatsuba },
            Restriction::Exclude { level: 2, kind: OpKind::Mul, variant: Variant::Karatsuba },
        ];
        assert!(matches!(VariantSpace::new(&s.tower, &r), Err(DseError::EmptyLevel { level: 2, .. })));
    }

    #[test]
    fn selection_strings() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let t = &s.tower;
        let base = Selection::schoolbook(t);
        let sel = parse_selection(t, "2:mul=karat, 6:sqr=ch-sqr2, coords=proj", &base).unwrap();
        assert_eq!(sel.mul[0], Variant::Karatsuba);
        assert_eq!(sel.sqr[1], Variant::ChSqr2);
        assert_eq!(sel.coords, Coords::Projective);
        let e = parse_selection(t, "2:mul=toom3", &base).unwrap_err();
        assert!(matches!(e, DseError::MissingVariant { level: 2, kind: OpKind::Mul, .. }), "{e}");
        assert!(parse_selection(t, "4:mul=karatsuba", &base).is_err());
    }
}
