//! Small named lattices used by tests, examples and the CLI.
//!
//! The full hexagonal patches grow quickly (a radius-2 annulus already has
//! 36 spins), so the degeneracy and splitting checks run on trimmed
//! "star" lattices: the ring around a hole plus just enough apex sites to
//! make every ring edge part of a triangle.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_punctured_patch, Axial, HoleSpec, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Seven sites, no hole. 12 spins.
    Patch,
    /// Ring around one hole plus the six edge-midpoint apexes. 18 spins.
    Star,
    /// `Star` with one extra corner site, giving three bulk edges. 21 spins.
    ExtendedStar,
    /// Radius-2 patch with the centre removed. 36 spins.
    Annulus,
    /// Two stars three sites apart joined by their apexes. 37 spins.
    DoubleStar,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Patch,
        Preset::Star,
        Preset::ExtendedStar,
        Preset::Annulus,
        Preset::DoubleStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Patch => "patch",
            Preset::Star => "star",
            Preset::ExtendedStar => "extended-star",
            Preset::Annulus => "annulus",
            Preset::DoubleStar => "double-star",
        }
    }

    pub fn build(self) -> Lattice {
        let lat = match self {
            Preset::Patch => build_punctured_patch(1, &[]),
            Preset::Star => Lattice::from_sites(star_sites(Axial::new(0, 0))),
            Preset::ExtendedStar => {
                let mut s = star_sites(Axial::new(0, 0));
                s.push(Axial::new(2, 0));
                Lattice::from_sites(s)
            }
            Preset::Annulus => build_punctured_patch(2, &[HoleSpec::single(0, 0)]),
            Preset::DoubleStar => Lattice::from_sites(double_star_sites()),
        };
        lat.expect("preset geometry is valid")
    }

    pub fn holes(self) -> usize {
        match self {
            Preset::Patch => 0,
            Preset::DoubleStar => 2,
            _ => 1,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown preset {s:?}")))
    }
}

fn ring(centre: Axial) -> Vec<Axial> {
    centre.neighbours().collect()
}

fn star_sites(centre: Axial) -> Vec<Axial> {
    let r = ring(centre);
    let mut out = r.clone();
    for i in 0..6 {
        // apex beyond the ring edge r[i]–r[i+1]
        let (a, b) = (r[i], r[(i + 1) % 6]);
        out.push(Axial::new(a.q + b.q - centre.q, a.r + b.r - centre.r));
    }
    out
}

/// Ring sites of both holes plus every site adjacent to two adjacent ring
/// sites, excluding the hole centres.
fn double_star_sites() -> Vec<Axial> {
    let holes = [Axial::new(0, 0), Axial::new(3, 0)];
    let mut rings: Vec<Axial> = holes.iter().flat_map(|&h| ring(h)).collect();
    rings.sort();
    rings.dedup();
    let mut sites = rings.clone();
    for &a in &rings {
        for &b in &rings {
            if a < b && a.distance(b) == 1 {
                for c in a.neighbours() {
                    if c.distance(b) == 1 && !holes.contains(&c) {
                        sites.push(c);
                    }
                }
            }
        }
    }
    sites.sort();
    sites.dedup();
    sites
}
