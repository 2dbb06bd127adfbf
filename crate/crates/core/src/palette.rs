//! Palette sizes and local-search thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Color = u32;

/// `ceil` that ignores floating noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9).ceil()
}

/// `ln Δ` with Δ clamped to at least 3 so the quotient `Δ / ln Δ` stays sane.
pub(crate) fn ln_degree(delta: u32) -> f64 {
    f64::from(delta.max(3)).ln()
}

/// Primary palette `C1 = [base, base + q)` followed by the completion palette
/// `C2 = [base + q, base + q + c2_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub q: u32,
    pub eps: f64,
    pub c2_size: u32,
}

impl Palette {
    /// `q = ceil((1 + eps) Δ / ln Δ)`, `|C2| = ceil(eps q)`.
    pub fn for_degree(delta: u32, eps: f64) -> Result<Self> {
        let q = ceil_tol((1.0 + eps) * f64::from(delta) / ln_degree(delta)) as u32;
        Self::with_q(q, eps)
    }

    pub fn with_q(q: u32, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        if q == 0 {
            return Err(Error::Config("palette C1 must be non-empty".into()));
        }
        let c2_size = (ceil_tol(eps * f64::from(q)) as u32).max(1);
        Ok(Palette { q, eps, c2_size })
    }

    pub fn c2_base(&self) -> Color {
        self.q
    }

    pub fn total(&self) -> u32 {
        self.q + self.c2_size
    }
}

/// Minimum availability and maximum free-neighbor count each vertex must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub thr_a: u32,
    pub thr_f: u32,
}

impl Thresholds {
    /// `thr_a = max(2, floor(Δ^{eps/2}))` capped at `q`;
    /// `thr_f = ceil(eps q / 2)` capped at `|C2| - 1`.
    pub fn default_for(delta: u32, palette: &Palette) -> Self {
        let root = f64::from(delta).powf(palette.eps / 2.0);
        let thr_a = ((root + 1e-9).floor() as u32).max(2).min(palette.q);
        let half = ceil_tol(palette.eps * f64::from(palette.q) / 2.0) as u32;
        let thr_f = half.min(palette.c2_size - 1);
        Thresholds { thr_a, thr_f }
    }

    /// Applies overrides on top of the defaults and validates the result.
    pub fn resolve(
        delta: u32,
        palette: &Palette,
        thr_a: Option<u32>,
        thr_f: Option<u32>,
    ) -> Result<Self> {
        let defaults = Self::default_for(delta, palette);
        let t = Thresholds {
            thr_a: thr_a.unwrap_or(defaults.thr_a),
            thr_f: thr_f.unwrap_or(defaults.thr_f),
        };
        if t.thr_a < 1 || t.thr_a > palette.q {
            return Err(Error::Config(format!(
                "thr_a = {} outside [1, q = {}]",
                t.thr_a, palette.q
            )));
        }
        if t.thr_f >= palette.c2_size {
            log::warn!(
                "thr_f = {} >= |C2| = {}; completion may issue overflow colors",
                t.thr_f,
                palette.c2_size
            );
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_palette() {
        let p = Palette::for_degree(64, 1.0).unwrap();
        assert_eq!(p.q, 31);
        assert_eq!(p.c2_size, 31);
        assert_eq!(p.c2_base(), 31);
        let t = Thresholds::default_for(64, &p);
        assert_eq!(
            t,
            Thresholds {
                thr_a: 8,
                thr_f: 16
            }
        );
    }

    #[test]
    fn small_degree_floor() {
        let p = Palette::for_degree(8, 1.0).unwrap();
        assert_eq!(p.q, 8);
        let t = Thresholds::default_for(8, &p);
        assert_eq!(t.thr_a, 2);
        assert_eq!(t.thr_f, 4);
    }

    #[test]
    fn thr_f_clamped_below_c2() {
        let p = Palette::with_q(9, 0.25).unwrap();
        assert_eq!(p.c2_size, 3);
        let t = Thresholds::default_for(22, &p);
        assert!(t.thr_f < p.c2_size);
    }

    #[test]
    fn overrides_are_validated() {
        let p = Palette::with_q(3, 1.0).unwrap();
        let t = Thresholds::resolve(3, &p, Some(1), Some(2)).unwrap();
        assert_eq!(t, Thresholds { thr_a: 1, thr_f: 2 });
        assert!(Thresholds::resolve(3, &p, Some(4), None).is_err());
        assert!(Thresholds::resolve(3, &p, Some(0), None).is_err());
    }
}
