//! The information lattice of a chain state.
//!
//! A cell `(ell, n)` stands for the contiguous segment of `ell + 1` sites
//! centred at `n`; `n` is a half-integer whenever `ell` is odd. The total
//! information `I = N_A - S_A` (in bits) of every segment is decomposed into
//! local contributions by a second difference, so that summing them over
//! all cells inside a segment gives back its information.

use rayon::prelude::*;

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::spectral;
use crate::CMatrix;

/// A lattice cell. The centre is stored doubled (`n2 = 2n`) so that it is
/// always an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeCoord {
    pub ell: usize,
    pub n2: usize,
}

impl LatticeCoord {
    /// Cell of the segment `j_left..=j_right` (1-based, inclusive).
    pub fn from_segment(j_left: usize, j_right: usize) -> Self {
        debug_assert!(j_left >= 1 && j_left <= j_right);
        Self {
            ell: j_right - j_left,
            n2: j_left + j_right,
        }
    }

    /// Cell at scale `ell` and centre `n`, rejecting centres whose parity
    /// does not match the scale.
    pub fn new(ell: usize, n: f64) -> Result<Self> {
        let n2 = 2.0 * n;
        if !(n2.fract() == 0.0 && n2 >= 0.0) {
            return Err(Error::Validation(format!("centre {n} is not a half-integer")));
        }
        let n2 = n2 as usize;
        if (n2 + ell) % 2 != 0 || n2 <= ell {
            return Err(Error::Validation(format!(
                "no cell at scale {ell} is centred at {n}"
            )));
        }
        Ok(Self { ell, n2 })
    }

    pub fn centre(&self) -> f64 {
        self.n2 as f64 / 2.0
    }

    /// First site of the segment (1-based).
    pub fn j_left(&self) -> usize {
        (self.n2 - self.ell) / 2
    }

    /// Last site of the segment (1-based).
    pub fn j_right(&self) -> usize {
        (self.n2 + self.ell) / 2
    }

    pub fn contains_site(&self, j: usize) -> bool {
        self.j_left() <= j && j <= self.j_right()
    }

    /// Whether the cell exists in a chain of `n_sites` sites.
    pub fn fits(&self, n_sites: usize) -> bool {
        self.n2 > self.ell && (self.n2 + self.ell) % 2 == 0 && self.j_right() <= n_sites
    }

    /// The cell one scale down and half a site to the left, `(ell-1, n-1/2)`.
    pub fn down_left(&self) -> Option<Self> {
        (self.ell > 0).then(|| Self {
            ell: self.ell - 1,
            n2: self.n2 - 1,
        })
    }

    /// The cell one scale down and half a site to the right, `(ell-1, n+1/2)`.
    pub fn down_right(&self) -> Option<Self> {
        (self.ell > 0).then(|| Self {
            ell: self.ell - 1,
            n2: self.n2 + 1,
        })
    }

    /// The cell two scales down at the same centre, `(ell-2, n)`.
    pub fn down_two(&self) -> Option<Self> {
        (self.ell > 1).then(|| Self {
            ell: self.ell - 2,
            n2: self.n2,
        })
    }
}

/// One value per lattice cell of an `N`-site chain, stored scale by scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangular<T> {
    n_sites: usize,
    data: Vec<T>,
}

fn row_offset(n_sites: usize, ell: usize) -> usize {
    ell * n_sites - ell * ell.saturating_sub(1) / 2
}

impl<T> Triangular<T> {
    pub fn from_fn(n_sites: usize, mut f: impl FnMut(LatticeCoord) -> T) -> Self {
        let data = coords(n_sites).map(&mut f).collect();
        Self { n_sites, data }
    }

    pub fn try_from_fn(
        n_sites: usize,
        mut f: impl FnMut(LatticeCoord) -> Result<T>,
    ) -> Result<Self> {
        let data = coords(n_sites).map(&mut f).collect::<Result<_>>()?;
        Ok(Self { n_sites, data })
    }

    /// Fills the cells in parallel.
    pub fn par_try_from_fn(
        n_sites: usize,
        f: impl Fn(LatticeCoord) -> Result<T> + Sync,
    ) -> Result<Self>
    where
        T: Send,
    {
        let cells: Vec<LatticeCoord> = coords(n_sites).collect();
        let data = cells.into_par_iter().map(&f).collect::<Result<_>>()?;
        Ok(Self { n_sites, data })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn index(&self, c: LatticeCoord) -> Option<usize> {
        c.fits(self.n_sites)
            .then(|| row_offset(self.n_sites, c.ell) + c.j_left() - 1)
    }

    pub fn get(&self, c: LatticeCoord) -> Option<&T> {
        self.index(c).map(|k| &self.data[k])
    }

    /// Value of the segment starting at `j_left` (1-based) at scale `ell`.
    pub fn at(&self, ell: usize, j_left: usize) -> &T {
        assert!(j_left >= 1 && ell + j_left <= self.n_sites, "cell outside lattice");
        &self.data[row_offset(self.n_sites, ell) + j_left - 1]
    }

    /// All cells of scale `ell`, left to right.
    pub fn row(&self, ell: usize) -> &[T] {
        let start = row_offset(self.n_sites, ell);
        &self.data[start..start + self.n_sites - ell]
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeCoord, &T)> {
        coords(self.n_sites).zip(self.data.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Triangular<U> {
        Triangular {
            n_sites: self.n_sites,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy + Default> Triangular<T> {
    /// Value at `c`, or the default for cells outside the lattice.
    pub fn get_or_default(&self, c: Option<LatticeCoord>) -> T {
        c.and_then(|c| self.get(c)).copied().unwrap_or_default()
    }
}

/// Every cell of an `N`-site chain, scale by scale and left to right.
pub fn coords(n_sites: usize) -> impl Iterator<Item = LatticeCoord> + Clone {
    (0..n_sites).flat_map(move |ell| {
        (1..=n_sites - ell).map(move |jl| LatticeCoord::from_segment(jl, jl + ell))
    })
}

/// Local contributions `x(ell, n) - x(ell-1, n-1/2) - x(ell-1, n+1/2) +
/// x(ell-2, n)` of a quantity `x` defined on segments, with terms outside the
/// lattice taken as zero.
pub fn second_difference(x: &Triangular<f64>) -> Triangular<f64> {
    Triangular::from_fn(x.n_sites(), |c| {
        x.get(c).copied().unwrap_or(0.0) - x.get_or_default(c.down_left())
            - x.get_or_default(c.down_right())
            + x.get_or_default(c.down_two())
    })
}

/// `sum_n x(ell, n)` for every scale.
pub fn sum_per_scale(x: &Triangular<f64>) -> Vec<f64> {
    (0..x.n_sites()).map(|ell| x.row(ell).iter().sum()).collect()
}

/// Information `N_A - S_A` in bits of a subsystem with correlation matrix
/// `c_a`.
pub fn subsystem_information(c_a: &CMatrix) -> Result<f64> {
    let mut info = c_a.nrows() as f64;
    for mu in spectral::hermitian_eigenvalues(c_a) {
        info -= spectral::binary_entropy(spectral::clip_occupation(mu)?);
    }
    Ok(info)
}

/// Information of the whole chain.
pub fn total_information(c: &CorrelationMatrix) -> Result<f64> {
    subsystem_information(c.matrix())
}

/// Segment informations and their local decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoLattice {
    /// `I` of every segment.
    pub segment: Triangular<f64>,
    /// Local information `i` of every cell.
    pub local: Triangular<f64>,
}

impl InfoLattice {
    pub fn n_sites(&self) -> usize {
        self.local.n_sites()
    }

    /// Local information at `(ell, n)`.
    pub fn local_at(&self, c: LatticeCoord) -> Option<f64> {
        self.local.get(c).copied()
    }

    /// `sum_n i(ell, n)` for every scale.
    pub fn per_scale(&self) -> Vec<f64> {
        sum_per_scale(&self.local)
    }

    pub fn total(&self) -> f64 {
        self.local.values().iter().sum()
    }
}

/// Builds the information lattice of `c`.
pub fn build_info_lattice(c: &CorrelationMatrix) -> Result<InfoLattice> {
    let segment = Triangular::par_try_from_fn(c.n_sites(), |cell| {
        subsystem_information(&c.segment(cell.j_left(), cell.j_right()))
    })?;
    let local = second_difference(&segment);
    Ok(InfoLattice { segment, local })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coordinates_round_trip() {
        let c = LatticeCoord::from_segment(2, 5);
        assert_eq!((c.ell, c.centre()), (3, 3.5));
        assert_eq!((c.j_left(), c.j_right()), (2, 5));
        assert_eq!(LatticeCoord::new(3, 3.5).unwrap(), c);
        assert!(LatticeCoord::new(3, 3.0).is_err());
        assert!(LatticeCoord::new(2, 1.0).is_err());
        assert_eq!(c.down_left().unwrap(), LatticeCoord::from_segment(2, 4));
        assert_eq!(c.down_right().unwrap(), LatticeCoord::from_segment(3, 5));
        assert_eq!(c.down_two().unwrap(), LatticeCoord::from_segment(3, 4));
        assert!(LatticeCoord::from_segment(1, 1).down_left().is_none());
    }

    #[test]
    fn triangular_layout() {
        let t = Triangular::from_fn(4, |c| (c.ell, c.j_left()));
        assert_eq!(t.len(), 10);
        assert_eq!(t.row(0).len(), 4);
        assert_eq!(t.row(3), &[(3, 1)]);
        assert_eq!(*t.at(2, 2), (2, 2));
        assert!(t.get(LatticeCoord::from_segment(2, 5)).is_none());
        for (c, v) in t.iter() {
            assert_eq!(*v, (c.ell, c.j_left()));
        }
    }

    #[test]
    fn empty_and_filled_states_store_information_at_the_bottom() {
        for c in [CorrelationMatrix::empty(5), CorrelationMatrix::filled(5)] {
            let lat = build_info_lattice(&c).unwrap();
            for (cell, &v) in lat.local.iter() {
                let expected = if cell.ell == 0 { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_state_has_no_information() {
        let lat = build_info_lattice(&CorrelationMatrix::maximally_mixed(6)).unwrap();
        assert!(lat.local.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn local_information_adds_up_to_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = CorrelationMatrix::random(7, 0.05, 0.95, &mut rng);
        let lat = build_info_lattice(&c).unwrap();
        let total = total_information(&c).unwrap();
        assert!((lat.total() - total).abs() < 1e-10);
        assert!((lat.per_scale().iter().sum::<f64>() - total).abs() < 1e-10);
    }

    #[test]
    fn single_site_subsystem() {
        let m = CMatrix::from_element(1, 1, crate::Complex64::new(0.5, 0.0));
        assert!(subsystem_information(&m).unwrap().abs() < 1e-15);
    }
}
