//! Monte-Carlo wave-function unraveling of the Lindblad equation.
//!
//! Each trajectory is a pure state in the `2^N` Fock space. A step of length
//! `dt` propagates with the non-Hermitian `H_eff = H - (i/2) sum_k L_k^† L_k`
//! in two halves, `psi_h = U psi`, `psi' = U psi_h` with `U = exp(-i H_eff dt/2)`.
//! A jump happens with probability `1 - |psi'|^2`; the channel is drawn
//! proportionally to `|L_k psi_h|^2` and the new state is `U L_k psi_h`,
//! renormalized. Otherwise the state is `psi'` renormalized.
//!
//! `H` and every `L_k^† L_k` conserve particle number, so the propagator is
//! block diagonal over number sectors and is stored as one dense matrix per
//! sector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{self, FockOperators};
use crate::lattice::{self, InfoLattice, Triangular};
use crate::CMatrix;

/// Step probability above which a step counts as too coarse.
pub const STEP_WARNING_PROBABILITY: f64 = 0.1;

/// Deviation of a stored state norm from 1 that is tolerated.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Normalized many-body pure state over the occupation-number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Normalizes `amplitudes`, which must have length `2^n_sites`.
    pub fn new(n_sites: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Validation("empty chain".into()));
        }
        if n_sites > fock::MAX_FOCK_SITES {
            return Err(Error::TooLarge {
                n_sites,
                max: fock::MAX_FOCK_SITES,
            });
        }
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_sites,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Validation("state has zero or non-finite norm".into()));
        }
        Ok(PureState {
            n_sites,
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// Product state with the listed 1-based sites occupied.
    pub fn occupied(n_sites: usize, sites: &[usize]) -> Result<Self> {
        let mut mask = 0usize;
        for &j in sites {
            if j == 0 || j > n_sites {
                return Err(Error::SiteOutOfRange { index: j, n_sites });
            }
            mask |= 1 << (j - 1);
        }
        let mut v = DVector::zeros(1usize << n_sites.min(fock::MAX_FOCK_SITES));
        if mask < v.len() {
            v[mask] = Complex64::new(1.0, 0.0);
        }
        Self::new(n_sites, v)
    }

    pub fn empty(n_sites: usize) -> Result<Self> {
        Self::occupied(n_sites, &[])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<c_i^† c_j>` for all pairs.
    pub fn correlation(&self) -> CMatrix {
        let n = self.n_sites;
        let psi = &self.amplitudes;
        let mut c = CMatrix::zeros(n, n);
        for (s, amp) in psi.iter().enumerate() {
            if *amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 1..=n {
                if s & (1 << (j - 1)) == 0 {
                    continue;
                }
                let mid = s ^ (1 << (j - 1));
                let sj = fock::jw_sign(s, j);
                for i in 1..=n {
                    if mid & (1 << (i - 1)) != 0 {
                        continue;
                    }
                    let t = mid | (1 << (i - 1));
                    c[(i - 1, j - 1)] += psi[t].conj() * amp * (sj * fock::jw_sign(mid, i));
                }
            }
        }
        c
    }

    /// Information (bits) of every segment, from exact partial traces.
    pub fn segment_information(&self) -> Result<Triangular<f64>> {
        Triangular::try_from_fn(self.n_sites, |cell| {
            fock::pure_segment_information(&self.amplitudes, self.n_sites, cell.j_left(), cell.j_right())
        })
    }
}

/// Time grid and sampling of an unraveling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McwfConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    /// Store a snapshot every this many steps (and always at the last step).
    pub sample_every: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub seed: u64,
    pub dt: f64,
    pub n_sites: usize,
    /// Step indices of the stored snapshots.
    pub sample_steps: Vec<usize>,
    /// `snapshots[k][s]` is trajectory `k` at `sample_steps[s]`.
    pub snapshots: Vec<Vec<PureState>>,
    /// Steps in which `dt sum_k <L_k^† L_k>` exceeded [`STEP_WARNING_PROBABILITY`].
    pub coarse_steps: usize,
    /// Largest per-step jump probability seen.
    pub max_step_probability: f64,
}

/// Ensemble mean of `C` and the standard error of each entry.
#[derive(Debug, Clone)]
pub struct EnsembleCorrelation {
    pub mean: CMatrix,
    pub stderr_re: DMatrix<f64>,
    pub stderr_im: DMatrix<f64>,
}

impl EnsembleCorrelation {
    /// Largest `|C_ij - reference_ij|` measured in standard errors, with
    /// entries of vanishing spread compared to `floor` instead.
    pub fn max_sigma_deviation(&self, reference: &CMatrix, floor: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.mean.nrows() {
            for j in 0..self.mean.ncols() {
                let d = self.mean[(i, j)] - reference[(i, j)];
                for (dev, se) in [(d.re, self.stderr_re[(i, j)]), (d.im, self.stderr_im[(i, j)])] {
                    worst = worst.max(dev.abs() / se.max(floor));
                }
            }
        }
        worst
    }
}

/// Trajectory-averaged information lattice with the standard error of each
/// averaged segment information.
#[derive(Debug, Clone)]
pub struct TrajectoryLattice {
    pub lattice: InfoLattice,
    pub segment_stderr: Triangular<f64>,
}

struct Sector {
    states: Vec<usize>,
    /// Column-major `exp(-i H_eff dt / 2)` restricted to the sector.
    half_step: DMatrix<Complex64>,
}

struct Propagator {
    sectors: Vec<Sector>,
    /// `sum_k <s| L_k^† L_k |s>` per basis state.
    decay: Vec<f64>,
}

impl Propagator {
    fn new(ops: &FockOperators, dt: f64) -> Result<Self> {
        let n = ops.n_sites;
        let dim = 1usize << n;
        let mut position = vec![0usize; dim];
        let mut sectors_states: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for s in 0..dim {
            let k = s.count_ones() as usize;
            position[s] = sectors_states[k].len();
            sectors_states[k].push(s);
        }
        let mut decay = vec![0.0; dim];
        for jump in &ops.jumps {
            // L^† L is diagonal with entries |L|s>|^2 for linear onsite jumps.
            for (_, col, v) in jump.op.triplet_iter() {
                decay[col] += v.norm_sqr();
            }
            for (row, col, _) in jump.op.triplet_iter() {
                if jump.op.triplet_iter().any(|(r, c, _)| r == row && c != col) {
                    return Err(Error::Validation("jump operators must be onsite and linear".into()));
                }
            }
        }
        let mut heff: Vec<DMatrix<Complex64>> = sectors_states
            .iter()
            .map(|st| DMatrix::zeros(st.len(), st.len()))
            .collect();
        for (row, col, v) in ops.hamiltonian.triplet_iter() {
            let k = row.count_ones() as usize;
            if k != col.count_ones() as usize {
                return Err(Error::Validation("Hamiltonian does not conserve particle number".into()));
            }
            heff[k][(position[row], position[col])] += *v;
        }
        let mut sectors = Vec::with_capacity(n + 1);
        for (k, states) in sectors_states.into_iter().enumerate() {
            let mut h = std::mem::replace(&mut heff[k], DMatrix::zeros(0, 0));
            for (p, &s) in states.iter().enumerate() {
                h[(p, p)] -= Complex64::new(0.0, 0.5 * decay[s]);
            }
            let half_step = (h * Complex64::new(0.0, -0.5 * dt)).exp();
            sectors.push(Sector { states, half_step });
        }
        Ok(Propagator { sectors, decay })
    }

    fn apply(&self, psi: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        for sector in &self.sectors {
            let m = sector.states.len();
            scratch.clear();
            scratch.extend(sector.states.iter().map(|&s| psi[s]));
            if scratch.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                for &s in &sector.states {
                    out[s] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            let u = sector.half_step.as_slice();
            for (p, &s) in sector.states.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, x) in scratch.iter().enumerate() {
                    acc += u[p + q * m] * x;
                }
                out[s] = acc;
            }
        }
    }

    fn jump_rate(&self, psi: &[Complex64]) -> f64 {
        psi.iter().zip(&self.decay).map(|(a, d)| a.norm_sqr() * d).sum()
    }
}

fn apply_sparse(op: &fock::SparseOp, psi: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (row, col, v) in op.triplet_iter() {
        out[row] += v * psi[col];
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize(psi: &mut [Complex64]) {
    let n = norm_sqr(psi).sqrt();
    psi.iter_mut().for_each(|z| *z /= n);
}

struct RunStats {
    coarse_steps: usize,
    max_probability: f64,
}

fn run_single(
    ops: &FockOperators,
    prop: &Propagator,
    psi0: &PureState,
    config: &McwfConfig,
    sample_steps: &[usize],
    index: usize,
) -> Result<(Vec<PureState>, RunStats)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let dim = psi0.amplitudes.len();
    let mut psi: Vec<Complex64> = psi0.amplitudes.iter().copied().collect();
    let mut half = vec![Complex64::new(0.0, 0.0); dim];
    let mut full = vec![Complex64::new(0.0, 0.0); dim];
    let mut jumped = vec![Complex64::new(0.0, 0.0); dim];
    let mut scratch = Vec::new();
    let mut weights = vec![0.0; ops.jumps.len()];
    let mut stats = RunStats {
        coarse_steps: 0,
        max_probability: 0.0,
    };
    let mut snaps = Vec::with_capacity(sample_steps.len());
    let mut next_sample = sample_steps.iter().peekable();
    let mut push_snapshot = |step: usize, psi: &[Complex64], snaps: &mut Vec<PureState>| {
        while next_sample.peek() == Some(&&step) {
            next_sample.next();
            snaps.push(PureState {
                n_sites: ops.n_sites,
                amplitudes: DVector::from_column_slice(psi),
            });
        }
    };
    push_snapshot(0, &psi, &mut snaps);
    for step in 1..=config.n_steps {
        let p_total = config.dt * prop.jump_rate(&psi);
        if p_total > 1.0 {
            return Err(Error::StepTooLarge {
                probability: p_total,
            });
        }
        if p_total > STEP_WARNING_PROBABILITY {
            stats.coarse_steps += 1;
        }
        stats.max_probability = stats.max_probability.max(p_total);

        prop.apply(&psi, &mut half, &mut scratch);
        prop.apply(&half, &mut full, &mut scratch);
        let p_jump = 1.0 - norm_sqr(&full);
        if rng.random::<f64>() < p_jump {
            for (w, jump) in weights.iter_mut().zip(&ops.jumps) {
                apply_sparse(&jump.op, &half, &mut jumped);
                *w = norm_sqr(&jumped);
            }
            let total: f64 = weights.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut k = weights.len() - 1;
            for (idx, w) in weights.iter().enumerate() {
                if r < *w {
                    k = idx;
                    break;
                }
                r -= w;
            }
            apply_sparse(&ops.jumps[k].op, &half, &mut jumped);
            prop.apply(&jumped, &mut psi, &mut scratch);
        } else {
            std::mem::swap(&mut psi, &mut full);
        }
        normalize(&mut psi);
        push_snapshot(step, &psi, &mut snaps);
    }
    Ok((snaps, stats))
}

/// Runs `config.n_traj` independent trajectories from `psi0`.
///
/// Trajectory `k` draws from the ChaCha stream `k` of the generator seeded
/// with `config.seed`, so results do not depend on scheduling.
pub fn mcwf_run(ops: &FockOperators, psi0: &PureState, config: McwfConfig) -> Result<TrajectoryEnsemble> {
    if psi0.n_sites != ops.n_sites {
        return Err(Error::DimensionMismatch {
            expected: ops.n_sites,
            found: psi0.n_sites,
        });
    }
    if config.n_traj == 0 || config.sample_every == 0 {
        return Err(Error::Validation("n_traj and sample_every must be positive".into()));
    }
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {}", config.dt)));
    }
    let max_rate = ops.jumps.iter().map(|j| j.rate).fold(0.0, f64::max);
    if config.dt * max_rate >= 1.0 {
        return Err(Error::Validation(format!(
            "dt = {} is not below the shortest decay time {}",
            config.dt,
            1.0 / max_rate
        )));
    }
    let mut sample_steps: Vec<usize> = (0..=config.n_steps).step_by(config.sample_every).collect();
    if sample_steps.last() != Some(&config.n_steps) {
        sample_steps.push(config.n_steps);
    }
    let prop = Propagator::new(ops, config.dt)?;
    let runs: Vec<(Vec<PureState>, RunStats)> = (0..config.n_traj)
        .into_par_iter()
        .map(|k| run_single(ops, &prop, psi0, &config, &sample_steps, k))
        .collect::<Result<_>>()?;
    let coarse_steps = runs.iter().map(|(_, s)| s.coarse_steps).sum();
    let max_step_probability = runs.iter().map(|(_, s)| s.max_probability).fold(0.0, f64::max);
    Ok(TrajectoryEnsemble {
        n_traj: config.n_traj,
        seed: config.seed,
        dt: config.dt,
        n_sites: ops.n_sites,
        sample_steps,
        snapshots: runs.into_iter().map(|(s, _)| s).collect(),
        coarse_steps,
        max_step_probability,
    })
}

impl TrajectoryEnsemble {
    pub fn times(&self) -> Vec<f64> {
        self.sample_steps.iter().map(|&s| s as f64 * self.dt).collect()
    }

    fn check_sample(&self, sample: usize) -> Result<()> {
        if sample >= self.sample_steps.len() {
            return Err(Error::Validation(format!(
                "snapshot {sample} out of {}",
                self.sample_steps.len()
            )));
        }
        Ok(())
    }

    /// Index of the last snapshot.
    pub fn last_sample(&self) -> usize {
        self.sample_steps.len() - 1
    }

    /// Ensemble-averaged correlation matrix at snapshot `sample`.
    pub fn correlation(&self, sample: usize) -> Result<EnsembleCorrelation> {
        self.check_sample(sample)?;
        let n = self.n_sites;
        let per: Vec<CMatrix> = self
            .snapshots
            .par_iter()
            .map(|traj| traj[sample].correlation())
            .collect();
        let k = per.len() as f64;
        let mean = per.iter().fold(CMatrix::zeros(n, n), |acc, c| acc + c) / Complex64::new(k, 0.0);
        let spread = |part: fn(Complex64) -> f64| {
            DMatrix::from_fn(n, n, |i, j| {
                if per.len() < 2 {
                    return 0.0;
                }
                let m = part(mean[(i, j)]);
                let var = per.iter().map(|c| (part(c[(i, j)]) - m).powi(2)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            })
        };
        Ok(EnsembleCorrelation {
            stderr_re: spread(|z| z.re),
            stderr_im: spread(|z| z.im),
            mean,
        })
    }
}

/// Information lattice averaged over trajectories at snapshot `sample`.
///
/// Segment informations are averaged first and the local information is
/// taken from the averaged segments, which is the same as averaging the
/// per-trajectory lattices because the site decomposition is linear.
pub fn trajectory_info_lattice(ensemble: &TrajectoryEnsemble, sample: usize) -> Result<TrajectoryLattice> {
    ensemble.check_sample(sample)?;
    let per: Vec<Triangular<f64>> = ensemble
        .snapshots
        .par_iter()
        .map(|traj| traj[sample].segment_information())
        .collect::<Result<_>>()?;
    let k = per.len() as f64;
    let n = ensemble.n_sites;
    let mean = Triangular::from_fn(n, |cell| per.iter().map(|t| t.get(cell).unwrap()).sum::<f64>() / k);
    let segment_stderr = Triangular::from_fn(n, |cell| {
        if per.len() < 2 {
            return 0.0;
        }
        let m = *mean.get(cell).unwrap();
        let var = per.iter().map(|t| (t.get(cell).unwrap() - m).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    });
    let local = lattice::second_difference(&mean);
    Ok(TrajectoryLattice {
        lattice: InfoLattice {
            segment: mean,
            local,
        },
        segment_stderr,
    })
}
