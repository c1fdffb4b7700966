//! Task execution: one configuration in, a set of tables out.

use infolat::currents::{self, CurrentLattice};
use infolat::dynamics::OpenChain;
use infolat::lattice::{self, InfoLattice};
use infolat::negativity;
use infolat::noise;
use infolat::trajectory::{self, McwfConfig, PureState};
use infolat::{fock, CorrelationMatrix};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InitialConfig, NegativityMode, Task, SWEEP_KEYS};
use crate::error::{CliError, CliResult, Context};
use crate::output::{Table, Value};

#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

/// Runs `task` once, or once per sweep point with the swept parameters
/// prepended as columns.
pub fn run(task: Task, cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    if cfg.sweep.is_empty() {
        return run_single(task, cfg);
    }
    let keys: Vec<&str> = SWEEP_KEYS
        .iter()
        .copied()
        .filter(|k| cfg.sweep.iter().any(|p| p.get(k).is_some()))
        .collect();
    let points: Vec<ExperimentConfig> = cfg
        .sweep
        .iter()
        .map(|p| cfg.with_overrides(p))
        .collect::<CliResult<_>>()?;
    let results: Vec<TaskOutput> = points
        .par_iter()
        .map(|p| run_single(task, p))
        .collect::<CliResult<_>>()?;

    let mut out = TaskOutput::default();
    for (point, result) in points.iter().zip(results) {
        let label: Vec<String> = keys
            .iter()
            .map(|k| format!("{k}={}", point.parameter(k).unwrap_or(f64::NAN)))
            .collect();
        let prefix: Vec<Value> = keys
            .iter()
            .map(|k| Value::Float(point.parameter(k).unwrap_or(f64::NAN)))
            .collect();
        out.warnings
            .extend(result.warnings.into_iter().map(|w| format!("[{}] {w}", label.join(", "))));
        for table in result.tables {
            let pos = match out.tables.iter().position(|t| t.name == table.name) {
                Some(p) => p,
                None => {
                    let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
                    header.extend(table.header.iter().cloned());
                    out.tables.push(Table {
                        name: table.name.clone(),
                        header,
                        rows: Vec::new(),
                    });
                    out.tables.len() - 1
                }
            };
            for row in table.rows {
                let mut full = prefix.clone();
                full.extend(row);
                out.tables[pos].rows.push(full);
            }
        }
    }
    Ok(out)
}

pub fn run_single(task: Task, cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    match task {
        Task::Ness => ness(cfg),
        Task::Evolve => evolve(cfg),
        Task::InfoLattice => info_lattice(cfg),
        Task::InfoCurrents => info_currents(cfg),
        Task::NoiseLattice => noise_lattice(cfg),
        Task::Negativity => negativity_task(cfg),
        Task::Trajectories => trajectories(cfg),
    }
}

fn steady_state(cfg: &ExperimentConfig) -> CliResult<(OpenChain, CorrelationMatrix)> {
    let model = cfg.model()?;
    let c = model.solve_ness().context("steady state")?;
    Ok((model, c))
}

fn cell_prefix(cell: lattice::LatticeCoord) -> Vec<Value> {
    vec![cell.ell.into(), cell.n2.into()]
}

fn lattice_table(lat: &InfoLattice) -> Table {
    let mut t = Table::new("info_lattice", &["ell", "n2", "segment_information", "local_information"]);
    for (cell, seg) in lat.segment.iter() {
        let mut row = cell_prefix(cell);
        row.extend([Value::from(*seg), lat.local_at(cell).unwrap().into()]);
        t.push(row);
    }
    t
}

fn current_table(name: &str, lat: &CurrentLattice) -> Table {
    let mut t = Table::new(name, &["ell", "n2", "left", "right", "env", "clipped"]);
    for (cell, e) in lat.cells.iter() {
        let mut row = cell_prefix(cell);
        row.extend([Value::from(e.left), e.right.into(), e.env.into(), e.clipped.into()]);
        t.push(row);
    }
    t
}

fn ness(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let (model, c) = steady_state(cfg)?;
    let n = model.n_sites();
    let mut occ = Table::new("occupations", &["site", "occupation"]);
    let mut corr = Table::new("correlation", &["i", "j", "re", "im"]);
    let mut bonds = Table::new("particle_currents", &["bond", "current"]);
    let mut env = Table::new("reservoir_currents", &["site", "current"]);
    for i in 1..=n {
        occ.push(vec![i.into(), c.occupation(i).into()]);
        env.push(vec![
            i.into(),
            currents::particle_current_env(&model, &c, i).context("reservoir current")?.into(),
        ]);
        for j in 1..=n {
            let z = c.get(i, j);
            corr.push(vec![i.into(), j.into(), z.re.into(), z.im.into()]);
        }
    }
    for j in 1..n {
        bonds.push(vec![
            j.into(),
            currents::particle_current(&model, &c, j).context("particle current")?.into(),
        ]);
    }
    Ok(TaskOutput {
        tables: vec![occ, corr, bonds, env],
        warnings: Vec::new(),
    })
}

fn info_lattice(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let (_, c) = steady_state(cfg)?;
    let lat = lattice::build_info_lattice(&c).context("information lattice")?;
    Ok(TaskOutput {
        tables: vec![lattice_table(&lat)],
        warnings: Vec::new(),
    })
}

fn clipped_warning(lat: &CurrentLattice) -> Option<String> {
    let clipped = lat.cells.values().iter().filter(|e| e.clipped).count();
    (clipped > 0).then(|| {
        format!("{clipped} cells have occupation eigenvalues at 0 or 1; their log-odds were clipped")
    })
}

fn info_currents(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let (model, c) = steady_state(cfg)?;
    let n = model.n_sites();
    let lat = lattice::build_info_lattice(&c).context("information lattice")?;
    let cur = currents::current_lattice(&model, &c).context("information currents")?;
    let mut horizontal = Table::new("horizontal_currents", &["n", "plus", "minus"]);
    for site in 1..=n {
        let (p, m) = cur.horizontal(site).context("horizontal currents")?;
        horizontal.push(vec![site.into(), p.into(), m.into()]);
    }
    let mut vertical = Table::new("vertical_currents", &["ell", "current"]);
    for ell in 0..n {
        vertical.push(vec![ell.into(), cur.vertical(ell).context("vertical currents")?.into()]);
    }
    let bottom = |j: usize| cur.get(lattice::LatticeCoord::from_segment(j, j)).unwrap().env;
    let mut ends = Table::new("end_currents", &["left_in", "right_in", "particle_current"]);
    let particle = if n > 1 {
        currents::particle_current(&model, &c, 1).context("particle current")?
    } else {
        0.0
    };
    ends.push(vec![(-bottom(1)).into(), (-bottom(n)).into(), particle.into()]);
    Ok(TaskOutput {
        warnings: clipped_warning(&cur).into_iter().collect(),
        tables: vec![
            lattice_table(&lat),
            current_table("info_currents", &cur),
            horizontal,
            vertical,
            ends,
        ],
    })
}

fn noise_lattice(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let (model, c) = steady_state(cfg)?;
    let exact = lattice::build_info_lattice(&c).context("information lattice")?;
    let nl = noise::noise_lattice(&c).context("noise lattice")?;
    let approx = noise::approx_currents(&model, &c).context("approximate currents")?;
    let cur = currents::current_lattice(&model, &c).context("information currents")?;
    let mut lat = Table::new(
        "noise_lattice",
        &["ell", "n2", "variance", "kappa", "i_appr", "i_exact"],
    );
    for (cell, var) in nl.variance.iter() {
        let mut row = cell_prefix(cell);
        row.extend([
            Value::from(*var),
            (*nl.kappa.get(cell).unwrap()).into(),
            (*nl.i_appr.get(cell).unwrap()).into(),
            exact.local_at(cell).unwrap().into(),
        ]);
        lat.push(row);
    }
    let mut currents_table = Table::new(
        "approx_currents",
        &["ell", "n2", "left", "right", "env", "exact_left", "exact_right", "exact_env"],
    );
    for (cell, a) in approx.cells.iter() {
        let e = cur.get(cell).unwrap();
        let mut row = cell_prefix(cell);
        row.extend([a.left, a.right, a.env, e.left, e.right, e.env].map(Value::from));
        currents_table.push(row);
    }
    Ok(TaskOutput {
        warnings: clipped_warning(&cur).into_iter().collect(),
        tables: vec![lat, currents_table],
    })
}

fn evolve(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let model = cfg.model()?;
    let time = cfg.time()?;
    let c0 = cfg.initial_state()?;
    let n = model.n_sites();
    let mut series = Table::new(
        "evolution",
        &["step", "t", "total_information", "particle_number", "injected_current", "outgoing_current"],
    );
    let mut occ = Table::new("occupations", &["step", "t", "site", "occupation"]);
    model
        .evolve_with(&c0, time.dt, time.n_steps, time.sample_every, |step, t, c| {
            let injected = -currents::particle_current_env(&model, c, 1)?;
            let outgoing = currents::particle_current_env(&model, c, n)?;
            series.push(vec![
                step.into(),
                t.into(),
                lattice::total_information(c)?.into(),
                c.trace().into(),
                injected.into(),
                outgoing.into(),
            ]);
            for j in 1..=n {
                occ.push(vec![step.into(), t.into(), j.into(), c.occupation(j).into()]);
            }
            Ok(())
        })
        .context("evolution")?;
    Ok(TaskOutput {
        tables: vec![series, occ],
        warnings: Vec::new(),
    })
}

fn negativity_task(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let part = cfg.bipartition()?;
    let model = cfg.model()?;
    let mode = cfg.negativity.as_ref().map(|n| n.mode).unwrap_or_default();
    match mode {
        NegativityMode::Ness => {
            let c = model.solve_ness().context("steady state")?;
            let e = negativity::fermionic_negativity(&c, &part).context("negativity")?;
            let mut t = Table::new("negativity", &["negativity"]);
            t.push(vec![e.into()]);
            Ok(TaskOutput {
                tables: vec![t],
                warnings: Vec::new(),
            })
        }
        NegativityMode::Quench => {
            let time = cfg.time()?;
            let c0 = cfg.initial_state()?;
            let series =
                negativity::negativity_quench_series(&model, &c0, &part, time.dt, time.n_steps, time.sample_every)
                    .context("negativity series")?;
            let mut t = Table::new("negativity_series", &["t", "negativity"]);
            for (time, e) in series {
                t.push(vec![time.into(), e.into()]);
            }
            Ok(TaskOutput {
                tables: vec![t],
                warnings: Vec::new(),
            })
        }
    }
}

fn trajectories(cfg: &ExperimentConfig) -> CliResult<TaskOutput> {
    let tc = cfg
        .trajectories
        .ok_or_else(|| CliError::Config("the trajectories task needs a [trajectories] table".into()))?;
    let model = cfg.model()?;
    let n = model.n_sites();
    let psi0 = match cfg.initial.clone().unwrap_or(InitialConfig::Empty) {
        InitialConfig::Empty => PureState::empty(n),
        InitialConfig::Filled => PureState::occupied(n, &(1..=n).collect::<Vec<_>>()),
        _ => {
            return Err(CliError::Config(
                "trajectories start from a pure state: initial.kind must be empty or filled".into(),
            ))
        }
    }
    .context("initial state")?;
    let ops = fock::build_fock_operators(&model).context("Fock operators")?;
    let mcwf = McwfConfig {
        dt: tc.dt,
        n_steps: tc.n_steps,
        n_traj: tc.n_traj,
        seed: tc.seed,
        sample_every: tc.sample_every.unwrap_or(tc.n_steps.max(1)),
    };
    let ens = trajectory::mcwf_run(&ops, &psi0, mcwf).context("trajectories")?;
    let last = ens.last_sample();
    let tl = trajectory::trajectory_info_lattice(&ens, last).context("trajectory lattice")?;
    let ec = ens.correlation(last).context("trajectory correlation")?;

    let mut warnings = Vec::new();
    if ens.coarse_steps > 0 {
        warnings.push(format!(
            "{} steps had jump probability above {} (max {:.3}); consider a smaller dt",
            ens.coarse_steps,
            trajectory::STEP_WARNING_PROBABILITY,
            ens.max_step_probability
        ));
    }
    let reference = match model.solve_ness() {
        Ok(c) => Some(c),
        Err(e) => {
            warnings.push(format!("no steady-state reference: {e}"));
            None
        }
    };
    let lme = match &reference {
        Some(c) => Some(lattice::build_info_lattice(c).context("information lattice")?),
        None => None,
    };

    let mut lat = Table::new(
        "trajectory_lattice",
        &["ell", "n2", "segment_information", "segment_stderr", "local_information", "steady_local_information"],
    );
    for (cell, seg) in tl.lattice.segment.iter() {
        let mut row = cell_prefix(cell);
        row.extend([
            Value::from(*seg),
            (*tl.segment_stderr.get(cell).unwrap()).into(),
            tl.lattice.local_at(cell).unwrap().into(),
            lme.as_ref().map_or(f64::NAN, |l| l.local_at(cell).unwrap()).into(),
        ]);
        lat.push(row);
    }
    let mut corr = Table::new(
        "trajectory_correlation",
        &["i", "j", "mean_re", "mean_im", "stderr_re", "stderr_im", "steady_re", "steady_im"],
    );
    for i in 0..n {
        for j in 0..n {
            let r = reference.as_ref().map(|c| c.matrix()[(i, j)]);
            corr.push(vec![
                (i + 1).into(),
                (j + 1).into(),
                ec.mean[(i, j)].re.into(),
                ec.mean[(i, j)].im.into(),
                ec.stderr_re[(i, j)].into(),
                ec.stderr_im[(i, j)].into(),
                r.map_or(f64::NAN, |z| z.re).into(),
                r.map_or(f64::NAN, |z| z.im).into(),
            ]);
        }
    }
    let mut summary = Table::new(
        "trajectory_summary",
        &["n_traj", "t_final", "coarse_steps", "max_step_probability", "max_sigma_deviation"],
    );
    let deviation = reference
        .as_ref()
        .map_or(f64::NAN, |c| ec.max_sigma_deviation(c.matrix(), 1e-12));
    summary.push(vec![
        ens.n_traj.into(),
        ens.times()[last].into(),
        ens.coarse_steps.into(),
        ens.max_step_probability.into(),
        deviation.into(),
    ]);
    Ok(TaskOutput {
        tables: vec![lat, corr, summary],
        warnings,
    })
}
