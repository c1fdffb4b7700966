//! Named configurations reproducing the published scenarios.
//!
//! Every preset is a complete TOML document; `infolat <task> --preset NAME`
//! runs it directly and `--config FILE` overrides parts of it.

use crate::config::Task;

pub struct Preset {
    pub name: String,
    pub task: Task,
    pub description: String,
    pub toml: String,
}

fn chain(n: usize, defect: Option<(usize, f64)>) -> String {
    let mut s = format!("[chain]\nn_sites = {n}\nhopping = 1.0\nonsite = 0.0\n");
    if let Some((site, energy)) = defect {
        s += &format!("site_defect = {{ site = {site}, energy = {energy:?} }}\n");
    }
    s
}

fn large_bias(delta: f64) -> String {
    format!("\n[reservoir]\nregime = \"large_bias\"\ng = 1.0\ndelta = {delta:?}\n")
}

fn sweep(key: &str, values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("\n[[sweep]]\n{key} = {v:?}\n"))
        .collect()
}

/// `start, start + step, ..., stop` without accumulating roundoff.
fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10).collect()
}

fn time(dt: f64, n_steps: usize, sample_every: usize) -> String {
    format!("\n[time]\ndt = {dt:?}\nn_steps = {n_steps}\nsample_every = {sample_every}\n")
}

fn ends(n: usize, len: usize, mode: &str) -> String {
    let a1: Vec<usize> = (1..=len).collect();
    let a2: Vec<usize> = (n + 1 - len..=n).collect();
    format!("\n[negativity]\na1 = {a1:?}\na2 = {a2:?}\nmode = \"{mode}\"\n")
}

fn preset(name: impl Into<String>, task: Task, description: impl Into<String>, toml: String) -> Preset {
    Preset {
        name: name.into(),
        task,
        description: description.into(),
        toml,
    }
}

/// The N=7, j0=4 panels (a)-(d): (delta, defect energy).
const PANELS_N7: [(&str, f64, f64); 4] = [("a", 0.0, 0.0), ("b", 0.75, 0.0), ("c", 0.0, 3.0), ("d", 0.75, 3.0)];

pub fn all() -> Vec<Preset> {
    let mut out = Vec::new();
    out.push(preset(
        "fig5a",
        Task::Ness,
        "occupation profile, N=21 clean chain, delta sweep",
        chain(21, None) + &large_bias(0.0) + &sweep("delta", [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75]),
    ));
    out.push(preset(
        "fig5b",
        Task::Ness,
        "occupation profile, N=21, site defect at 11, defect-energy sweep",
        chain(21, Some((11, 0.0))) + &large_bias(0.0) + &sweep("defect_energy", [0.0, 1.0, 2.0, 3.0]),
    ));
    let lattice_names = ["fig6a", "fig6b", "fig6c", "fig6d"];
    let current_names = ["fig7a", "fig7b", "fig7c", "fig7d"];
    let trajectory_names = ["fig19a", "fig19b", "fig19c", "fig19d"];
    for (k, (_, delta, eps)) in PANELS_N7.iter().enumerate() {
        let base = chain(7, Some((4, *eps))) + &large_bias(*delta);
        out.push(preset(lattice_names[k], Task::InfoLattice, "information lattice, N=7, j0=4", base.clone()));
        out.push(preset(current_names[k], Task::InfoCurrents, "information currents, N=7, j0=4", base.clone()));
        out.push(preset(
            trajectory_names[k],
            Task::Trajectories,
            "trajectory-averaged information lattice, N=7, j0=4, empty start",
            base + "\n[initial]\nkind = \"empty\"\n\n[trajectories]\nn_traj = 1000\nseed = 1\ndt = 0.1\nn_steps = 35000\n",
        ));
    }
    let delta_sweep = sweep("delta", grid(-0.9, 0.9, 0.05));
    let energy_sweep = sweep("defect_energy", grid(0.0, 6.0, 0.25));
    for (name, what) in [
        ("fig8", "end information currents"),
        ("fig9", "vertical currents"),
        ("fig10", "horizontal currents"),
    ] {
        out.push(preset(
            format!("{name}a"),
            Task::InfoCurrents,
            format!("{what}, N=7 clean chain, delta sweep"),
            chain(7, Some((4, 0.0))) + &large_bias(0.0) + &delta_sweep,
        ));
        out.push(preset(
            format!("{name}b"),
            Task::InfoCurrents,
            format!("{what}, N=7, delta=0, defect-energy sweep"),
            chain(7, Some((4, 0.0))) + &large_bias(0.0) + &energy_sweep,
        ));
    }
    for (fig, suffix, delta, eps) in [("fig11", "ab", 0.75, 0.0), ("fig11", "cd", 0.0, 3.0), ("fig12", "ab", 0.75, 0.0), ("fig12", "cd", 0.0, 3.0)] {
        out.push(preset(
            format!("{fig}{suffix}"),
            Task::NoiseLattice,
            "exact and noise-approximated information lattice and currents, N=21, j0=11",
            chain(21, Some((11, eps))) + &large_bias(delta),
        ));
    }
    out.push(preset(
        "fig13",
        Task::InfoCurrents,
        "bond defect J=0.5 on bond 10 of an N=20 chain",
        chain(20, None) + "bond_defect = { bond = 10, hopping = 0.5 }\n" + &large_bias(0.0),
    ));
    out.push(preset(
        "fig14",
        Task::InfoCurrents,
        "off-centre defect j0=7, N=21 (ghost pillar at 15)",
        chain(21, Some((7, 3.0))) + &large_bias(0.0),
    ));
    out.push(preset(
        "fig15",
        Task::InfoCurrents,
        "linear response, N=21, j0=11, phi=0.1",
        chain(21, Some((11, 3.0)))
            + "\n[reservoir]\nregime = \"linear_response\"\ng = 1.0\ndelta = 0.0\nphi = 0.1\n",
    ));
    let quench_from_clean = "\n[initial]\nkind = \"ness\"\ndelta = 0.0\ndefect_energy = 0.0\n";
    out.push(preset(
        "fig16",
        Task::Negativity,
        "end-to-end negativity after quenches from the clean steady state, N=21",
        chain(21, Some((11, 0.0)))
            + &large_bias(0.0)
            + quench_from_clean
            + &time(0.05, 40000, 20)
            + &ends(21, 4, "quench")
            + "\n[[sweep]]\ndefect_energy = 1.0\ndelta = 0.0\n"
            + "\n[[sweep]]\ndefect_energy = 3.0\ndelta = 0.0\n"
            + "\n[[sweep]]\ndefect_energy = 1.0\ndelta = 0.75\n"
            + "\n[[sweep]]\ndefect_energy = 3.0\ndelta = 0.75\n",
    ));
    out.push(preset(
        "fig16_inset",
        Task::Negativity,
        "end-to-end negativity from the empty chain, defect 3, N=21",
        chain(21, Some((11, 3.0)))
            + &large_bias(0.0)
            + "\n[initial]\nkind = \"empty\"\n"
            + &time(0.05, 40000, 20)
            + &ends(21, 4, "quench"),
    ));
    out.push(preset(
        "fig17",
        Task::Negativity,
        "end-to-end negativity of the clean chain filling from empty, N=21",
        chain(21, None) + &large_bias(0.0) + "\n[initial]\nkind = \"empty\"\n" + &time(0.05, 40000, 20) + &ends(21, 4, "quench"),
    ));
    out.push(preset(
        "fig17_inset",
        Task::Evolve,
        "injected and outgoing particle currents of the clean chain filling from empty, N=21",
        chain(21, None) + &large_bias(0.0) + "\n[initial]\nkind = \"empty\"\n" + &time(0.05, 40000, 20),
    ));
    out.push(preset(
        "fig18",
        Task::Negativity,
        "steady-state end-to-end negativity vs defect energy, N=21, j0=11",
        chain(21, Some((11, 0.0))) + &large_bias(0.0) + &ends(21, 4, "ness") + &energy_sweep,
    ));
    out.push(preset(
        "fig18_inset",
        Task::Negativity,
        "negativity between sites 1-2 and 6-7 after switching on the defect, N=21",
        chain(21, Some((11, 3.0)))
            + &large_bias(0.0)
            + quench_from_clean
            + &time(0.05, 40000, 20)
            + "\n[negativity]\na1 = [1, 2]\na2 = [6, 7]\nmode = \"quench\"\n",
    ));
    out
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}
