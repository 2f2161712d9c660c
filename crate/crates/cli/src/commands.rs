use rayon::prelude::*;
use serde_json::json;

use cme_core::master_equation::{build_generator, default_dt, integrate_with, suggest_n_max, DistributionSnapshot};
use cme_core::moments::cumulants_from_coeffs;
use cme_core::reaction_model::{ReactionSystem, SystemClass};
use cme_core::semilinear::solve_semilinear;
use cme_core::sobolev_jacobi::solve_binary_system;
use cme_core::ssa::simulate;
use cme_core::BigRational;

use crate::args::{Command, Common, Sweep};
use crate::error::{Failure, NUMERIC, UNSOLVABLE};
use crate::input::{load_system, parse_initial, parse_times};
use crate::output::{state_columns, system_hash, Cell, Table};

const DEFAULT_MAX_DEG: usize = 220;

type Distribution = Vec<(Vec<u32>, f64)>;

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::SolveClosed(args) => solve_closed(&args),
        Command::SolveMaster(args) => solve_master(&args),
        Command::Simulate(args) => run_simulation(&args),
        Command::Moments(args) => moments(&args),
        Command::Compare(args) => compare(&args),
        Command::SweepTernary(args) => sweep(&args),
    }
}

fn state_cells(n: &[u32]) -> impl Iterator<Item = Cell> + '_ {
    n.iter().map(|&v| Cell::Int(u64::from(v)))
}

fn default_max_deg(system: &ReactionSystem, times: &[f64]) -> usize {
    let n_max = suggest_n_max(system, times) as usize;
    if system.num_species() == 1 {
        n_max.max(DEFAULT_MAX_DEG)
    } else {
        n_max * system.num_species()
    }
}

fn table_for(command: &str, system: &ReactionSystem, times: &[f64], columns: Vec<String>) -> Table {
    let mut table = Table::with_columns(columns);
    table.meta("command", json!(command));
    table.meta("system_sha256", json!(system_hash(system)));
    table.meta("times", json!(times));
    table
}

/// Closed-form distributions at each time, on the series support.
fn closed_form(system: &ReactionSystem, times: &[f64], max_deg: usize) -> Result<Vec<Distribution>, Failure> {
    match system.classify() {
        SystemClass::NonBinary | SystemClass::SemiLinearMulti => times
            .iter()
            .map(|&t| {
                let p = solve_semilinear(system, t, max_deg)?;
                let s = system.num_species();
                Ok(p.terms().map(|(e, c)| (e[..s].to_vec(), *c)).collect())
            })
            .collect(),
        SystemClass::BinarySJ => {
            let pgfs = solve_binary_system(system, times)?;
            Ok(pgfs
                .into_iter()
                .map(|p| (0..=system.initial_max_count()).map(|n| (vec![n], p.coeff(n as usize))).collect())
                .collect())
        }
        SystemClass::Generic => {
            Err(Failure::new(UNSOLVABLE, "no closed form for this system (outside the semi-linear and binary families)"))
        }
    }
}

fn solve_closed(args: &Common) -> Result<(), Failure> {
    let system = load_system(args)?;
    let times = parse_times(&args.times)?;
    let max_deg = args.max_deg.unwrap_or_else(|| default_max_deg(&system, &times));
    let dists = closed_form(&system, &times, max_deg)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(state_columns(&system));
    columns.push("p".into());
    let mut table = table_for("solve-closed", &system, &times, columns);
    table.meta("truncation", json!({"max_deg": max_deg}));
    table.meta("class", json!(system.classify().to_string()));
    for (dist, &t) in dists.iter().zip(&times) {
        for (n, p) in dist {
            let mut row = vec![Cell::Real(t)];
            row.extend(state_cells(n));
            row.push(Cell::Real(*p));
            table.rows.push(row);
        }
    }
    table.write(&args.output)
}

fn master(system: &ReactionSystem, times: &[f64], args: &Common) -> Result<(u32, f64, Vec<DistributionSnapshot>), Failure> {
    let n_max = args.n_max.unwrap_or_else(|| suggest_n_max(system, times));
    let generator = build_generator(system, n_max)?;
    let dt = args.dt.unwrap_or_else(|| default_dt(&generator));
    let snaps = integrate_with(&generator, system, times, dt)?;
    Ok((n_max, dt, snaps))
}

fn solve_master(args: &Common) -> Result<(), Failure> {
    let system = load_system(args)?;
    let times = parse_times(&args.times)?;
    let (n_max, dt, snaps) = master(&system, &times, args)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(state_columns(&system));
    columns.extend(["p".into(), "leak".into()]);
    let mut table = table_for("solve-master", &system, &times, columns);
    table.meta("truncation", json!({"n_max": n_max, "dt": dt}));
    for snap in &snaps {
        for (i, p) in snap.probs.iter().enumerate() {
            let n = snap.states.state(i);
            let mut row = vec![Cell::Real(snap.time)];
            row.extend(state_cells(&n));
            row.extend([Cell::Real(*p), Cell::Real(snap.leak)]);
            table.rows.push(row);
        }
    }
    table.write(&args.output)
}

fn run_simulation(args: &Common) -> Result<(), Failure> {
    let system = load_system(args)?;
    let times = parse_times(&args.times)?;
    let t_final = times.last().copied().unwrap_or(0.0);
    let ens = simulate(&system, t_final, &times, args.traj, args.seed)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(state_columns(&system));
    columns.extend(["p".into(), "se".into()]);
    let mut table = table_for("simulate", &system, &times, columns);
    table.meta("truncation", json!({"traj": args.traj, "seed": args.seed}));
    for (k, &t) in times.iter().enumerate() {
        for n in ens.samples[k].keys() {
            let mut row = vec![Cell::Real(t)];
            row.extend(state_cells(n));
            row.extend([Cell::Real(ens.prob(k, n)), Cell::Real(ens.prob_se(k, n))]);
            table.rows.push(row);
        }
    }
    table.write(&args.output)
}

fn univariate(dist: &Distribution) -> Vec<f64> {
    let len = dist.iter().map(|(n, _)| n[0] as usize + 1).max().unwrap_or(0);
    let mut p = vec![0.0; len];
    for (n, v) in dist {
        p[n[0] as usize] += v;
    }
    p
}

fn moments(args: &Common) -> Result<(), Failure> {
    let system = load_system(args)?;
    if system.num_species() != 1 {
        return Err(Failure::new(UNSOLVABLE, "cumulants are reported for one species only"));
    }
    let times = parse_times(&args.times)?;
    // Cumulants weight the tail by n^k, so the cutoff gets twice the headroom.
    let max_deg = args.max_deg.unwrap_or_else(|| 2 * default_max_deg(&system, &times));
    let dists = closed_form(&system, &times, max_deg)?;
    let mut table = table_for("moments", &system, &times, ["t", "c1", "c2", "c3"].map(String::from).to_vec());
    table.meta("truncation", json!({"max_deg": max_deg}));
    for (dist, &t) in dists.iter().zip(&times) {
        let c = cumulants_from_coeffs(&univariate(dist), 3)?;
        table.rows.push(vec![Cell::Real(t), Cell::Real(c[0]), Cell::Real(c[1]), Cell::Real(c[2])]);
    }
    table.write(&args.output)
}

fn compare(args: &Common) -> Result<(), Failure> {
    let system = load_system(args)?;
    let times = parse_times(&args.times)?;
    let (n_max, dt, snaps) = master(&system, &times, args)?;
    let max_deg = args.max_deg.unwrap_or(n_max as usize * system.num_species());
    let dists = closed_form(&system, &times, max_deg)?;
    let mut table = table_for("compare", &system, &times, ["t", "sup_norm", "leak"].map(String::from).to_vec());
    table.meta("truncation", json!({"n_max": n_max, "dt": dt, "max_deg": max_deg}));
    let mut worst = 0.0f64;
    for (snap, dist) in snaps.iter().zip(&dists) {
        let mut sup = 0.0f64;
        let mut covered = 0.0;
        for (n, p) in dist {
            let oracle = snap.prob(n);
            if snap.states.index(n).is_some() {
                covered += oracle;
            }
            sup = sup.max((p - oracle).abs());
        }
        // Oracle mass outside the series support counts as disagreement.
        let outside = (1.0 - snap.leak - covered).max(0.0);
        sup = sup.max(outside);
        worst = worst.max(sup);
        table.rows.push(vec![Cell::Real(snap.time), Cell::Real(sup), Cell::Real(snap.leak)]);
    }
    table.meta("max_sup_norm", json!(worst));
    table.write(&args.output)
}

fn sweep(args: &Sweep) -> Result<(), Failure> {
    let times = parse_times(&args.times)?;
    let initial = parse_initial(&args.initial, 1)?;
    if !(args.step > 0.0 && args.step <= 1.0) {
        return Err(Failure::parse("--step must lie in (0, 1]"));
    }
    let k = (1.0 / args.step).round() as i64;
    if ((k as f64) * args.step - 1.0).abs() > 1e-9 {
        return Err(Failure::parse("--step must divide 1"));
    }
    let points: Vec<(i64, i64)> = (0..=k).flat_map(|i| (0..=k - i).map(move |j| (i, j))).collect();
    let frac = |v: i64| BigRational::new(v.into(), k.into());
    let rows: Vec<Result<Vec<Vec<Cell>>, Failure>> = points
        .par_iter()
        .map(|&(i, j)| {
            let rates = [(0, 1, frac(i)), (0, 2, frac(j)), (1, 0, frac(k - i - j))];
            let system = ReactionSystem::single_species(&rates, 0).with_initial(initial.clone())?;
            let max_deg = args.max_deg.unwrap_or_else(|| default_max_deg(&system, &times));
            let (beta, gamma, tau) = (i as f64 / k as f64, j as f64 / k as f64, (k - i - j) as f64 / k as f64);
            times
                .iter()
                .map(|&t| {
                    let p = solve_semilinear(&system, t, max_deg)?;
                    let coeffs: Vec<f64> = (0..=max_deg).map(|n| p.coeff(n)).collect();
                    let c = cumulants_from_coeffs(&coeffs, 2)?;
                    Ok(vec![Cell::Real(beta), Cell::Real(gamma), Cell::Real(tau), Cell::Real(t), Cell::Real(c[0]), Cell::Real(c[1])])
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(&["beta", "gamma", "tau", "t", "c1", "c2"]);
    table.meta("command", json!("sweep-ternary"));
    table.meta("times", json!(times));
    table.meta("truncation", json!({"step": args.step, "max_deg": args.max_deg}));
    table.meta("initial", json!(args.initial));
    for block in rows {
        table.rows.extend(block?);
    }
    if table.rows.iter().any(|r| r.iter().any(|c| matches!(c, Cell::Real(v) if !v.is_finite()))) {
        return Err(Failure::new(NUMERIC, "non-finite cumulant in sweep"));
    }
    table.write(&args.output)
}
