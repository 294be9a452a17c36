//! Command implementations. Each returns a [`Report`]; jobs run on the rayon
//! pool and are collected in input order.

use std::time::Instant;

use anyhow::{bail, Result};
use heliox::spectrum::{
    converge, default_schedule, entropies, entropies_at, EntropyResult, GridSpec, PartialWaveSpectra, Rung,
    DEFAULT_L_MAX, DEFAULT_TOL_L, DEFAULT_TOL_S,
};
use heliox::variational::{
    default_bracket, optimize_mu, solve_at_mu, GroundState, DEFAULT_MU_TOL, DEFAULT_OMEGA_CAP,
};
use rayon::prelude::*;

use crate::manifest::{Command, Manifest, Target};
use crate::output::{decimals_for, fixed, Report, ResultRecord, Table, RAW_DECIMALS};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Expansion order used when none is given.
pub const DEFAULT_OMEGA: u32 = DEFAULT_OMEGA_CAP;

/// Proportionality constant between S and L quoted for Z = 5.
pub const QUOTED_RATIO: f64 = 6.856;

/// Figure sweeps favour many cheap points over the last digit.
const FIG1_OMEGA: u32 = 10;
const FIG1_TOL_S: f64 = 1e-5;
const FIG1_TOL_L: f64 = 5e-6;
const FIG1_L_MAX: usize = 10;

pub fn run(m: &Manifest) -> Result<Report> {
    match m.command {
        Some(Command::Energy) => energy(m),
        Some(Command::Entropy) => entropy(m),
        Some(Command::Sweep) => sweep(m, &m.z, EntropyPlan::from_manifest(m, None)),
        Some(Command::Reproduce) => match m.target {
            Some(Target::Table1) => table1(),
            Some(Target::Table2) => table2(),
            Some(Target::Table3) => table3(),
            Some(Target::Table5) => table5(m),
            Some(Target::Fig1) => fig1(m),
            None => bail!("reproduce needs a target: table1, table2, table3, table5 or fig1"),
        },
        None => bail!("no command given; use one of energy, entropy, sweep, reproduce"),
    }
}

fn z_values(m: &Manifest) -> Vec<f64> {
    if m.z.is_empty() {
        vec![2.0]
    } else {
        m.z.clone()
    }
}

fn omega_values(m: &Manifest, default: u32) -> Vec<u32> {
    if m.omega.is_empty() {
        vec![default]
    } else {
        m.omega.clone()
    }
}

fn warn_high_omega(omega: u32) {
    if omega > DEFAULT_OMEGA_CAP {
        eprintln!(
            "warning: omega = {omega} is above the default cap {DEFAULT_OMEGA_CAP}; \
             near-dependent overlap directions are projected out"
        );
    }
}

fn ground_state(z: f64, omega: u32, mu: Option<f64>) -> Result<GroundState> {
    Ok(match mu {
        Some(mu) => solve_at_mu(z, omega, mu)?,
        None => optimize_mu(z, omega, default_bracket(z), DEFAULT_MU_TOL)?,
    })
}

fn base_record(command: Command, gs: &GroundState, mu_optimized: bool, started: Instant) -> ResultRecord {
    ResultRecord {
        command: command.name(),
        z: gs.z,
        omega: gs.omega,
        mu: gs.mu,
        mu_optimized,
        energy: gs.energy,
        von_neumann: None,
        linear: None,
        deficit: None,
        radius: None,
        intervals: None,
        l_max: None,
        ladder: Vec::new(),
        wall_time_s: started.elapsed().as_secs_f64(),
        version: VERSION,
        s_decimals: RAW_DECIMALS,
        l_decimals: RAW_DECIMALS,
    }
}

fn with_entropy(mut rec: ResultRecord, r: EntropyResult, rung: Rung, started: Instant) -> ResultRecord {
    rec.von_neumann = Some(r.von_neumann);
    rec.linear = Some(r.linear);
    rec.deficit = Some(r.spectrum.deficit());
    rec.radius = Some(rung.radius);
    rec.intervals = Some(rung.intervals);
    rec.l_max = Some(rung.l_max);
    rec.ladder = r.ladder;
    rec.wall_time_s = started.elapsed().as_secs_f64();
    rec
}

fn energy(m: &Manifest) -> Result<Report> {
    let jobs: Vec<(f64, u32)> = z_values(m)
        .into_iter()
        .flat_map(|z| omega_values(m, DEFAULT_OMEGA).into_iter().map(move |w| (z, w)))
        .collect();
    jobs.iter().for_each(|&(_, w)| warn_high_omega(w));
    let records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&(z, w)| {
            let t = Instant::now();
            let gs = ground_state(z, w, m.mu)?;
            Ok(base_record(Command::Energy, &gs, m.mu.is_none(), t).rounded())
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(["Z", "omega", "mu", "E"]);
    for r in &records {
        table.push(vec![
            r.z.to_string(),
            r.omega.to_string(),
            fixed(r.mu, crate::output::MU_DECIMALS),
            r.energy_text(),
        ]);
    }
    Ok(Report { table, records })
}

/// How entropies are evaluated: one fixed grid, or a convergence ladder.
#[derive(Debug, Clone)]
enum EntropyPlan {
    Single(Rung),
    Ladder {
        rungs: Option<Vec<Rung>>,
        l_max: usize,
        tol_s: f64,
        tol_l: f64,
    },
}

impl EntropyPlan {
    fn from_manifest(m: &Manifest, defaults: Option<(f64, f64, usize)>) -> Self {
        let (tol_s, tol_l, l_max) = defaults.unwrap_or((DEFAULT_TOL_S, DEFAULT_TOL_L, DEFAULT_L_MAX));
        let l_max = m.l_max.unwrap_or(l_max);
        match (m.radius, m.intervals) {
            (Some(r), Some(n)) => EntropyPlan::Single(Rung::new(r, n, l_max)),
            _ => EntropyPlan::Ladder {
                rungs: m.ladder.clone(),
                l_max,
                tol_s: m.tol_s.unwrap_or(tol_s),
                tol_l: m.tol_l.unwrap_or(tol_l),
            },
        }
    }

    fn evaluate(&self, command: Command, z: f64, omega: u32, mu: Option<f64>) -> Result<ResultRecord> {
        let t = Instant::now();
        let gs = ground_state(z, omega, mu)?;
        let rec = base_record(command, &gs, mu.is_none(), t);
        let rec = match self {
            EntropyPlan::Single(rung) => {
                let r = entropies_at(&gs.expansion, *rung)?;
                with_entropy(rec, r, *rung, t)
            }
            EntropyPlan::Ladder {
                rungs,
                l_max,
                tol_s,
                tol_l,
            } => {
                let schedule = rungs.clone().unwrap_or_else(|| default_schedule(z, *l_max));
                let r = converge(&gs.expansion, *tol_s, *tol_l, &schedule)?;
                let last = r.ladder.last().expect("converged ladder is nonempty");
                let rung = Rung::new(last.radius, last.intervals, last.l_max);
                let mut rec = with_entropy(rec, r, rung, t);
                rec.s_decimals = decimals_for(*tol_s);
                rec.l_decimals = decimals_for(*tol_l);
                rec
            }
        };
        Ok(rec.rounded())
    }
}

fn entropy_table(records: &[ResultRecord]) -> Table {
    let mut table = Table::new(["Z", "omega", "mu", "E", "S", "L", "deficit", "R", "n_m", "l_m"]);
    for r in records {
        table.push(vec![
            r.z.to_string(),
            r.omega.to_string(),
            fixed(r.mu, crate::output::MU_DECIMALS),
            r.energy_text(),
            r.s_text(),
            r.l_text(),
            r.deficit.map(|d| format!("{d:.3e}")).unwrap_or_default(),
            r.radius.map(|v| v.to_string()).unwrap_or_default(),
            r.intervals.map(|v| v.to_string()).unwrap_or_default(),
            r.l_max.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    table
}

fn entropy(m: &Manifest) -> Result<Report> {
    let plan = EntropyPlan::from_manifest(m, None);
    let jobs: Vec<(f64, u32)> = z_values(m)
        .into_iter()
        .flat_map(|z| omega_values(m, DEFAULT_OMEGA).into_iter().map(move |w| (z, w)))
        .collect();
    jobs.iter().for_each(|&(_, w)| warn_high_omega(w));
    let records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&(z, w)| plan.evaluate(Command::Entropy, z, w, m.mu))
        .collect::<Result<_>>()?;
    Ok(Report {
        table: entropy_table(&records),
        records,
    })
}

fn sweep_with(m: &Manifest, zs: &[f64], plan: EntropyPlan, omega: u32) -> Result<Report> {
    warn_high_omega(omega);
    let mut jobs = zs.to_vec();
    // the rescale factor is always taken at Z = 5
    let has_five = jobs.contains(&5.0);
    if !has_five {
        jobs.push(5.0);
    }
    let mut records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&z| plan.evaluate(Command::Sweep, z, omega, m.mu))
        .collect::<Result<_>>()?;
    let five = if has_five {
        records.iter().find(|r| r.z == 5.0).cloned()
    } else {
        records.pop()
    }
    .expect("Z = 5 was scheduled");
    let ratio = five.von_neumann.unwrap_or(f64::NAN) / five.linear.unwrap_or(f64::NAN);
    eprintln!("S/L at Z = 5: {ratio:.4} (quoted: {QUOTED_RATIO})");
    let scaled = format!("L*{}", fixed(ratio, 4));
    let mut table = Table::new(["Z", "S", "L", "L*6.856", scaled.as_str(), "S/L"]);
    for r in &records {
        let (s, l) = (r.von_neumann.unwrap_or(f64::NAN), r.linear.unwrap_or(f64::NAN));
        table.push(vec![
            r.z.to_string(),
            r.s_text(),
            r.l_text(),
            fixed(QUOTED_RATIO * l, r.s_decimals),
            fixed(ratio * l, r.s_decimals),
            fixed(s / l, 4),
        ]);
    }
    Ok(Report { table, records })
}

fn sweep(m: &Manifest, zs: &[f64], plan: EntropyPlan) -> Result<Report> {
    let omega = *omega_values(m, DEFAULT_OMEGA).first().expect("nonempty");
    if m.omega.len() > 1 {
        bail!("sweep takes a single omega");
    }
    sweep_with(m, zs, plan, omega)
}

fn fig1(m: &Manifest) -> Result<Report> {
    let zs: Vec<f64> = if m.z.is_empty() {
        (10..=50).map(|k| k as f64 / 10.0).collect()
    } else {
        m.z.clone()
    };
    let mut checked = m.clone();
    checked.command = Some(Command::Sweep);
    checked.z = zs.clone();
    checked.validate()?;
    if m.omega.len() > 1 {
        bail!("fig1 takes a single omega");
    }
    let omega = m.omega.first().copied().unwrap_or(FIG1_OMEGA);
    let plan = EntropyPlan::from_manifest(m, Some((FIG1_TOL_S, FIG1_TOL_L, FIG1_L_MAX)));
    sweep_with(m, &zs, plan, omega)
}

/// Cells printed in the energy table, `(omega, largest Z)`.
const TABLE1_ROWS: [(u32, u32); 5] = [(6, 5), (8, 5), (10, 3), (12, 2), (14, 1)];

fn table1() -> Result<Report> {
    warn_high_omega(14);
    let jobs: Vec<(u32, u32)> = TABLE1_ROWS
        .iter()
        .flat_map(|&(w, zmax)| (1..=zmax).map(move |z| (w, z)))
        .collect();
    let records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&(w, z)| {
            let t = Instant::now();
            let gs = ground_state(z as f64, w, None)?;
            Ok(base_record(Command::Reproduce, &gs, true, t).rounded())
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(["omega", "Z=1", "Z=2", "Z=3", "Z=4", "Z=5"]);
    for &(w, _) in &TABLE1_ROWS {
        let mut row = vec![w.to_string()];
        for z in 1..=5u32 {
            row.push(
                records
                    .iter()
                    .find(|r| r.omega == w && r.z == z as f64)
                    .map(ResultRecord::energy_text)
                    .unwrap_or_default(),
            );
        }
        table.push(row);
    }
    Ok(Report { table, records })
}

/// Decimals of the printed entropy tables.
const TABLE_DECIMALS: usize = 7;

fn fixed_grid_record(gs: &GroundState, result: EntropyResult, rung: Rung, started: Instant) -> ResultRecord {
    let mut rec = with_entropy(base_record(Command::Reproduce, gs, true, started), result, rung, started);
    rec.s_decimals = TABLE_DECIMALS;
    rec.l_decimals = TABLE_DECIMALS;
    rec.rounded()
}

fn table2() -> Result<Report> {
    const OMEGAS: [u32; 3] = [6, 10, 14];
    const RADII: [f64; 3] = [7.0, 9.0, 10.0];
    // spacing 1/120 bohr, the finest of the helium grids
    const PER_BOHR: f64 = 120.0;
    warn_high_omega(14);
    let states: Vec<GroundState> = OMEGAS
        .par_iter()
        .map(|&w| ground_state(2.0, w, None))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..OMEGAS.len())
        .flat_map(|i| RADII.iter().map(move |&r| (i, r)))
        .collect();
    let records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let t = Instant::now();
            let rung = Rung::new(r, (r * PER_BOHR).round() as usize, 2);
            let res = entropies_at(&states[i].expansion, rung)?;
            Ok(fixed_grid_record(&states[i], res, rung, t))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(["omega", "R=7", "R=9", "R=10"]);
    for (i, w) in OMEGAS.iter().enumerate() {
        let mut row = vec![w.to_string()];
        row.extend(records[i * RADII.len()..(i + 1) * RADII.len()].iter().map(ResultRecord::l_text));
        table.push(row);
    }
    Ok(Report { table, records })
}

fn table3() -> Result<Report> {
    const GRIDS: [usize; 3] = [300, 600, 1200];
    const L_ROWS: [usize; 10] = [0, 1, 2, 3, 4, 5, 10, 14, 18, 20];
    warn_high_omega(14);
    let gs = ground_state(2.0, 14, None)?;
    let per_grid: Vec<Vec<ResultRecord>> = GRIDS
        .par_iter()
        .map(|&n| {
            let t = Instant::now();
            let mut spectra = PartialWaveSpectra::new(&gs.expansion, GridSpec::new(10.0, n)?);
            L_ROWS
                .iter()
                .map(|&l| {
                    let res = entropies(&spectra.spectrum(l)?)?;
                    Ok(fixed_grid_record(&gs, res, Rung::new(10.0, n, l), t))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut header = vec!["l_m".to_string()];
    header.extend(GRIDS.iter().map(|n| format!("S n_m={n}")));
    header.extend(GRIDS.iter().map(|n| format!("L n_m={n}")));
    let mut table = Table::new(header);
    for (row, l) in L_ROWS.iter().enumerate() {
        let mut cells = vec![l.to_string()];
        cells.extend(per_grid.iter().map(|g| g[row].s_text()));
        cells.extend(per_grid.iter().map(|g| g[row].l_text()));
        table.push(cells);
    }
    let records = (0..L_ROWS.len())
        .flat_map(|row| per_grid.iter().map(move |g| g[row].clone()))
        .collect();
    Ok(Report { table, records })
}

fn table5(m: &Manifest) -> Result<Report> {
    let plan = EntropyPlan::from_manifest(m, None);
    if m.omega.len() > 1 {
        bail!("table5 takes a single omega");
    }
    let omega = m.omega.first().copied().unwrap_or(DEFAULT_OMEGA);
    warn_high_omega(omega);
    let records: Vec<ResultRecord> = (1..=5)
        .collect::<Vec<u32>>()
        .par_iter()
        .map(|&z| plan.evaluate(Command::Reproduce, z as f64, omega, m.mu))
        .collect::<Result<_>>()?;
    let mut table = Table::new(["quantity", "Z=1", "Z=2", "Z=3", "Z=4", "Z=5"]);
    let mut l_row = vec!["L".to_string()];
    l_row.extend(records.iter().map(ResultRecord::l_text));
    let mut s_row = vec!["S".to_string()];
    s_row.extend(records.iter().map(ResultRecord::s_text));
    table.push(l_row);
    table.push(s_row);
    Ok(Report { table, records })
}
