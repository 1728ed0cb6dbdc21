use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sidplan::framework::{
    one_step_optimize_with_observer, sensitivity_flight_counts_with_progress, simulate_route, split_counts,
    step1_design_routes_with_observer, step2_allocate_with_observer, AllocationSolution, OneStepSolution, RouteArchive,
};
use sidplan::moead::{write_trace_csv, GenerationReport, MoeadConfig, TracePoint};
use sidplan::noise::{lden_grid, LdenSettings, PopulationGrid, SelGrid};
use sidplan::scenario_io::{
    allocation_table_csv, front_csv, front_rows_for_allocation, front_rows_for_archive, lden_contour_ascii, load_archive,
    load_scenario, profiles_csv, read_archive, save_archive, tracks_geojson, write_atomic, FrontRow, Scenario,
};
use sidplan::Mode;

use crate::error::{CliError, EMPTY_ARCHIVE, INVALID, IO, USAGE};
use crate::{Command, RunArgs};

/// Allocation results as written by `allocate` and read by `export`.
#[derive(Serialize, Deserialize)]
struct AllocationFile {
    mode: Mode,
    sids: Vec<String>,
    aircraft: Vec<String>,
    solutions: Vec<AllocationSolution>,
}

#[derive(Serialize)]
struct IntegratedFile<'a> {
    mode: Mode,
    sids: Vec<&'a str>,
    aircraft: Vec<&'a str>,
    solutions: &'a [OneStepSolution],
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { scenario } => validate(&scenario),
        Command::DesignRoutes {
            scenario,
            run,
            sids,
            design_flights,
        } => design_routes(&scenario, &run, &sids, design_flights),
        Command::Allocate {
            scenario,
            run,
            archives,
            allow_hash_mismatch,
        } => allocate(&scenario, &run, archives.as_deref(), allow_hash_mismatch),
        Command::Integrated { scenario, run } => integrated(&scenario, &run),
        Command::Sensitivity {
            scenario,
            run,
            sid,
            flights,
        } => sensitivity(&scenario, &run, sid.as_deref(), &flights),
        Command::Export {
            archives,
            allocation,
            solution,
            threshold_db,
            evening_penalty_db,
            night_penalty_db,
            out,
        } => {
            let lden = LdenSettings {
                weights_db: [0.0, evening_penalty_db, night_penalty_db],
                ..LdenSettings::default()
            };
            export(&archives, allocation.as_deref(), solution, threshold_db, &lden, &out)
        }
    }
}

fn validate(path: &Path) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let movements: u32 = s.schedule.totals.iter().flatten().flatten().sum();
    println!(
        "scenario '{}' is valid: {} SIDs, {} aircraft types, {} terminal points, {} movements, {} grid cells",
        s.name,
        s.sids.len(),
        s.context.fleet.len(),
        s.schedule.terminal_points.len(),
        movements,
        s.context.population.geometry.len()
    );
    println!("scenario hash {}", s.hash);
    Ok(())
}

fn configure(base: &MoeadConfig, run: &RunArgs) -> MoeadConfig {
    let mut cfg = base.clone();
    if let Some(seed) = run.seed {
        cfg.rng_seed = seed;
    }
    if let Some(g) = run.generations {
        cfg.max_iterations = g;
    }
    if let Some(p) = run.population {
        cfg.population_size = p;
        cfg.neighborhood_size = cfg.neighborhood_size.min(p);
    }
    cfg.workers = run.workers;
    cfg
}

fn progress(label: String, every: usize, total: usize) -> impl FnMut(&GenerationReport<'_>) {
    move |r| {
        if every > 0 && (r.iteration % every == 0 || r.iteration == total) {
            eprintln!(
                "{label}: generation {}/{total}, hypervolume {:.6e}, feasible {}/{}, archive {}",
                r.iteration,
                r.hypervolume,
                r.feasible_count,
                r.before.len(),
                r.archive.len()
            );
        }
    }
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new(IO, format!("{}: {e}", dir.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    Ok(write_atomic(path, bytes)?)
}

fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).map_err(|e| CliError::new(IO, e.to_string()))?;
    write(path, &buf)
}

fn archive_name(sid: &str, mode: Mode) -> String {
    format!("{sid}_{mode}.sidarch")
}

fn json(value: &impl Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("results serialize");
    v.push(b'\n');
    v
}

fn design_routes(path: &Path, run: &RunArgs, only: &[String], design_flights: Option<u32>) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    if let Some(name) = only.iter().find(|n| s.sid_index(n).is_none()) {
        return Err(CliError::new(USAGE, format!("scenario has no SID named '{name}'")));
    }
    prepare_out(&run.out)?;
    let cfg = configure(&s.step1, run);
    for (k, sid) in s.sids.iter().enumerate() {
        if !only.is_empty() && !only.contains(&sid.name) {
            continue;
        }
        let counts = match design_flights {
            Some(n) => split_counts(n, &s.schedule.totals[s.schedule.route_terminal[k]]),
            None => s.design_counts[k].clone(),
        };
        let label = format!("design-routes {} ({})", sid.name, run.mode);
        let observer = progress(label, run.progress_every, cfg.max_iterations);
        let r = step1_design_routes_with_observer(&s.context, sid, &counts, run.mode, &cfg, observer)?;
        let stem = format!("{}_{}", sid.name, run.mode);
        save_archive(&run.out.join(archive_name(&sid.name, run.mode)), &r.archive, &s.hash)?;
        write(&run.out.join(format!("{stem}_front.csv")), &front_csv(&front_rows_for_archive(&r.archive)))?;
        write_trace(&run.out.join(format!("{stem}_trace.csv")), &r.optimization.trace)?;
        eprintln!("{}: {} routes archived after {} evaluations", sid.name, r.archive.len(), r.optimization.evaluations);
    }
    Ok(())
}

fn load_archives(s: &Scenario, dir: &Path, mode: Mode, allow_mismatch: bool) -> Result<Vec<RouteArchive>, CliError> {
    let mut out = Vec::with_capacity(s.sids.len());
    for sid in &s.sids {
        let p = dir.join(archive_name(&sid.name, mode));
        if !p.exists() {
            return Err(CliError::new(
                IO,
                format!(
                    "missing Step-1 archive for SID '{}': {} does not exist (run design-routes first)",
                    sid.name,
                    p.display()
                ),
            ));
        }
        let a = load_archive(&p, &s.hash, allow_mismatch)?.archive;
        let fleet: Vec<&str> = s.context.fleet.iter().map(|a| a.name.as_str()).collect();
        if a.sid != sid.name || a.mode != mode || a.aircraft != fleet {
            return Err(CliError::new(
                INVALID,
                format!("{}: archive is for SID '{}' ({}) with types {:?}", p.display(), a.sid, a.mode, a.aircraft),
            ));
        }
        out.push(a);
    }
    Ok(out)
}

fn allocate(path: &Path, run: &RunArgs, archives: Option<&Path>, allow_mismatch: bool) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let archives = load_archives(&s, archives.unwrap_or(&run.out), run.mode, allow_mismatch)?;
    prepare_out(&run.out)?;
    let cfg = configure(&s.step2, run);
    let observer = progress(format!("allocate ({})", run.mode), run.progress_every, cfg.max_iterations);
    let r = step2_allocate_with_observer(&archives, &s.schedule, &s.context.population, &s.context.lden, &cfg, observer)?;
    if r.solutions.is_empty() {
        return Err(CliError::new(EMPTY_ARCHIVE, "allocation produced no feasible solution"));
    }
    let stem = format!("allocation_{}", run.mode);
    write(&run.out.join(format!("{stem}_front.csv")), &front_csv(&front_rows_for_allocation(&r.solutions, &archives)))?;
    write(&run.out.join(format!("{stem}_table.csv")), &allocation_table_csv(&r.solutions, &archives))?;
    let file = AllocationFile {
        mode: run.mode,
        sids: s.sids.iter().map(|x| x.name.clone()).collect(),
        aircraft: s.context.fleet.iter().map(|a| a.name.clone()).collect(),
        solutions: r.solutions,
    };
    write(&run.out.join(format!("{stem}.json")), &json(&file))?;
    write_trace(&run.out.join(format!("{stem}_trace.csv")), &r.optimization.trace)?;
    eprintln!("allocation front has {} solutions", file.solutions.len());
    Ok(())
}

fn integrated(path: &Path, run: &RunArgs) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    prepare_out(&run.out)?;
    let cfg = configure(&s.one_step, run);
    let observer = progress(format!("integrated ({})", run.mode), run.progress_every, cfg.max_iterations);
    let r = one_step_optimize_with_observer(&s.context, &s.sids, &s.schedule, run.mode, &cfg, observer)?;
    if r.solutions.is_empty() {
        return Err(CliError::new(EMPTY_ARCHIVE, "integrated optimization produced no feasible solution"));
    }
    let mut rows = Vec::with_capacity(r.solutions.len());
    for (n, sol) in r.solutions.iter().enumerate() {
        let (mut d, mut t) = (0.0, 0.0);
        for (k, (sid, x)) in s.sids.iter().zip(&sol.routes).enumerate() {
            let route = simulate_route(&s.context, sid, run.mode, x)
                .map_err(|v| CliError::new(INVALID, format!("solution {n} no longer simulates (violation {v})")))?;
            for (i, tr) in route.trajectories.iter().enumerate() {
                let m = sol.counts.movements(k, i) as f64;
                d += m * tr.distance();
                t += m * tr.duration();
            }
        }
        rows.push(FrontRow {
            solution_id: n,
            n_pa: sol.objectives[0],
            t_fuel: sol.objectives[1],
            distance_km: d / 1000.0,
            flight_time_h: t / 3600.0,
        });
    }
    let stem = format!("integrated_{}", run.mode);
    write(&run.out.join(format!("{stem}_front.csv")), &front_csv(&rows))?;
    let file = IntegratedFile {
        mode: run.mode,
        sids: s.sids.iter().map(|x| x.name.as_str()).collect(),
        aircraft: s.context.fleet.iter().map(|a| a.name.as_str()).collect(),
        solutions: &r.solutions,
    };
    write(&run.out.join(format!("{stem}.json")), &json(&file))?;
    write_trace(&run.out.join(format!("{stem}_trace.csv")), &r.optimization.trace)?;
    eprintln!("integrated front has {} solutions", r.solutions.len());
    Ok(())
}

fn sensitivity(path: &Path, run: &RunArgs, sid: Option<&str>, flights: &[u32]) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    if flights.is_empty() {
        return Err(CliError::new(USAGE, "--flights needs at least one count"));
    }
    let k = match sid {
        Some(name) => s
            .sid_index(name)
            .ok_or_else(|| CliError::new(USAGE, format!("scenario has no SID named '{name}'")))?,
        None => 0,
    };
    let sid = &s.sids[k];
    prepare_out(&run.out)?;
    let cfg = configure(&s.step1, run);
    let shares = &s.schedule.totals[s.schedule.route_terminal[k]];
    let counts: Vec<Vec<[u32; 3]>> = flights.iter().map(|&n| split_counts(n, shares)).collect();
    let report = sensitivity_flight_counts_with_progress(&s.context, sid, &counts, run.mode, &cfg, |n| {
        if run.progress_every > 0 {
            eprintln!("sensitivity {}: designing under {} flights", sid.name, flights[n]);
        }
    })?;
    let stem = format!("sensitivity_{}_{}", sid.name, run.mode);
    let mut table = String::from("flights");
    for f in flights {
        table.push_str(&format!(",in_{f}"));
    }
    table.push('\n');
    for (f, row) in flights.iter().zip(&report.matrix) {
        table.push_str(&f.to_string());
        for v in row {
            table.push_str(&format!(",{v}"));
        }
        table.push('\n');
    }
    write(&run.out.join(format!("{stem}.csv")), table.as_bytes())?;
    for (f, a) in flights.iter().zip(&report.archives) {
        write(&run.out.join(format!("{stem}_{f}_front.csv")), &front_csv(&front_rows_for_archive(a)))?;
    }
    let largest = flights[report.largest];
    for (f, c) in flights.iter().zip(report.against_largest()) {
        println!("{f}-flight front within tolerance of the {largest}-flight front: {:.1}%", 100.0 * c);
    }
    Ok(())
}

fn read_archive_file(path: &Path) -> Result<RouteArchive, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::new(IO, format!("{}: {e}", path.display())))?;
    Ok(read_archive(&bytes, path)?.archive)
}

fn export(
    archive_paths: &[PathBuf],
    allocation: Option<&Path>,
    solution: usize,
    threshold_db: f64,
    lden: &LdenSettings,
    out: &Path,
) -> Result<(), CliError> {
    let archives = archive_paths.iter().map(|p| read_archive_file(p)).collect::<Result<Vec<_>, _>>()?;
    prepare_out(out)?;
    for a in &archives {
        let stem = format!("{}_{}", a.sid, a.mode);
        write(&out.join(format!("{stem}_front.csv")), &front_csv(&front_rows_for_archive(a)))?;
        let all: Vec<(usize, &RouteArchive, usize)> = (0..a.len()).map(|r| (r, a, r)).collect();
        write(&out.join(format!("{stem}_tracks.geojson")), tracks_geojson(&all).as_bytes())?;
        write(&out.join(format!("{stem}_profiles.csv")), &profiles_csv(a))?;
    }
    let Some(alloc_path) = allocation else {
        return Ok(());
    };
    let text = std::fs::read(alloc_path).map_err(|e| CliError::new(IO, format!("{}: {e}", alloc_path.display())))?;
    let file: AllocationFile = serde_json::from_slice(&text)
        .map_err(|e| CliError::new(INVALID, format!("{}: {e}", alloc_path.display())))?;
    let mut ordered = Vec::with_capacity(file.sids.len());
    for name in &file.sids {
        let a = archives
            .iter()
            .find(|a| a.sid == *name && a.mode == file.mode)
            .ok_or_else(|| CliError::new(USAGE, format!("allocation uses SID '{name}' ({}) but no archive for it was given", file.mode)))?;
        ordered.push(a.clone());
    }
    let invalid = |m: String| CliError::new(INVALID, format!("{}: {m}", alloc_path.display()));
    for (n, sol) in file.solutions.iter().enumerate() {
        if sol.routes.len() != ordered.len() || sol.routes.iter().zip(&ordered).any(|(&r, a)| r >= a.len()) {
            return Err(invalid(format!("solution {n} refers to routes outside the given archives")));
        }
    }
    let stem = format!("allocation_{}", file.mode);
    let selection: Vec<(usize, &RouteArchive, usize)> = file
        .solutions
        .iter()
        .enumerate()
        .flat_map(|(n, sol)| sol.routes.iter().zip(&ordered).map(move |(&r, a)| (n, a, r)))
        .collect();
    write(&out.join(format!("{stem}_tracks.geojson")), tracks_geojson(&selection).as_bytes())?;
    let sol = file
        .solutions
        .get(solution)
        .ok_or_else(|| CliError::new(USAGE, format!("--solution {solution} is out of range ({} solutions)", file.solutions.len())))?;
    let geometry = ordered[0].geometry;
    let grids: Vec<Vec<&SelGrid>> = sol.routes.iter().zip(&ordered).map(|(&r, a)| a.entries[r].sel.iter().collect()).collect();
    let frame = PopulationGrid::uniform(geometry, 0.0).map_err(|e| invalid(e.to_string()))?;
    let grid = lden_grid(&frame, &grids, &sol.counts, lden).map_err(|e| invalid(e.to_string()))?;
    write(
        &out.join(format!("{stem}_solution{solution}_contour.asc")),
        lden_contour_ascii(&geometry, &grid, threshold_db).as_bytes(),
    )?;
    Ok(())
}
