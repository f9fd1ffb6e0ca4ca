//! The four experiment commands.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use uam_core::fleet::{
    build_initial_schedule, check_regulations, objective_in, optimize_schedule, run_baseline_ga, ConflictIndex, FleetScenario,
    Objective, OptimizationResult, Schedule, ScenarioConfig, SoaConfig, TracePoint,
};
use uam_core::grid::{CellIndex, GridSpec};
use uam_core::planner::{
    merge_to_equivalent, plan_initial_track, plan_shortest_track, smooth_track, AircraftPerformance, SmoothOptions, Track,
    TrackQuery,
};
use uam_core::risk::{build_risk_map, RiskMap};
use uam_core::scene::UrbanScene;

use crate::config::{ExperimentConfig, FleetSource, NamedQuery};
use crate::error::{Result, ToolError};
use crate::formats::{self, num, RiskMapFile, Table};
use crate::svg::{self, Series};

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| ToolError::Internal(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    formats::write_bytes(path, text.as_bytes())
}

fn layer_k(grid: &GridSpec, altitude: f64) -> Result<u32> {
    grid.layer_of_altitude(altitude).ok_or_else(|| ToolError::validation(format!("altitude {altitude} m is outside the grid")))
}

fn layer_stats(map: &RiskMap, k: u32) -> (usize, f64) {
    let g = map.grid();
    let (a, b, _) = g.dims();
    let (mut sum, mut n) = (0.0, 0usize);
    for i in 1..=a {
        for j in 1..=b {
            let c = CellIndex::new(i, j, k);
            if !map.is_blocked(&c) {
                sum += map.relative_risk(&c);
                n += 1;
            }
        }
    }
    (map.unsafe_count_in_layer(k), if n == 0 { 0.0 } else { sum / n as f64 })
}

fn layer_svg(map: &RiskMap, k: u32, title: &str) -> String {
    let g = map.grid();
    let (a, b, _) = g.dims();
    let per = (a * b) as usize;
    let start = (k as usize - 1) * per;
    let rel: Vec<f64> = map.risk_values()[start..start + per].iter().map(|r| r / map.threshold()).collect();
    let blocked = &map.unsafe_flags()[start..start + per];
    svg::heatmap(title, &rel, blocked, a, b, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub altitude: f64,
    pub k: u32,
    pub unsafe_cells: usize,
    pub mean_relative_risk: f64,
}

/// Writes `risk_map.json`, a `layers.csv` audit and one CSV and heatmap per
/// configured layer.
pub fn cmd_risk_map(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<LayerReport>> {
    cfg.validate()?;
    let scene = cfg.scene()?;
    let map = build_risk_map(&scene, &cfg.risk)?;
    formats::write_json(&out.join("risk_map.json"), &RiskMapFile::from_map(&map))?;
    let mut layers = Table::new(formats::LAYERS);
    let mut report = Vec::new();
    for &z in &cfg.layers {
        let k = layer_k(map.grid(), z)?;
        let (unsafe_cells, mean) = layer_stats(&map, k);
        layers.push(vec![num(z), k.to_string(), unsafe_cells.to_string(), num(mean)])?;
        formats::layer_table(&map, k)?.write(&out.join(format!("layer_k{k}.csv")))?;
        write_text(&out.join(format!("layer_k{k}.svg")), &layer_svg(&map, k, &format!("Relative risk at {z} m (layer {k})")))?;
        report.push(LayerReport { altitude: z, k, unsafe_cells, mean_relative_risk: mean });
    }
    layers.write(&out.join("layers.csv"))?;
    Ok(report)
}

/// Shortest, initial, equivalent and optimal (smoothed) tracks for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub shortest: Track,
    pub initial: Track,
    pub equivalent: Track,
    pub optimal: Track,
    /// Seconds per stage; the later stages include the search they refine.
    pub times: [f64; 4],
}

impl PlanResult {
    pub fn tracks(&self) -> [(&'static str, &Track); 4] {
        [("shortest", &self.shortest), ("initial", &self.initial), ("equivalent", &self.equivalent), ("optimal", &self.optimal)]
    }
}

pub fn plan_query(map: &RiskMap, perf: &AircraftPerformance, query: &TrackQuery, smoothing: SmoothOptions) -> Result<PlanResult> {
    let t = Instant::now();
    let shortest = plan_shortest_track(query, map, perf)?;
    let t_short = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let initial = plan_initial_track(query, map, perf)?;
    let t_init = t.elapsed().as_secs_f64();
    let equivalent = merge_to_equivalent(&initial, map, perf, query)?;
    let t_eq = t.elapsed().as_secs_f64();
    let optimal = smooth_track(&equivalent, map, perf, query, smoothing)?;
    let t_opt = t.elapsed().as_secs_f64();
    Ok(PlanResult { shortest, initial, equivalent, optimal, times: [t_short, t_init, t_eq, t_opt] })
}

fn summary_rows(t: &mut Table, name: &str, res: &std::result::Result<PlanResult, ToolError>, timing: bool) -> Result<()> {
    match res {
        Ok(r) => {
            for ((label, track), time) in r.tracks().into_iter().zip(r.times) {
                let m = &track.metrics;
                let time = if timing { format!("{time:.6}") } else { String::new() };
                t.push(vec![
                    name.into(),
                    label.into(),
                    "ok".into(),
                    num(m.risk_cost),
                    num(m.transport_cost),
                    m.waypoints.to_string(),
                    time,
                ])?;
            }
        }
        Err(e) => t.push(vec![name.into(), String::new(), format!("infeasible: {e}"), String::new(), String::new(), String::new(), String::new()])?,
    }
    Ok(())
}

fn track_table(r: &PlanResult) -> Result<Table> {
    let mut t = Table::new(formats::TRACK);
    for (_, track) in r.tracks() {
        formats::push_track(&mut t, track)?;
    }
    Ok(t)
}

fn track_svg(name: &str, r: &PlanResult) -> String {
    let series: Vec<Series> = r
        .tracks()
        .into_iter()
        .map(|(label, t)| Series { label, points: t.waypoints.iter().map(|p| (p.x, p.y)).collect(), markers: false })
        .collect();
    svg::line_plot(&format!("Tracks for {name}"), "x (m)", "y (m)", &series)
}

fn safe_name(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Plans every query; writes per-query track CSV and plot plus `summary.csv`.
/// Fails with infeasibility only when no query could be planned.
pub fn cmd_plan(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(String, std::result::Result<PlanResult, ToolError>)>> {
    cfg.validate()?;
    if cfg.queries.is_empty() {
        return Err(ToolError::validation("config has no queries"));
    }
    let scene = cfg.scene()?;
    let map = build_risk_map(&scene, &cfg.risk)?;
    let mut summary = Table::new(formats::SUMMARY);
    let mut results = Vec::new();
    for NamedQuery { name, query } in &cfg.queries {
        let res = plan_query(&map, &cfg.performance, query, cfg.smoothing);
        summary_rows(&mut summary, name, &res, cfg.timing)?;
        if let Ok(r) = &res {
            let stem = safe_name(name);
            track_table(r)?.write(&out.join(format!("tracks_{stem}.csv")))?;
            write_text(&out.join(format!("tracks_{stem}.svg")), &track_svg(name, r))?;
        }
        results.push((name.clone(), res));
    }
    summary.write(&out.join("summary.csv"))?;
    if results.iter().all(|(_, r)| r.is_err()) {
        return Err(ToolError::Infeasible("no query could be planned".into()));
    }
    Ok(results)
}

/// Base plan and both optimizers on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRun {
    pub seed: u64,
    pub base: Schedule,
    pub base_objective: Objective,
    pub soa: OptimizationResult,
    pub ga: OptimizationResult,
}

pub fn run_schedule(scenario: &FleetScenario, optimizer: &SoaConfig) -> Result<ScheduleRun> {
    let index = ConflictIndex::build(scenario)?;
    let base = build_initial_schedule(scenario, &index)?;
    if let Some(v) = check_regulations(scenario, &base).first() {
        return Err(ToolError::Infeasible(format!("base plan violates {v:?}")));
    }
    let base_objective = objective_in(&base, optimizer.omega6, optimizer.omega7, scenario.aircraft.len(), optimizer.delay_unit);
    let soa = optimize_schedule(scenario, &index, optimizer)?;
    let ga = run_baseline_ga(scenario, &index, optimizer)?;
    Ok(ScheduleRun { seed: optimizer.seed, base, base_objective, soa, ga })
}

fn delay_cell(s: &Schedule, x: usize) -> String {
    let f = &s.flights[x];
    if f.operating {
        num(f.delay)
    } else {
        "cancelled".into()
    }
}

fn rate_of_change(soa: &Schedule, ga: &Schedule, x: usize) -> String {
    let (a, b) = (&soa.flights[x], &ga.flights[x]);
    if !(a.operating && b.operating) {
        return "NA".into();
    }
    if b.delay == 0.0 {
        return if a.delay == 0.0 { "0".into() } else { "NA".into() };
    }
    num((a.delay - b.delay) / b.delay)
}

fn report_row(t: &mut Table, seed: u64, plan: &str, s: &Schedule, o: &Objective) -> Result<()> {
    t.push(vec![
        seed.to_string(),
        plan.into(),
        o.s.to_string(),
        s.cancelled().to_string(),
        s.delayed().to_string(),
        num(o.total_delay),
        num(o.t_d),
        num(o.w),
    ])
}

fn trace_table(trace: &[TracePoint]) -> Result<Table> {
    let mut t = Table::new(formats::CONVERGENCE);
    for p in trace {
        t.push(vec![p.generation.to_string(), num(p.best_w), num(p.t_d), p.s.to_string()])?;
    }
    Ok(t)
}

fn write_schedule_run(run: &ScheduleRun, dir: &Path) -> Result<()> {
    let mut t = Table::new(formats::SCHEDULE);
    let (soa, ga) = (&run.soa.best.schedule, &run.ga.best.schedule);
    for (x, f) in run.base.flights.iter().enumerate() {
        t.push(vec![
            (x + 1).to_string(),
            (f.aircraft + 1).to_string(),
            f.number.to_string(),
            (f.route + 1).to_string(),
            delay_cell(&run.base, x),
            delay_cell(soa, x),
            delay_cell(ga, x),
            rate_of_change(soa, ga, x),
        ])?;
    }
    t.write(&dir.join("schedule.csv"))?;
    trace_table(&run.soa.trace)?.write(&dir.join("convergence_soa.csv"))?;
    trace_table(&run.ga.trace)?.write(&dir.join("convergence_ga.csv"))?;
    let series = |label, r: &OptimizationResult| Series {
        label,
        points: r.trace.iter().map(|p| (p.generation as f64, p.best_w)).collect(),
        markers: false,
    };
    let plot = svg::line_plot("Best objective per generation", "generation", "W", &[series("SOA", &run.soa), series("GA", &run.ga)]);
    write_text(&dir.join("convergence.svg"), &plot)
}

/// Runs every seed (in parallel up to `workers`), writing a directory per
/// seed and `report.csv` with base, SOA and GA aggregates.
pub fn cmd_schedule(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<Vec<ScheduleRun>> {
    cfg.validate()?;
    let runs: Vec<Result<ScheduleRun>> = pool(workers)?.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let run = run_schedule(&cfg.scenario(seed)?, &cfg.optimizer_for(seed))?;
                write_schedule_run(&run, &out.join(format!("seed_{seed}")))?;
                Ok(run)
            })
            .collect()
    });
    let runs: Vec<ScheduleRun> = runs.into_iter().collect::<Result<_>>()?;
    let mut report = Table::new(formats::REPORT);
    for r in &runs {
        report_row(&mut report, r.seed, "base", &r.base, &r.base_objective)?;
        report_row(&mut report, r.seed, "soa", &r.soa.best.schedule, &r.soa.best.objective)?;
        report_row(&mut report, r.seed, "ga", &r.ga.best.schedule, &r.ga.best.objective)?;
    }
    report.write(&out.join("report.csv"))?;
    Ok(runs)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices of points not dominated by any other (both coordinates minimized).
/// Duplicates of a point are all kept.
pub fn non_dominated(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|p| !points.iter().any(|q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SweepPoint {
    Altitude(f64),
    CellSize(f64),
    Flights(u32),
    Speed(f64),
    Weight(f64),
}

impl SweepPoint {
    fn dir(&self) -> String {
        match self {
            SweepPoint::Altitude(v) => format!("altitude_{v}"),
            SweepPoint::CellSize(v) => format!("cell_{v}"),
            SweepPoint::Flights(v) => format!("flights_{v}"),
            SweepPoint::Speed(v) => format!("speed_{v}"),
            SweepPoint::Weight(v) => format!("w_risk_{v}"),
        }
    }
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointMetrics {
    Layer(LayerReport),
    Track { risk_cost: f64, transport_cost: f64, waypoints: usize, length: f64 },
    Delay { seeds: usize, base_average_delay: f64, soa_average_delay: f64, soa_operated: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub altitude: Vec<(f64, std::result::Result<LayerReport, String>)>,
    pub cell_size: Vec<(f64, std::result::Result<PointMetrics, String>)>,
    pub flights: Vec<(u32, std::result::Result<PointMetrics, String>)>,
    pub speed: Vec<(f64, std::result::Result<PointMetrics, String>)>,
    pub pareto: Vec<(f64, std::result::Result<PointMetrics, String>)>,
}

/// Maps a query onto a coarser grid through the centers of its end cells.
fn requery(query: &TrackQuery, from: &GridSpec, to: &GridSpec) -> Result<TrackQuery> {
    let o = to.point_to_cell(&from.cell_center(&query.origin)?)?;
    let d = to.point_to_cell(&from.cell_center(&query.destination)?)?;
    Ok(TrackQuery { origin: o, destination: d, ..*query })
}

struct SweepCtx<'a> {
    cfg: &'a ExperimentConfig,
    scene: Option<&'a UrbanScene>,
    map: Option<&'a RiskMap>,
    out: &'a Path,
}

impl SweepCtx<'_> {
    fn scene(&self) -> Result<&UrbanScene> {
        self.scene.ok_or_else(|| ToolError::validation("config has no scene"))
    }

    fn map(&self) -> Result<&RiskMap> {
        self.map.ok_or_else(|| ToolError::validation("config has no scene"))
    }

    fn query(&self) -> Result<&TrackQuery> {
        self.cfg.queries.first().map(|q| &q.query).ok_or_else(|| ToolError::validation("config has no queries"))
    }

    fn track_point(&self, map: &RiskMap, query: &TrackQuery, dir: &Path) -> Result<PointMetrics> {
        let r = plan_query(map, &self.cfg.performance, query, self.cfg.smoothing)?;
        track_table(&r)?.write(&dir.join("tracks.csv"))?;
        let m = r.optimal.metrics;
        Ok(PointMetrics::Track { risk_cost: m.risk_cost, transport_cost: m.transport_cost, waypoints: m.waypoints, length: m.length })
    }

    fn delay_point(&self, edit: impl Fn(&mut ScenarioConfig), dir: &Path) -> Result<PointMetrics> {
        let FleetSource::Generate(base_cfg) = &self.cfg.fleet else {
            return Err(ToolError::validation("fleet sweeps need a generated scenario"));
        };
        let mut report = Table::new(formats::REPORT);
        let (mut base, mut soa, mut operated) = (Vec::new(), Vec::new(), Vec::new());
        for &seed in &self.cfg.seeds {
            let mut sc = ScenarioConfig { seed, ..*base_cfg };
            edit(&mut sc);
            let scenario = uam_core::fleet::generate_scenario(&sc)?;
            let opt = self.cfg.optimizer_for(seed);
            let index = ConflictIndex::build(&scenario)?;
            let b = build_initial_schedule(&scenario, &index)?;
            let bo = objective_in(&b, opt.omega6, opt.omega7, scenario.aircraft.len(), opt.delay_unit);
            let r = optimize_schedule(&scenario, &index, &opt)?;
            report_row(&mut report, seed, "base", &b, &bo)?;
            report_row(&mut report, seed, "soa", &r.best.schedule, &r.best.objective)?;
            base.push(bo.t_d);
            soa.push(r.best.objective.t_d);
            operated.push(r.best.objective.s as f64);
        }
        report.write(&dir.join("report.csv"))?;
        Ok(PointMetrics::Delay {
            seeds: self.cfg.seeds.len(),
            base_average_delay: median(&base),
            soa_average_delay: median(&soa),
            soa_operated: median(&operated),
        })
    }

    fn run(&self, p: SweepPoint) -> Result<PointMetrics> {
        let dir = self.out.join(p.dir());
        match p {
            SweepPoint::Altitude(z) => {
                let map = self.map()?;
                let k = layer_k(map.grid(), z)?;
                let (unsafe_cells, mean) = layer_stats(map, k);
                formats::layer_table(map, k)?.write(&dir.join("layer.csv"))?;
                write_text(&dir.join("layer.svg"), &layer_svg(map, k, &format!("Relative risk at {z} m (layer {k})")))?;
                Ok(PointMetrics::Layer(LayerReport { altitude: z, k, unsafe_cells, mean_relative_risk: mean }))
            }
            SweepPoint::CellSize(size) => {
                let scene = self.scene()?;
                let g = scene.grid();
                let f = size / g.dx();
                if !(f >= 1.0 && f.fract() == 0.0 && (size / g.dy()) == f) {
                    return Err(ToolError::validation(format!("cell size {size} m is not a whole multiple of the raster cell")));
                }
                let coarse = scene.coarsen(f as u32, f as u32, 1)?;
                let map = build_risk_map(&coarse, &self.cfg.risk)?;
                let q = requery(self.query()?, g, coarse.grid())?;
                self.track_point(&map, &q, &dir)
            }
            SweepPoint::Weight(w) => {
                if !(0.0..=1.0).contains(&w) {
                    return Err(ToolError::validation(format!("risk weight {w} outside [0, 1]")));
                }
                let q = self.query()?.with_weights(w, 1.0 - w);
                self.track_point(self.map()?, &q, &dir)
            }
            SweepPoint::Flights(n) => self.delay_point(|c| c.flights_per_aircraft = n, &dir),
            SweepPoint::Speed(v) => self.delay_point(|c| c.speed = v, &dir),
        }
    }
}

fn status<T>(r: &std::result::Result<T, String>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    }
}

fn track_cells(m: Option<&PointMetrics>) -> Vec<String> {
    match m {
        Some(PointMetrics::Track { risk_cost, transport_cost, waypoints, length }) => {
            vec![num(*risk_cost), num(*transport_cost), waypoints.to_string(), num(*length)]
        }
        _ => vec![String::new(); 4],
    }
}

fn delay_cells(m: Option<&PointMetrics>) -> Vec<String> {
    match m {
        Some(PointMetrics::Delay { seeds, base_average_delay, soa_average_delay, soa_operated }) => {
            vec![seeds.to_string(), num(*base_average_delay), num(*soa_average_delay), num(*soa_operated)]
        }
        _ => vec![String::new(); 4],
    }
}

/// Runs every configured sweep point in parallel. Each point writes into its
/// own directory; failed points are recorded and the sweep continues.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<SweepReport> {
    cfg.validate()?;
    let axes = &cfg.sweep;
    if axes.is_empty() {
        return Err(ToolError::validation("sweep needs at least one non-empty axis"));
    }
    let needs_scene = !(axes.altitudes.is_empty() && axes.cell_sizes.is_empty() && axes.w_risk.is_empty());
    let scene = if needs_scene { Some(cfg.scene()?) } else { None };
    let map = match &scene {
        Some(s) if !(axes.altitudes.is_empty() && axes.w_risk.is_empty()) => Some(build_risk_map(s, &cfg.risk)?),
        _ => None,
    };
    let ctx = SweepCtx { cfg, scene: scene.as_ref(), map: map.as_ref(), out };

    let mut points: Vec<SweepPoint> = Vec::new();
    points.extend(axes.altitudes.iter().map(|v| SweepPoint::Altitude(*v)));
    points.extend(axes.cell_sizes.iter().map(|v| SweepPoint::CellSize(*v)));
    points.extend(axes.flights.iter().map(|v| SweepPoint::Flights(*v)));
    points.extend(axes.speeds.iter().map(|v| SweepPoint::Speed(*v)));
    points.extend(axes.w_risk.iter().map(|v| SweepPoint::Weight(*v)));
    let results: Vec<std::result::Result<PointMetrics, String>> =
        pool(workers)?.install(|| points.par_iter().map(|p| ctx.run(*p).map_err(|e| e.to_string())).collect());

    let mut report = SweepReport { altitude: vec![], cell_size: vec![], flights: vec![], speed: vec![], pareto: vec![] };
    for (p, r) in points.iter().zip(results) {
        match *p {
            SweepPoint::Altitude(z) => report.altitude.push((
                z,
                r.and_then(|m| match m {
                    PointMetrics::Layer(l) => Ok(l),
                    _ => Err("unexpected metrics".into()),
                }),
            )),
            SweepPoint::CellSize(v) => report.cell_size.push((v, r)),
            SweepPoint::Flights(v) => report.flights.push((v, r)),
            SweepPoint::Speed(v) => report.speed.push((v, r)),
            SweepPoint::Weight(v) => report.pareto.push((v, r)),
        }
    }
    write_sweep(&report, out)?;
    Ok(report)
}

fn write_sweep(r: &SweepReport, out: &Path) -> Result<()> {
    if !r.altitude.is_empty() {
        let mut t = Table::new(formats::ALTITUDE_SWEEP);
        let mut pts = Vec::new();
        for (z, res) in &r.altitude {
            let cells = match res {
                Ok(l) => {
                    pts.push((*z, l.unsafe_cells as f64));
                    vec![l.k.to_string(), l.unsafe_cells.to_string(), num(l.mean_relative_risk)]
                }
                Err(_) => vec![String::new(); 3],
            };
            t.push([vec![num(*z), status(res)], cells].concat())?;
        }
        t.write(&out.join("altitude.csv"))?;
        let s = [Series { label: "unsafe cells", points: pts, markers: true }];
        write_text(&out.join("altitude.svg"), &svg::line_plot("Unsafe cells per altitude slice", "altitude (m)", "unsafe cells", &s))?;
    }
    if !r.cell_size.is_empty() {
        let mut t = Table::new(formats::CELL_SWEEP);
        let mut pts = Vec::new();
        for (v, res) in &r.cell_size {
            if let Ok(PointMetrics::Track { risk_cost, .. }) = res {
                pts.push((*v, *risk_cost));
            }
            t.push([vec![num(*v), status(res)], track_cells(res.as_ref().ok())].concat())?;
        }
        t.write(&out.join("cell_size.csv"))?;
        let s = [Series { label: "risk cost", points: pts, markers: true }];
        write_text(&out.join("cell_size.svg"), &svg::line_plot("Optimal-track risk per cell size", "cell size (m)", "risk cost", &s))?;
    }
    let mut fleet = Table::new(formats::FLEET_SWEEP);
    for (axis, rows) in [("flights", r.flights.iter().map(|(v, m)| (*v as f64, m)).collect::<Vec<_>>()), ("speed", r.speed.iter().map(|(v, m)| (*v, m)).collect())] {
        if rows.is_empty() {
            continue;
        }
        let (mut before, mut after) = (Vec::new(), Vec::new());
        for (v, res) in &rows {
            if let Ok(PointMetrics::Delay { base_average_delay, soa_average_delay, .. }) = res {
                before.push((*v, *base_average_delay));
                after.push((*v, *soa_average_delay));
            }
            fleet.push([vec![axis.into(), num(*v), status(res)], delay_cells(res.as_ref().ok())].concat())?;
        }
        let s = [Series { label: "before", points: before, markers: false }, Series { label: "after SOA", points: after, markers: false }];
        write_text(&out.join(format!("{axis}.svg")), &svg::line_plot("Average delay before and after optimization", axis, "average delay (s)", &s))?;
    }
    if !fleet.rows().is_empty() {
        fleet.write(&out.join("fleet.csv"))?;
    }
    if !r.pareto.is_empty() {
        let pts: Vec<(f64, f64)> = r
            .pareto
            .iter()
            .filter_map(|(_, m)| match m {
                Ok(PointMetrics::Track { risk_cost, transport_cost, .. }) => Some((*risk_cost, *transport_cost)),
                _ => None,
            })
            .collect();
        let flags = non_dominated(&pts);
        let mut t = Table::new(formats::PARETO);
        let mut n = 0;
        for (w, res) in &r.pareto {
            let flag = if res.is_ok() {
                n += 1;
                (flags[n - 1] as u8).to_string()
            } else {
                String::new()
            };
            let mut cells = track_cells(res.as_ref().ok());
            cells.truncate(3);
            t.push([vec![num(*w), num(((1.0 - w) * 1e9).round() / 1e9), status(res)], cells, vec![flag]].concat())?;
        }
        t.write(&out.join("pareto.csv"))?;
        let s = [Series { label: "optimal tracks", points: pts, markers: true }];
        write_text(&out.join("pareto.svg"), &svg::line_plot("Risk and transportation cost trade-off", "risk cost", "transportation cost", &s))?;
    }
    Ok(())
}
