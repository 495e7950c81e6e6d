use rayon::prelude::*;

use randcert_core::behavior::{guessing_probability, max_min_entropy, witness_value, Behavior};
use randcert_core::bounds::{guaranteed_bound, BoundModel, TSIRELSON};
use randcert_core::dd::{dd_config, dd_jobs, default_starts, reduce_dd, OptOutcome, FEAS_TOL};
use randcert_core::extremal::{extremal_scan_with, ScanConfig, ScanPoint, TOL_EQ};
use randcert_core::npa::{di_guaranteed_with, DiBound, Level};
use randcert_core::quantum::{behavior_from_state, MeasurementSettings, Params, PureState, StateSign};
use randcert_core::sdp::{SdpConfig, SdpStatus};
use randcert_core::vertices::VertexCatalog;
use randcert_core::{WitnessKind, WitnessSpec};

use crate::behavior_io::{key, BehaviorFile};
use crate::config::{quantum_max, resolve_printed, snap_overshoot, Range, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Provenance, Report, Table};

pub const CURVE_POINTS: usize = 50;
pub const COMPARE_POINTS: usize = 24;
/// Upper end of the comparison grid in CHSH units.
pub const COMPARE_B_MAX: f64 = 2.3607;
pub const TABLE_TOL: f64 = 5e-3;
pub const SCAN_SAMPLES: usize = 300;

const ANGLE_COLUMNS: [&str; 8] = [
    "theta_x1", "theta_x2", "theta_y1", "theta_y2", "phi_x1", "phi_x2", "phi_y1", "phi_y2",
];

/// Witness values for a curve: one value, an explicit range, or the default
/// grid over the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Value(f64),
    Range(Range),
    Default,
}

/// What a curve evaluates at each witness value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSource {
    Model(BoundModel),
    Level(Level),
}

fn level_domain(kind: WitnessKind, level: Level) -> (f64, f64) {
    match (kind, level) {
        (_, Level::L0) => BoundModel::Ns.domain(kind),
        (WitnessKind::Chsh, _) => (2.0, TSIRELSON),
        _ => (0.0, quantum_max(kind)),
    }
}

fn sdp_config(max_iter: Option<usize>) -> SdpConfig {
    let mut c = SdpConfig::default();
    if let Some(m) = max_iter {
        c.max_iter = m;
    }
    c
}

fn status_name(s: SdpStatus) -> &'static str {
    match s {
        SdpStatus::Optimal => "optimal",
        SdpStatus::Infeasible => "infeasible",
        SdpStatus::MaxIter => "max_iter",
    }
}

pub fn di_bound(kind: WitnessKind, v: f64, level: Level, sdp: &SdpConfig) -> CliResult<DiBound> {
    Ok(di_guaranteed_with(WitnessSpec::new(kind, v)?, level, sdp)?)
}

pub fn curve(cfg: &RunConfig, kind: WitnessKind, source: CurveSource, grid: Grid, sdp_max_iter: Option<usize>) -> CliResult<Report> {
    let (lo, hi) = match source {
        CurveSource::Model(m) => {
            if !m.pairs_with(kind) {
                return Err(CliError::Config(format!("model {} does not apply to the {} witness", m.name(), kind.name())));
            }
            m.domain(kind)
        }
        CurveSource::Level(l) => level_domain(kind, l),
    };
    let requested = match grid {
        Grid::Value(v) => vec![v],
        Grid::Range(r) => r.points(),
        Grid::Default => Range::new(lo, hi, CURVE_POINTS)?.open_points(),
    };
    let sdp = sdp_config(sdp_max_iter);
    let mut prov = Provenance::new("curve", cfg.seed).domain(kind.name(), lo, hi);
    let mut table;
    match source {
        CurveSource::Model(m) => {
            prov = prov.note(format!("model {}", m.name()));
            table = Table::new(&["witness_value", "bits", "bits_4dp"]);
            for v in requested {
                let b = guaranteed_bound(m, WitnessSpec::new(kind, v)?)?;
                table.push(vec![Cell::Num(v), Cell::Num(b), Cell::Round4(b)]);
            }
        }
        CurveSource::Level(l) => {
            prov = prov
                .note(format!("level {}", l.name()))
                .tol("gap", sdp.gap_tol)
                .tol("feasibility", sdp.feas_tol)
                .tol("infeasibility", sdp.infeas_tol);
            table = Table::new(&[
                "witness_value",
                "value_used",
                "bits",
                "bits_4dp",
                "p_star",
                "cell",
                "max_gap",
                "status",
            ]);
            let results: Vec<CliResult<(f64, DiBound)>> = requested
                .par_iter()
                .map(|&v| {
                    let used = snap_overshoot(kind, v);
                    di_bound(kind, used, l, &sdp).map(|r| (used, r))
                })
                .collect();
            for (v, r) in requested.iter().zip(results) {
                let (used, r) = r?;
                table.push(vec![
                    Cell::Num(*v),
                    Cell::Num(used),
                    Cell::Num(r.bits),
                    Cell::Round4(r.bits),
                    Cell::Num(r.p_star),
                    Cell::text(key(r.cell.x, r.cell.y, r.cell.a, r.cell.b)),
                    Cell::Num(r.max_gap),
                    Cell::text(status_name(r.status)),
                ]);
            }
        }
    }
    Ok(Report {
        provenance: prov,
        table,
    })
}

/// One row of the side-by-side comparison at CHSH value `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub b: f64,
    pub p: f64,
    pub hardy: DiBound,
    pub cl: DiBound,
    pub chsh: DiBound,
}

impl CompareRow {
    /// Hardy ≥ CL ≥ CHSH in bits, within `slack`.
    pub fn ordered(&self, slack: f64) -> bool {
        self.hardy.bits + slack >= self.cl.bits && self.cl.bits + slack >= self.chsh.bits
    }
}

pub fn compare_rows(bs: &[f64], level: Level, sdp: &SdpConfig) -> CliResult<Vec<CompareRow>> {
    for &b in bs {
        if !(b > 2.0 && b <= TSIRELSON) {
            return Err(CliError::Config(format!("comparison needs 2 < B <= 2√2, got {b}")));
        }
    }
    bs.par_iter()
        .map(|&b| {
            let p = (b - 2.0) / 4.0;
            Ok(CompareRow {
                b,
                p,
                hardy: di_bound(WitnessKind::Hardy, snap_overshoot(WitnessKind::Hardy, p), level, sdp)?,
                cl: di_bound(WitnessKind::Cl, snap_overshoot(WitnessKind::Cl, p), level, sdp)?,
                chsh: di_bound(WitnessKind::Chsh, b, level, sdp)?,
            })
        })
        .collect()
}

pub fn default_compare_grid() -> Vec<f64> {
    Range { lo: 2.0, hi: COMPARE_B_MAX, n: COMPARE_POINTS }.open_points()
}

pub fn compare(cfg: &RunConfig, grid: Grid, level: Level, sdp_max_iter: Option<usize>) -> CliResult<Report> {
    let bs = match grid {
        Grid::Value(v) => vec![v],
        Grid::Range(r) => r.points(),
        Grid::Default => default_compare_grid(),
    };
    let sdp = sdp_config(sdp_max_iter);
    let rows = compare_rows(&bs, level, &sdp)?;
    let mut t = Table::new(&[
        "chsh_value",
        "p",
        "bits_hardy",
        "bits_cl",
        "bits_chsh",
        "bits_hardy_4dp",
        "bits_cl_4dp",
        "bits_chsh_4dp",
        "ordered",
    ]);
    for r in &rows {
        t.push(vec![
            Cell::Num(r.b),
            Cell::Num(r.p),
            Cell::Num(r.hardy.bits),
            Cell::Num(r.cl.bits),
            Cell::Num(r.chsh.bits),
            Cell::Round4(r.hardy.bits),
            Cell::Round4(r.cl.bits),
            Cell::Round4(r.chsh.bits),
            Cell::Bool(r.ordered(1e-6)),
        ]);
    }
    let prov = Provenance::new("compare", cfg.seed)
        .domain("chsh", 2.0, bs.iter().copied().fold(2.0, f64::max))
        .tol("gap", sdp.gap_tol)
        .tol("order_slack", 1e-6)
        .note(format!("level {}; p = (B - 2)/4", level.name()));
    Ok(Report { provenance: prov, table: t })
}

/// A reference randomness value at a printed witness value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub table: u8,
    pub row: u8,
    pub kind: WitnessKind,
    pub witness_printed: f64,
    pub target_bits: f64,
}

pub const TABLE_SPECS: [TableSpec; 4] = [
    TableSpec { table: 1, row: 1, kind: WitnessKind::Hardy, witness_printed: 0.0640, target_bits: 1.6787 },
    TableSpec { table: 1, row: 2, kind: WitnessKind::Hardy, witness_printed: 0.0902, target_bits: 1.3937 },
    TableSpec { table: 2, row: 1, kind: WitnessKind::Cl, witness_printed: 0.0002, target_bits: 1.9995 },
    TableSpec { table: 2, row: 2, kind: WitnessKind::Cl, witness_printed: 0.1078, target_bits: 1.5814 },
];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub spec: TableSpec,
    pub witness_used: f64,
    pub outcome: OptOutcome,
}

impl TableRow {
    pub fn error(&self) -> f64 {
        (self.outcome.best_value - self.spec.target_bits).abs()
    }

    pub fn within_tol(&self) -> bool {
        self.error() <= TABLE_TOL
    }

    pub fn flagged(&self) -> bool {
        !self.within_tol() || !self.outcome.converged || self.outcome.max_residual() > FEAS_TOL
    }
}

/// Runs the four table optimizations. All local solves of all rows are
/// scheduled together; results are reduced per row in job order, so the
/// answer does not depend on the thread count.
pub fn table_rows(starts: Option<usize>, seed: u64) -> CliResult<Vec<TableRow>> {
    let al = dd_config();
    let mut batches = Vec::new();
    for spec in TABLE_SPECS {
        let used = resolve_printed(spec.kind, spec.witness_printed);
        let n = starts.unwrap_or_else(|| default_starts(spec.kind));
        batches.push((spec, used, n, dd_jobs(WitnessSpec::new(spec.kind, used)?, n, seed)));
    }
    let flat: Vec<_> = batches.iter().flat_map(|b| b.3.iter()).collect();
    let mut results: Vec<_> = flat.par_iter().map(|(prob, p)| prob.solve(p, &al)).collect();
    let mut rows = Vec::new();
    for (spec, used, n, jobs) in batches {
        let rest = results.split_off(jobs.len());
        let mine = std::mem::replace(&mut results, rest);
        rows.push(TableRow {
            spec,
            witness_used: used,
            outcome: reduce_dd(&jobs, mine, n)?,
        });
    }
    Ok(rows)
}

fn param_cells(p: &Params, sign: StateSign) -> Vec<Cell> {
    let mut v = vec![Cell::Num(p[8]), Cell::text(sign.name())];
    v.extend(p[..8].iter().map(|&a| Cell::Num(a)));
    v
}

pub fn tables_report(cfg: &RunConfig, rows: &[TableRow]) -> Report {
    let mut cols = vec![
        "table",
        "row",
        "witness",
        "witness_printed",
        "witness_used",
        "bits",
        "bits_4dp",
        "target_bits",
        "abs_error",
        "within_tol",
        "flagged",
        "pair",
        "alpha",
        "sign",
    ];
    cols.extend(ANGLE_COLUMNS);
    cols.extend(["residual_max", "converged", "starts"]);
    let mut t = Table::new(&cols);
    for r in rows {
        let o = &r.outcome;
        let mut row = vec![
            Cell::Int(r.spec.table as i64),
            Cell::Int(r.spec.row as i64),
            Cell::text(r.spec.kind.name()),
            Cell::Round4(r.spec.witness_printed),
            Cell::Num(r.witness_used),
            Cell::Num(o.best_value),
            Cell::Round4(o.best_value),
            Cell::Round4(r.spec.target_bits),
            Cell::Num(r.error()),
            Cell::Bool(r.within_tol()),
            Cell::Bool(r.flagged()),
            Cell::text(o.pair.map_or(String::new(), |(x, y)| format!("{x}{y}"))),
        ];
        row.extend(param_cells(&o.params, o.sign));
        row.extend([Cell::Num(o.max_residual()), Cell::Bool(o.converged), Cell::Int(o.starts_used as i64)]);
        t.push(row);
    }
    let prov = Provenance::new("tables", cfg.seed)
        .tol("bits", TABLE_TOL)
        .tol("residual", FEAS_TOL)
        .domain("hardy/cl", 0.0, quantum_max(WitnessKind::Cl))
        .note("printed witness values within 5e-5 of the quantum maximum are read as the maximum");
    Report { provenance: prov, table: t }
}

pub fn tables(cfg: &RunConfig) -> CliResult<(Vec<TableRow>, Report)> {
    let rows = table_rows(cfg.starts, cfg.seed)?;
    let rep = tables_report(cfg, &rows);
    Ok((rows, rep))
}

pub fn scan_points(kind: WitnessKind, samples: usize, seed: u64) -> CliResult<Vec<ScanPoint>> {
    if kind == WitnessKind::Chsh {
        return Err(CliError::Config("scan needs the hardy or cl witness".into()));
    }
    if samples == 0 {
        return Err(CliError::Config("scan needs at least one sample".into()));
    }
    Ok(extremal_scan_with(kind, &ScanConfig::new(samples, seed))?)
}

pub fn scan(cfg: &RunConfig, kind: WitnessKind, samples: usize) -> CliResult<Report> {
    let pts = scan_points(kind, samples, cfg.seed)?;
    let mut cols = vec![
        "witness_value",
        "r_max_bits",
        "r_max_bits_4dp",
        "r_guaranteed_bits",
        "alpha",
        "sign",
    ];
    cols.extend(ANGLE_COLUMNS);
    cols.extend(["residual_max", "equality_residual", "product_value", "s_spread"]);
    let mut t = Table::new(&cols);
    for p in &pts {
        let mut row = vec![
            Cell::Num(p.witness_value),
            Cell::Num(p.r_max_bits),
            Cell::Round4(p.r_max_bits),
            Cell::Num(p.r_guaranteed_bits),
        ];
        row.extend(param_cells(&p.params, p.sign));
        row.extend([
            Cell::Num(p.residual_max),
            Cell::Num(p.report.equality_residual),
            Cell::Num(p.report.product_value),
            Cell::Num(p.report.s_spread),
        ]);
        t.push(row);
    }
    let prov = Provenance::new("scan", cfg.seed)
        .domain(kind.name(), 0.0, quantum_max(kind))
        .tol("extremality", TOL_EQ)
        .tol("residual", FEAS_TOL)
        .note(format!("{samples} samples, {} survivors", pts.len()));
    Ok(Report { provenance: prov, table: t })
}

/// Behavior to evaluate: from a state and settings, or given directly.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalInput {
    State { state: PureState, settings: MeasurementSettings },
    Behavior(Behavior),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub behavior: Behavior,
    pub chsh: f64,
    pub hardy: f64,
    pub cl: f64,
    pub max_min_entropy: f64,
    pub best_pair: (usize, usize),
    pub guessing_probability: f64,
    pub signalling: f64,
}

pub fn evaluate(input: &EvalInput) -> Evaluation {
    let b = match input {
        EvalInput::State { state, settings } => behavior_from_state(state, settings),
        EvalInput::Behavior(b) => *b,
    };
    let (pair, h) = max_min_entropy(&b);
    Evaluation {
        behavior: b,
        chsh: witness_value(&b, WitnessKind::Chsh).value,
        hardy: witness_value(&b, WitnessKind::Hardy).value,
        cl: witness_value(&b, WitnessKind::Cl).value,
        max_min_entropy: h,
        best_pair: pair,
        guessing_probability: guessing_probability(&b).0,
        signalling: b.signalling(),
    }
}

pub fn eval_report(cfg: &RunConfig, e: &Evaluation) -> Report {
    let mut t = Table::new(&["quantity", "value"]);
    let bf = BehaviorFile::from_behavior(&e.behavior);
    for (k, v) in &bf.p {
        t.push(vec![Cell::text(k.clone()), Cell::Num(*v)]);
    }
    for (k, v) in [
        ("chsh", e.chsh),
        ("hardy", e.hardy),
        ("cl", e.cl),
        ("max_min_entropy_bits", e.max_min_entropy),
        ("guessing_probability", e.guessing_probability),
        ("signalling", e.signalling),
    ] {
        t.push(vec![Cell::text(k), Cell::Num(v)]);
    }
    t.push(vec![Cell::text("best_pair"), Cell::text(format!("{}{}", e.best_pair.0, e.best_pair.1))]);
    Report {
        provenance: Provenance::new("eval", cfg.seed),
        table: t,
    }
}

/// JSON form of an evaluation; it also parses as a behavior file.
pub fn eval_json(cfg: &RunConfig, e: &Evaluation) -> serde_json::Value {
    let bf = BehaviorFile::from_behavior(&e.behavior);
    serde_json::json!({
        "schema": bf.schema,
        "provenance": Provenance::new("eval", cfg.seed).to_json(),
        "p": bf.p,
        "chsh": e.chsh,
        "hardy": e.hardy,
        "cl": e.cl,
        "max_min_entropy_bits": e.max_min_entropy,
        "best_pair": [e.best_pair.0, e.best_pair.1],
        "guessing_probability": e.guessing_probability,
        "signalling": e.signalling,
    })
}

pub fn vertices(cfg: &RunConfig) -> Report {
    let cat = VertexCatalog::new();
    let mut cols: Vec<String> = vec!["kind".into(), "number".into()];
    let bf = BehaviorFile::from_behavior(&cat.pr[0]);
    cols.extend(bf.p.keys().cloned());
    cols.extend(["chsh".into(), "hardy".into(), "cl".into()]);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&col_refs);
    for (i, b) in cat.all().iter().enumerate() {
        let (kind, n) = VertexCatalog::label(i);
        let mut row = vec![Cell::text(kind), Cell::Int(n as i64)];
        row.extend(BehaviorFile::from_behavior(b).p.values().map(|&v| Cell::Num(v)));
        for k in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
            row.push(Cell::Num(witness_value(b, k).value));
        }
        t.push(row);
    }
    Report {
        provenance: Provenance::new("vertices", cfg.seed),
        table: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ns_curve_hits_both_ends() {
        let cfg = RunConfig::default();
        let r = curve(&cfg, WitnessKind::Chsh, CurveSource::Model(BoundModel::Ns), Grid::Default, None).unwrap();
        let last = r.table.rows.last().unwrap();
        assert_eq!(last[0], Cell::Num(4.0));
        assert_eq!(last[1], Cell::Num(1.0));
        let at_two = curve(&cfg, WitnessKind::Chsh, CurveSource::Model(BoundModel::Ns), Grid::Value(2.0), None).unwrap();
        assert_eq!(at_two.table.rows[0][1], Cell::Num(0.0));
    }

    #[test]
    fn model_must_match_witness() {
        let cfg = RunConfig::default();
        let e = curve(&cfg, WitnessKind::Chsh, CurveSource::Model(BoundModel::HardyConvex), Grid::Default, None);
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn sdp_curve_above_the_maximum_is_infeasible() {
        let cfg = RunConfig::default();
        let e = curve(&cfg, WitnessKind::Hardy, CurveSource::Level(Level::L1ab), Grid::Value(0.1), None);
        assert!(matches!(e, Err(CliError::Infeasible(_))), "{e:?}");
    }

    #[test]
    fn compare_rejects_local_values() {
        let e = compare_rows(&[1.9], Level::L1ab, &SdpConfig::default());
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn vertex_dump_has_all_vertices() {
        let r = vertices(&RunConfig::default());
        assert_eq!(r.table.rows.len(), 24);
        assert_eq!(r.table.columns.len(), 21);
        assert_eq!(r.table.rows[0][18], Cell::Num(4.0));
    }

    #[test]
    fn eval_of_the_tsirelson_point() {
        use core::f64::consts::PI;
        let settings = MeasurementSettings::new([0.0, PI / 2.0, PI / 4.0, PI / 4.0], [0.0, 0.0, 0.0, PI]).unwrap();
        let e = evaluate(&EvalInput::State { state: PureState::singlet(), settings });
        assert!((e.chsh.abs() - TSIRELSON).abs() < 1e-12, "{}", e.chsh);
        assert!(e.signalling < 1e-12);
        let j = eval_json(&RunConfig::default(), &e);
        assert_eq!(BehaviorFile::parse(&j.to_string()).unwrap(), e.behavior);
    }
}
